#include "kcascade/conjugacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kcascade/error.hpp"

namespace kcascade {

namespace {

constexpr int kNewtonMaxIter = 100;
constexpr double kNewtonTol = 1e-12;

double cubic(double u, double a) {
    return u + a * u * u * u;
}

StateVector map_coordinates(const StateVector& x, const std::vector<double>& coefficients, bool invert) {
    if (x.layer_count() != coefficients.size()) {
        throw Error(ErrorCode::DimensionMismatch, "conjugacy has one coefficient per layer");
    }
    StateVector out = x;
    for (std::size_t i = 1; i <= x.layer_count(); ++i) {
        const double a = coefficients[i - 1];
        if (a == 0.0) continue;
        CVector& v = out.layer(i);
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            const double re = v(k).real();
            const double im = v(k).imag();
            v(k) = invert ? Complex(cubic_inverse(re, a), cubic_inverse(im, a)) : Complex(cubic(re, a), cubic(im, a));
        }
    }
    return out;
}

}  // namespace

double cubic_inverse(double y, double a) {
    if (!std::isfinite(y) || !(a >= 0.0) || !std::isfinite(a)) {
        throw Error(ErrorCode::NewtonDivergence, "cubic inverse needs finite y and finite a >= 0");
    }
    if (a == 0.0 || y == 0.0) return y;

    // The root lies between 0 and y because u + a u^3 is odd and increasing.
    double lo = std::min(0.0, y);
    double hi = std::max(0.0, y);
    double u = y;
    for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
        const double f = cubic(u, a) - y;
        if (f == 0.0) return u;
        if (f > 0.0) {
            hi = u;
        } else {
            lo = u;
        }
        double next = u - f / (1.0 + 3.0 * a * u * u);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - u);
        u = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(u) || hi - lo == 0.0) return u;
    }
    if (std::abs(cubic(u, a) - y) <= kNewtonTol * (1.0 + std::abs(y))) return u;
    throw Error(ErrorCode::NewtonDivergence, "cubic inverse did not converge for y = " + std::to_string(y));
}

Conjugacy Conjugacy::identity() {
    return Conjugacy();
}

Conjugacy Conjugacy::polynomial_diagonal(std::vector<double> coefficients) {
    for (double a : coefficients) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw Error(ErrorCode::PreconditionViolation, "cubic coefficients must be finite and non-negative");
        }
    }
    Conjugacy c;
    c.kind_ = Kind::PolynomialDiagonal;
    c.mode_ = InverseMode::Newton;
    c.coefficients_ = std::move(coefficients);
    return c;
}

Conjugacy Conjugacy::user_supplied(Map forward, Map inverse) {
    if (!forward || !inverse) throw Error(ErrorCode::PreconditionViolation, "both maps are required");
    Conjugacy c;
    c.kind_ = Kind::UserSupplied;
    c.forward_ = std::move(forward);
    c.inverse_ = std::move(inverse);
    return c;
}

StateVector Conjugacy::forward(const StateVector& x) const {
    switch (kind_) {
        case Kind::Identity: return x;
        case Kind::PolynomialDiagonal: return map_coordinates(x, coefficients_, false);
        case Kind::UserSupplied: return forward_(x);
    }
    return x;
}

StateVector Conjugacy::inverse(const StateVector& y) const {
    switch (kind_) {
        case Kind::Identity: return y;
        case Kind::PolynomialDiagonal: return map_coordinates(y, coefficients_, true);
        case Kind::UserSupplied: return inverse_(y);
    }
    return y;
}

Conjugacy make_polynomial_conjugacy(const CascadeSystem& sys, std::vector<double> coefficients) {
    if (coefficients.size() != sys.size()) {
        throw Error(ErrorCode::DimensionMismatch, "need one cubic coefficient per layer");
    }
    return Conjugacy::polynomial_diagonal(std::move(coefficients));
}

double conjugacy_round_trip_error(const Conjugacy& conj, const std::vector<StateVector>& samples) {
    double worst = 0.0;
    for (const StateVector& y : samples) {
        const double err = composite_norm(conj.forward(conj.inverse(y)) - y);
        worst = std::max(worst, err / (1.0 + composite_norm(y)));
    }
    return worst;
}

NonlinearCascade::NonlinearCascade(CascadeSystem base, Conjugacy conj) : base_(std::move(base)), conj_(std::move(conj)) {
    if (conj_.kind() == Conjugacy::Kind::PolynomialDiagonal && conj_.coefficients().size() != base_.size()) {
        throw Error(ErrorCode::DimensionMismatch, "need one cubic coefficient per layer");
    }
}

StateVector NonlinearCascade::step(const StateVector& y) const {
    return conj_.forward(lin_step(base_, conj_.inverse(y)));
}

StateVector NonlinearCascade::nominal_step(const StateVector& y) const {
    return conj_.forward(nom_step(base_, conj_.inverse(y)));
}

StateVector NonlinearCascade::pert(const PerturbationData& pd, const StateVector& y) const {
    return conj_.forward(apply_pert(pd, conj_.inverse(y)));
}

namespace {

template <class Step>
OrbitTrace iterate_conjugate(const NonlinearCascade& nl, const StateVector& y0, std::size_t steps, SystemKind kind,
                             Step step) {
    if (y0.dims() != nl.base().dims()) throw Error(ErrorCode::DimensionMismatch, "state does not match cascade");
    OrbitTrace trace;
    trace.kind = kind;
    trace.states.reserve(steps + 1);
    trace.states.push_back(y0);
    for (std::size_t t = 1; t <= steps; ++t) {
        trace.states.push_back(step(trace.states.back()));
        const StateVector& y = trace.states.back();
        if (!y.all_finite() || !(composite_norm(nl.conjugacy().inverse(y)) <= kOverflowNorm)) {
            throw Error(ErrorCode::Overflow, "nonlinear orbit left the overflow budget at step " + std::to_string(t));
        }
    }
    return trace;
}

}  // namespace

OrbitTrace iterate_nonlin(const NonlinearCascade& nl, const StateVector& y0, std::size_t steps) {
    return iterate_conjugate(nl, y0, steps, SystemKind::NonLin, [&nl](const StateVector& y) { return nl.step(y); });
}

OrbitTrace iterate_nominal_nonlinear(const NonlinearCascade& nl, const StateVector& y0, std::size_t steps) {
    return iterate_conjugate(nl, y0, steps, SystemKind::NominalNonlinear,
                             [&nl](const StateVector& y) { return nl.nominal_step(y); });
}

Theorem3Report check_theorem3(const NonlinearCascade& nl, const PerturbationData& pd, const StateVector& y0,
                              std::size_t steps, const CheckSettings& settings) {
    const OrbitTrace coupled = iterate_nonlin(nl, y0, steps);
    const OrbitTrace nominal = iterate_nominal_nonlinear(nl, nl.pert(pd, y0), steps);
    Theorem3Report r;
    r.in_working_ball = composite_norm(y0) <= kWorkingBallRadius;
    r.error.reserve(steps + 1);
    for (std::size_t t = 0; t <= steps; ++t) r.error.push_back(composite_norm(coupled.states[t] - nominal.states[t]));
    r.terminal_ratio = terminal_ratio(r.error);
    r.pass = r.terminal_ratio <= settings.decay_factor;
    return r;
}

Theorem4Report check_theorem4(const NonlinearCascade& nl, const PerturbationData& pd, std::size_t i, std::size_t s,
                              const StateVector& y0, std::size_t steps, const CheckSettings& settings) {
    const CascadeSystem& sys = nl.base();
    const PrincipalEigenfunction psi = principal_eigenfunction(sys, i, s);
    const Conjugacy& tau = nl.conjugacy();
    const double layer_norm = sys.norm(i);

    // Nonlinear path: psi o tau^-1 along the nonlinear orbit and at the
    // conjugated perturbed initial condition.
    const OrbitTrace nonlinear = iterate_nonlin(nl, y0, steps);
    const Complex nonlinear_anchor = psi(tau.inverse(nl.pert(pd, y0)));

    // Linear path from x0 = tau^-1(y0).
    const StateVector x0 = tau.inverse(y0);
    const OrbitTrace linear = iterate_lin(sys, x0, steps);
    const Complex linear_anchor = psi(apply_pert(pd, x0));

    Theorem4Report r;
    r.max_path_gap = 0.0;
    Complex lambda_t{1.0, 0.0};
    for (std::size_t t = 0; t <= steps; ++t) {
        const double scale = std::pow(layer_norm, static_cast<double>(t));
        const double q_nl = std::abs(psi(tau.inverse(nonlinear.states[t])) - lambda_t * nonlinear_anchor) / scale;
        const double q_lin = std::abs(psi(linear.states[t]) - lambda_t * linear_anchor) / scale;
        r.nonlinear_ratio.push_back(q_nl);
        r.linear_ratio.push_back(q_lin);
        if (t <= kPathCompareSteps) r.max_path_gap = std::max(r.max_path_gap, std::abs(q_nl - q_lin) / std::max(1.0, q_lin));
        lambda_t *= psi.eigenvalue;
    }
    r.paths_agree = r.max_path_gap <= kPathTolerance;
    r.decay_ratio = terminal_ratio(r.nonlinear_ratio);
    r.decay_pass = r.decay_ratio <= settings.decay_factor;
    r.pass = r.paths_agree && r.decay_pass;
    return r;
}

}  // namespace kcascade
