#include "kcascade/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kcascade/error.hpp"

namespace kcascade {

std::string_view to_string(SystemKind kind) noexcept {
    switch (kind) {
        case SystemKind::Lin: return "Lin";
        case SystemKind::Nom: return "Nom";
        case SystemKind::NonLin: return "NonLin";
        case SystemKind::NominalNonlinear: return "NominalNonlinear";
    }
    return "Unknown";
}

namespace {

void require_dims(const CascadeSystem& sys, const StateVector& x) {
    if (x.dims() != sys.dims()) throw Error(ErrorCode::DimensionMismatch, "state does not match cascade dimensions");
}

void guard_overflow(const StateVector& x, std::size_t t) {
    const double norm = composite_norm(x);
    if (!(norm <= kOverflowNorm)) {
        throw Error(ErrorCode::Overflow, "orbit left the overflow budget at step " + std::to_string(t));
    }
}

template <class Step>
OrbitTrace iterate(const CascadeSystem& sys, const StateVector& x0, std::size_t steps, SystemKind kind, Step step) {
    require_dims(sys, x0);
    OrbitTrace trace;
    trace.kind = kind;
    trace.states.reserve(steps + 1);
    trace.states.push_back(x0);
    for (std::size_t t = 1; t <= steps; ++t) {
        trace.states.push_back(step(sys, trace.states.back()));
        guard_overflow(trace.states.back(), t);
    }
    return trace;
}

}  // namespace

StateVector lin_step(const CascadeSystem& sys, const StateVector& x) {
    require_dims(sys, x);
    std::vector<CVector> next;
    next.reserve(sys.size());
    for (std::size_t i = 1; i <= sys.size(); ++i) {
        CVector v = sys.layer(i) * x.layer(i);
        for (std::size_t j = 1; j < i; ++j) {
            if (const CMatrix* c = sys.coupling(i, j)) v.noalias() += *c * x.layer(j);
        }
        next.push_back(std::move(v));
    }
    return StateVector(std::move(next));
}

StateVector nom_step(const CascadeSystem& sys, const StateVector& x) {
    require_dims(sys, x);
    std::vector<CVector> next;
    next.reserve(sys.size());
    for (std::size_t i = 1; i <= sys.size(); ++i) next.emplace_back(sys.layer(i) * x.layer(i));
    return StateVector(std::move(next));
}

OrbitTrace iterate_lin(const CascadeSystem& sys, const StateVector& x0, std::size_t steps) {
    return iterate(sys, x0, steps, SystemKind::Lin, lin_step);
}

OrbitTrace iterate_nom(const CascadeSystem& sys, const StateVector& x0, std::size_t steps) {
    return iterate(sys, x0, steps, SystemKind::Nom, nom_step);
}

double ErrorSeries::bound_b_scaled(std::size_t layer, std::size_t t) const {
    return bound_b.at(layer) * std::pow(layer_norms.at(layer), static_cast<double>(t));
}

ErrorSeries compute_error_series(const CascadeSystem& sys, const PerturbationData& pd, const StateVector& x0,
                                 std::size_t steps) {
    if (sys.dims() != pd.dims) throw Error(ErrorCode::DimensionMismatch, "perturbation data belongs to another system");
    const std::size_t n = sys.size();
    const StateVector p = apply_pert(pd, x0);
    const OrbitTrace coupled = iterate_lin(sys, x0, steps);
    const OrbitTrace nominal = iterate_nom(sys, p, steps);

    std::vector<double> d_norms(n * n, 0.0);
    for (std::size_t i = 2; i <= n; ++i) {
        for (std::size_t j = 1; j < i; ++j) d_norms[(i - 1) * n + (j - 1)] = operator_norm(pd.D(i, j));
    }

    ErrorSeries es;
    es.abs_err.assign(n, std::vector<double>(steps + 1, 0.0));
    es.rel_err.assign(n, std::vector<double>(steps + 1, 0.0));
    es.bound_a.assign(n, std::vector<double>(steps + 1, 0.0));
    es.bound_b.assign(n, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        es.layer_norms.push_back(sys.norm(i));
        for (std::size_t j = 1; j < i; ++j) es.bound_b[i - 1] += d_norms[(i - 1) * n + (j - 1)] * p.layer(j).norm();
    }

    for (std::size_t t = 0; t <= steps; ++t) {
        const StateVector& xc = coupled.states[t];
        const StateVector& xn = nominal.states[t];
        for (std::size_t i = 1; i <= n; ++i) {
            const double abs_err = (xc.layer(i) - xn.layer(i)).norm();
            double bound = 0.0;
            for (std::size_t j = 1; j < i; ++j) bound += d_norms[(i - 1) * n + (j - 1)] * xn.layer(j).norm();
            es.abs_err[i - 1][t] = abs_err;
            es.rel_err[i - 1][t] = abs_err / std::pow(sys.norm(i), static_cast<double>(t));
            es.bound_a[i - 1][t] = bound;
        }
    }
    return es;
}

Theorem1Report check_theorem1(const ErrorSeries& es, const CheckSettings& settings) {
    Theorem1Report r;
    constexpr double inf = std::numeric_limits<double>::infinity();
    double margin_a = inf;
    double margin_b = inf;
    const std::size_t horizon = es.horizon();
    r.decay_ratio.assign(es.layers(), 0.0);
    r.decay_pass = true;

    for (std::size_t layer = 1; layer < es.layers(); ++layer) {
        for (std::size_t t = 0; t <= horizon; ++t) {
            const double a = es.bound_a[layer][t];
            const double b = es.bound_b_scaled(layer, t);
            const double err = es.abs_err[layer][t];
            margin_a = std::min(margin_a, a - err);
            margin_b = std::min(margin_b, b - a);
            if (err > a + settings.slack) ++r.bound_a_violations;
            if (a > b + settings.slack) ++r.bound_b_violations;
        }
        const auto& rel = es.rel_err[layer];
        const double reference = *std::max_element(rel.begin(), rel.begin() + static_cast<std::ptrdiff_t>(horizon / 2 + 1));
        const double terminal = rel[horizon];
        double ratio = 0.0;
        if (reference > 0.0) {
            ratio = terminal / reference;
        } else if (terminal > 0.0) {
            ratio = inf;
        }
        r.decay_ratio[layer] = ratio;
        if (!(ratio <= settings.decay_factor)) r.decay_pass = false;
    }
    r.bound_a_margin = margin_a == inf ? 0.0 : margin_a;
    r.bound_b_margin = margin_b == inf ? 0.0 : margin_b;
    r.bound_a_pass = r.bound_a_violations == 0;
    r.bound_b_pass = r.bound_b_violations == 0;
    r.pass = r.bound_a_pass && r.bound_b_pass && r.decay_pass;
    return r;
}

Corollary1Report check_corollary1(const CascadeSystem& sys, const PerturbationData& pd, const StateVector& x0,
                                  std::size_t steps, const CheckSettings& settings) {
    const OrbitTrace coupled = iterate_lin(sys, x0, steps);
    const OrbitTrace nominal = iterate_nom(sys, apply_pert(pd, x0), steps);
    Corollary1Report r;
    r.error.reserve(steps + 1);
    for (std::size_t t = 0; t <= steps; ++t) r.error.push_back(composite_norm(coupled.states[t] - nominal.states[t]));
    r.initial_error = r.error.front();
    r.terminal_error = r.error.back();
    r.ratio = r.initial_error > 0.0 ? r.terminal_error / r.initial_error : 0.0;
    r.pass = r.initial_error > 0.0 ? r.terminal_error <= settings.equivalence_factor * r.initial_error
                                   : r.terminal_error <= settings.slack;
    return r;
}

double terminal_ratio(const std::vector<double>& series) {
    if (series.empty()) return 0.0;
    const double peak = *std::max_element(series.begin(), series.end());
    if (!(peak > 0.0)) return 0.0;
    return series.back() / peak;
}

double log_linear_slope(const std::vector<double>& series, std::size_t t0, std::size_t t1) {
    if (t1 >= series.size() || t0 >= t1) throw Error(ErrorCode::PreconditionViolation, "invalid fit window");
    const double count = static_cast<double>(t1 - t0 + 1);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t t = t0; t <= t1; ++t) {
        const double x = static_cast<double>(t);
        const double y = std::log(std::max(series[t], kLogFloor));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace kcascade
