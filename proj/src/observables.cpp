#include "kcascade/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kcascade/error.hpp"

namespace kcascade {

namespace {

// A deflated functional that grows past this factor has picked up a fast mode.
constexpr double kDeflationGrowthCap = 1e8;
constexpr double kModulusTieTol = 1e-12;

void require_layer_index(const CascadeSystem& sys, std::size_t i, std::size_t s) {
    if (i < 1 || i > sys.size()) throw Error(ErrorCode::IndexOutOfRange, "layer " + std::to_string(i));
    if (s > sys.dim(i)) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "eigenfunction index " + std::to_string(s) + " exceeds layer dimension " + std::to_string(sys.dim(i)));
    }
}

Eigen::Index leading_dim(const CascadeSystem& sys, std::size_t i) {
    Eigen::Index m = 0;
    for (std::size_t j = 1; j <= i; ++j) m += static_cast<Eigen::Index>(sys.dim(j));
    return m;
}

// Coupled step restricted to layers 1..i, which evolve autonomously.
std::vector<CVector> leading_step(const CascadeSystem& sys, const std::vector<CVector>& x, std::size_t i) {
    std::vector<CVector> next;
    next.reserve(i);
    for (std::size_t k = 1; k <= i; ++k) {
        CVector v = sys.layer(k) * x[k - 1];
        for (std::size_t j = 1; j < k; ++j) {
            if (const CMatrix* c = sys.coupling(k, j)) v.noalias() += *c * x[j - 1];
        }
        next.push_back(std::move(v));
    }
    return next;
}

}  // namespace

Complex PrincipalEigenfunction::evaluate_layer(const CVector& xi) const {
    if (is_constant()) return {1.0, 0.0};
    if (xi.size() != coeff_row.size()) throw Error(ErrorCode::DimensionMismatch, "layer dimension mismatch");
    return coeff_row * xi;
}

PrincipalEigenfunction principal_eigenfunction(const CascadeSystem& sys, std::size_t i, std::size_t s) {
    require_layer_index(sys, i, s);
    PrincipalEigenfunction pe;
    pe.layer = i;
    pe.index = s;
    if (s == 0) return pe;
    const EigDecomposition& e = sys.eig(i);
    const auto row = static_cast<Eigen::Index>(s - 1);
    pe.coeff_row = e.inverse.row(row);
    pe.eigenvalue = e.values(row);
    return pe;
}

Complex ProductEigenfunction::operator()(const StateVector& x) const {
    Complex value{1.0, 0.0};
    for (const auto& f : factors) {
        if (!f.is_constant()) value *= f(x);
    }
    return value;
}

ProductEigenfunction constant_observable(std::size_t layer_count) {
    ProductEigenfunction out;
    out.multi_index.assign(layer_count, 0);
    for (std::size_t k = 1; k <= layer_count; ++k) {
        PrincipalEigenfunction c;
        c.layer = k;
        out.factors.push_back(c);
    }
    return out;
}

ProductEigenfunction extend_to_cascade(const PrincipalEigenfunction& pe, std::size_t layer_count) {
    if (pe.layer < 1 || pe.layer > layer_count) throw Error(ErrorCode::IndexOutOfRange, "layer outside cascade");
    ProductEigenfunction out = constant_observable(layer_count);
    out.multi_index[pe.layer - 1] = pe.index;
    out.factors[pe.layer - 1] = pe;
    out.eigenvalue = pe.eigenvalue;
    return out;
}

ProductEigenfunction bullet_product(const ProductEigenfunction& a, const ProductEigenfunction& b) {
    if (a.multi_index.size() != b.multi_index.size()) {
        throw Error(ErrorCode::DimensionMismatch, "product eigenfunctions over different cascades");
    }
    ProductEigenfunction out;
    out.multi_index.resize(a.multi_index.size());
    out.factors.reserve(a.factors.size());
    for (std::size_t k = 0; k < a.multi_index.size(); ++k) {
        const std::size_t sa = a.multi_index[k];
        const std::size_t sb = b.multi_index[k];
        if (sa != 0 && sb != 0) {
            throw Error(ErrorCode::SameLayerProduct, "both factors are nonconstant on layer " + std::to_string(k + 1));
        }
        out.multi_index[k] = sa + sb;
        out.factors.push_back(sa != 0 ? a.factors[k] : b.factors[k]);
    }
    out.eigenvalue = a.eigenvalue * b.eigenvalue;
    return out;
}

StateMap pert_map(const PerturbationData& pd) {
    return {"pert", [&pd](const StateVector& x) { return apply_pert(pd, x); }};
}

Complex ComposedObservable::operator()(const StateVector& x) const {
    StateVector y = x;
    for (const auto& m : pre_maps) y = m.apply(y);
    return base(y);
}

bool ComposedObservable::composed_with_pert() const noexcept {
    return std::any_of(pre_maps.begin(), pre_maps.end(), [](const StateMap& m) { return m.name == "pert"; });
}

std::function<StateVector(const StateVector&)> lin_map(const CascadeSystem& sys) {
    return [&sys](const StateVector& x) { return lin_step(sys, x); };
}

std::function<StateVector(const StateVector&)> nom_map(const CascadeSystem& sys) {
    return [&sys](const StateVector& x) { return nom_step(sys, x); };
}

Complex pert_eigenfunction_value(const CascadeSystem& sys, const PerturbationData& pd, std::size_t i, std::size_t s,
                                 const StateVector& x) {
    const PrincipalEigenfunction psi = principal_eigenfunction(sys, i, s);
    if (psi.is_constant()) return {1.0, 0.0};
    return psi.evaluate_layer(apply_pert_layer(pd, x, i));
}

double eigenfunction_residual(const CascadeSystem& sys, const PerturbationData& pd, std::size_t i, std::size_t s,
                              const std::vector<StateVector>& samples, std::size_t max_t) {
    const PrincipalEigenfunction psi = principal_eigenfunction(sys, i, s);
    if (psi.is_constant()) return 0.0;
    double worst = 0.0;
    for (const StateVector& x0 : samples) {
        const Complex phi0 = psi.evaluate_layer(apply_pert_layer(pd, x0, i));
        const double scale = std::max(1.0, std::abs(phi0));
        StateVector x = x0;
        Complex lambda_t{1.0, 0.0};
        for (std::size_t t = 1; t <= max_t; ++t) {
            x = lin_step(sys, x);
            lambda_t *= psi.eigenvalue;
            const Complex phi = psi.evaluate_layer(apply_pert_layer(pd, x, i));
            worst = std::max(worst, std::abs(phi - lambda_t * phi0) / scale);
        }
    }
    return worst;
}

Theorem2Report check_theorem2(const CascadeSystem& sys, const PerturbationData& pd, std::size_t i, std::size_t s,
                              const StateVector& x, std::size_t steps, const CheckSettings& settings) {
    const PrincipalEigenfunction psi = principal_eigenfunction(sys, i, s);
    const OrbitTrace coupled = iterate_lin(sys, x, steps);
    const StateVector perturbed = apply_pert(pd, x);
    const OrbitTrace nominal = iterate_nom(sys, perturbed, steps);
    const Complex anchor = psi(perturbed);

    std::vector<double> d_norms(i, 0.0);
    for (std::size_t j = 1; j < i; ++j) d_norms[j - 1] = operator_norm(pd.D(i, j));

    Theorem2Report r;
    double margin = std::numeric_limits<double>::infinity();
    Complex lambda_t{1.0, 0.0};
    for (std::size_t t = 0; t <= steps; ++t) {
        // (U_Nom^t psi)(pert x) = lambda^t psi(pert x) for a principal eigenfunction.
        const double diff = std::abs(psi(coupled.states[t]) - lambda_t * anchor);
        lambda_t *= psi.eigenvalue;
        double bound = 0.0;
        for (std::size_t j = 1; j < i; ++j) bound += d_norms[j - 1] * nominal.states[t].layer(j).norm();
        bound *= psi.norm();
        margin = std::min(margin, bound - diff);
        if (diff > bound + settings.slack) ++r.violations;
        r.difference.push_back(diff);
        r.ratio.push_back(diff / std::pow(sys.norm(i), static_cast<double>(t)));
    }
    r.margin = margin;
    r.bound_pass = r.violations == 0;
    r.decay_ratio = terminal_ratio(r.ratio);
    r.decay_pass = r.decay_ratio <= settings.decay_factor;
    r.pass = r.bound_pass && r.decay_pass;
    return r;
}

bool is_peripheral(const CascadeSystem& sys, std::size_t i, std::size_t s) {
    require_layer_index(sys, i, s);
    if (s == 0) return false;
    return std::abs(std::abs(sys.eig(i).values(static_cast<Eigen::Index>(s - 1))) - sys.norm(i)) <= kPeripheralTol;
}

Complex laplace_average(const CascadeSystem& sys, const PerturbationData& pd, std::size_t i, std::size_t s,
                        const StateVector& x, std::size_t terms) {
    if (x.dims() != pd.dims) throw Error(ErrorCode::DimensionMismatch, "state does not match cascade dimensions");
    if (terms == 0) throw Error(ErrorCode::PreconditionViolation, "need at least one term");
    const PrincipalEigenfunction psi = principal_eigenfunction(sys, i, s);
    if (psi.is_constant()) return {1.0, 0.0};
    if (!is_peripheral(sys, i, s)) {
        throw Error(ErrorCode::NotPeripheral, "eigenvalue " + std::to_string(s) + " of layer " + std::to_string(i) +
                                                  " is not peripheral; use the deflated average");
    }
    // Iterate lambda^-t Lin^t x directly so neither factor under- or overflows.
    std::vector<CVector> y = x.slice_range(1, i);
    const Complex inv_lambda = 1.0 / psi.eigenvalue;
    Complex sum{0.0, 0.0};
    for (std::size_t t = 0; t < terms; ++t) {
        sum += psi.evaluate_layer(y[i - 1]);
        y = leading_step(sys, y, i);
        for (auto& v : y) v *= inv_lambda;
    }
    return sum / static_cast<double>(terms);
}

Complex deflated_laplace_average(const CascadeSystem& sys, const PerturbationData& pd, std::size_t i, std::size_t s,
                                 const StateVector& x, std::size_t terms) {
    if (x.dims() != pd.dims) throw Error(ErrorCode::DimensionMismatch, "state does not match cascade dimensions");
    if (terms == 0) throw Error(ErrorCode::PreconditionViolation, "need at least one term");
    const PrincipalEigenfunction psi = principal_eigenfunction(sys, i, s);
    if (psi.is_constant()) return {1.0, 0.0};

    const Eigen::Index m = leading_dim(sys, i);
    const CMatrix lin = sys.assembled().topLeftCorner(m, m);
    const CMatrix pert = pd.assembled().topLeftCorner(m, m);

    // Rows of phi are the eigenfunctions psi_{j,k} o pert_j for j <= i; pert is
    // unit lower triangular, so phi^-1 = pert^-1 * blockdiag(V_j).
    CMatrix to_modes = CMatrix::Zero(m, m);
    CMatrix from_modes = CMatrix::Zero(m, m);
    std::vector<Complex> modes;
    Eigen::Index off = 0;
    for (std::size_t j = 1; j <= i; ++j) {
        const EigDecomposition& e = sys.eig(j);
        const auto d = static_cast<Eigen::Index>(e.dim());
        to_modes.block(off, off, d, d) = e.inverse;
        from_modes.block(off, off, d, d) = e.vectors;
        for (Eigen::Index k = 0; k < d; ++k) modes.push_back(e.values(k));
        off += d;
    }
    const CMatrix phi = to_modes * pert;
    const CMatrix phi_inv = pert.triangularView<Eigen::UnitLower>().solve(from_modes);

    const double modulus = std::abs(psi.eigenvalue);
    CVector keep(m);
    bool any_removed = false;
    for (Eigen::Index k = 0; k < m; ++k) {
        const bool faster = std::abs(modes[static_cast<std::size_t>(k)]) > modulus + kModulusTieTol * std::max(1.0, modulus);
        keep(k) = faster ? 0.0 : 1.0;
        any_removed = any_removed || faster;
    }
    const CMatrix projector = any_removed ? CMatrix(phi_inv * keep.asDiagonal() * phi) : CMatrix::Identity(m, m);

    CRowVector u = CRowVector::Zero(m);
    u.segment(leading_dim(sys, i) - static_cast<Eigen::Index>(sys.dim(i)), psi.coeff_row.size()) = psi.coeff_row;
    if (any_removed) u = u * projector;
    const double start = std::max(1.0, u.norm());
    const CVector flat = StateVector(x.slice_range(1, i)).flatten();
    const Complex inv_lambda = 1.0 / psi.eigenvalue;

    Complex sum{0.0, 0.0};
    for (std::size_t t = 0; t < terms; ++t) {
        sum += (u * flat).value();
        u = (u * lin) * inv_lambda;
        if (any_removed) u = u * projector;
        if (!(u.norm() <= kDeflationGrowthCap * start)) {
            throw Error(ErrorCode::DeflationIncomplete, "deflated functional grew at term " + std::to_string(t + 1));
        }
    }
    return sum / static_cast<double>(terms);
}

}  // namespace kcascade
