#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <vector>

#include "kcascade/cascade.hpp"
#include "kcascade/numerics.hpp"
#include "kcascade/state.hpp"

namespace kcascade {

/// Returns B~ with B~(l,m) = B(l,m) / (1 - lambda_j(m) / lambda_i(l)), the
/// matrix for which
///   sum_{k<t} Lambda_i^-k B Lambda_j^k = B~ - Lambda_i^-t B~ Lambda_j^t.
/// Throws ResonantPair when a denominator is within the gap tolerance of 0.
[[nodiscard]] CMatrix geometric_sum_twiddle(const CMatrix& b, const CVector& lambda_i, const CVector& lambda_j);

using XComplex = std::complex<long double>;
using XMatrix = Eigen::Matrix<XComplex, Eigen::Dynamic, Eigen::Dynamic>;
using XVector = Eigen::Matrix<XComplex, Eigen::Dynamic, 1>;

/// Long double working copy of the layer eigendata, D and pert rows. The
/// double members of PerturbationData are rounded from it; evaluation
/// (apply_pert*, ClosedFormSolution) reads this copy.
struct ExtendedPerturbation {
    std::vector<XMatrix> vectors;
    std::vector<XMatrix> inverse;
    std::vector<XVector> values;
    std::map<LayerPair, XMatrix> d;
    std::vector<XMatrix> pert_rows;
};

/// Coupling matrices and the (multilinear, hence matrix-valued) perturbation
/// of initial conditions for a chained cascade.
///
/// Layer i of the coupled orbit is
///   x_i(t) = sum_{j<=i} (-1)^{i-j} D_{i,j} L_j^t pert_j(x_1..x_j)
/// and pert_i(x) = sum_{j<=i} P_{i,j} x_j with P_{i,i} = I.
struct PerturbationData {
    std::vector<std::size_t> dims;
    /// D_{i,j} for 1 <= j <= i <= n; D_{i,i} = I.
    std::map<LayerPair, CMatrix> d;
    /// C~_{i,j} for 1 <= j < i <= n.
    std::map<LayerPair, CMatrix> ctilde;
    /// Row block [P_{i,1} ... P_{i,i}] of size d_i x (d_1 + ... + d_i), one per layer.
    std::vector<CMatrix> pert_rows;
    ExtendedPerturbation ext;

    [[nodiscard]] std::size_t size() const noexcept { return dims.size(); }
    [[nodiscard]] const CMatrix& D(std::size_t i, std::size_t j) const;
    [[nodiscard]] const CMatrix& Ctilde(std::size_t i, std::size_t j) const;
    /// Block P_{i,j} of the pert row for layer i.
    [[nodiscard]] CMatrix P(std::size_t i, std::size_t j) const;

    /// pert as one block lower-triangular matrix on flattened states.
    [[nodiscard]] CMatrix assembled() const;
};

/// Builds D, C~ and pert row by row (increasing i). Requires a chained
/// system whose condition report passed.
[[nodiscard]] PerturbationData compute_perturbation(const CascadeSystem& sys, const ConditionReport& report);

/// Convenience overload that validates first.
[[nodiscard]] PerturbationData compute_perturbation(const CascadeSystem& sys);

/// Layer i of the result is pert_i(x_1..x_i).
[[nodiscard]] StateVector apply_pert(const PerturbationData& pd, const StateVector& x);

/// pert_i(x_1..x_i) only.
[[nodiscard]] CVector apply_pert_layer(const PerturbationData& pd, const StateVector& x, std::size_t i);

/// Inverse of pert by block forward substitution (unit diagonal blocks).
[[nodiscard]] StateVector apply_pert_inverse(const PerturbationData& pd, const StateVector& y);

/// Closed-form evaluation of the coupled orbit from the decoupled layer
/// powers. Holds references: the system and data must outlive it.
class ClosedFormSolution {
public:
    ClosedFormSolution(const CascadeSystem& sys, const PerturbationData& pd);

    [[nodiscard]] StateVector at(const StateVector& x, int t) const;

    [[nodiscard]] const CascadeSystem& system() const noexcept { return *sys_; }
    [[nodiscard]] const PerturbationData& data() const noexcept { return *pd_; }

private:
    const CascadeSystem* sys_;
    const PerturbationData* pd_;
};

[[nodiscard]] StateVector closed_form_at(const ClosedFormSolution& cf, const StateVector& x, int t);

/// L^t v evaluated through the eigendecomposition.
[[nodiscard]] CVector apply_layer_power(const EigDecomposition& e, const CVector& v, int t);

}  // namespace kcascade
