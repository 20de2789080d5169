#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kcascade/numerics.hpp"
#include "kcascade/state.hpp"

namespace kcascade {

/// Key (i, j) of the coupling C_{i,j} from layer j into layer i, 1-based, j < i.
using LayerPair = std::pair<std::size_t, std::size_t>;

/// Lower block-triangular linear cascade
///   x_i(t+1) = L_i x_i(t) + sum_{j<i} C_{i,j} x_j(t).
/// Immutable once built; eigendecompositions and norms are computed eagerly.
class CascadeSystem {
public:
    /// General cascade. Every coupling key must satisfy 1 <= j < i <= n and
    /// have shape d_i x d_j.
    CascadeSystem(std::vector<CMatrix> layers, std::map<LayerPair, CMatrix> couplings);

    /// Chained cascade: couplings[k] is C_{k+2,k+1}, so there are n-1 of them.
    static CascadeSystem chained(std::vector<CMatrix> layers, std::vector<CMatrix> couplings);

    [[nodiscard]] std::size_t size() const noexcept { return layers_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t dim(std::size_t i) const { return dims_.at(i - 1); }
    [[nodiscard]] std::size_t total_dim() const noexcept;

    [[nodiscard]] const CMatrix& layer(std::size_t i) const { return layers_.at(i - 1); }
    [[nodiscard]] const EigDecomposition& eig(std::size_t i) const { return eigs_.at(i - 1); }
    [[nodiscard]] double norm(std::size_t i) const { return norms_.at(i - 1); }

    [[nodiscard]] const std::map<LayerPair, CMatrix>& couplings() const noexcept { return couplings_; }
    /// Null when C_{i,j} is absent.
    [[nodiscard]] const CMatrix* coupling(std::size_t i, std::size_t j) const;

    /// True iff every present coupling links consecutive layers.
    [[nodiscard]] bool is_chained() const noexcept { return chained_; }

    /// Same layers with all couplings removed.
    [[nodiscard]] CascadeSystem nominal() const;

    /// Full block matrix acting on flattened states.
    [[nodiscard]] CMatrix assembled() const;

private:
    std::vector<CMatrix> layers_;
    std::map<LayerPair, CMatrix> couplings_;
    std::vector<std::size_t> dims_;
    std::vector<EigDecomposition> eigs_;
    std::vector<double> norms_;
    bool chained_ = true;
};

struct LayerDiagnostics {
    double condition_number = 1.0;
    double min_abs_eigenvalue = 0.0;
    bool pass = false;
};

/// Outcome of checking invertibility/diagonalizability, disjoint spectra and
/// the norm hierarchy. Failures are reported, never thrown.
struct ConditionReport {
    std::vector<LayerDiagnostics> layers;
    bool invertible_diagonalizable = false;

    /// min over i != j, l, m of |lambda_{i,l} - lambda_{j,m}|; +inf for one layer.
    double disjoint_spectra = 0.0;
    bool disjoint_pass = false;

    std::vector<double> norms;
    bool norm_hierarchy = false;
    /// Set when ||L_n|| == 1: allowed, but flagged.
    bool marginal_top_norm = false;

    /// min over i > j, l, m of |1 - lambda_{j,m} / lambda_{i,l}|; +inf for one layer.
    double resonance_margin = 0.0;
    bool resonance_pass = false;

    bool overall = false;
    std::vector<std::string> notes;
};

[[nodiscard]] ConditionReport validate_conditions(const CascadeSystem& sys);

/// Chained cascade with ||L_i|| = norm_schedule[i] and unscaled uniform
/// couplings, redrawn until the conditions hold.
[[nodiscard]] CascadeSystem random_chained_cascade(const std::vector<std::size_t>& layer_dims,
                                                   const std::vector<double>& norm_schedule, Rng& rng);

/// normBase^{n+1-i} for i = 1..n.
[[nodiscard]] std::vector<double> geometric_norm_schedule(std::size_t layers, double norm_base);

}  // namespace kcascade
