#include "kcascade/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kcascade/error.hpp"

namespace kcascade {

namespace {

constexpr double kUnitNormSlack = 1e-12;

}  // namespace

CascadeSystem::CascadeSystem(std::vector<CMatrix> layers, std::map<LayerPair, CMatrix> couplings)
    : layers_(std::move(layers)), couplings_(std::move(couplings)) {
    if (layers_.empty()) throw Error(ErrorCode::PreconditionViolation, "a cascade needs at least one layer");
    dims_.reserve(layers_.size());
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const CMatrix& l = layers_[k];
        if (l.rows() == 0 || l.rows() != l.cols()) {
            throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(k + 1) + " is not square");
        }
        dims_.push_back(static_cast<std::size_t>(l.rows()));
    }
    for (const auto& [key, c] : couplings_) {
        const auto [i, j] = key;
        if (j < 1 || j >= i || i > layers_.size()) {
            throw Error(ErrorCode::IndexOutOfRange,
                        "coupling (" + std::to_string(i) + "," + std::to_string(j) + ") is not strictly lower");
        }
        if (static_cast<std::size_t>(c.rows()) != dims_[i - 1] || static_cast<std::size_t>(c.cols()) != dims_[j - 1]) {
            throw Error(ErrorCode::DimensionMismatch,
                        "coupling (" + std::to_string(i) + "," + std::to_string(j) + ") has wrong shape");
        }
        if (!all_finite(c)) throw Error(ErrorCode::PreconditionViolation, "coupling has non-finite entries");
        if (j + 1 != i) chained_ = false;
    }
    eigs_.reserve(layers_.size());
    norms_.reserve(layers_.size());
    for (const auto& l : layers_) {
        eigs_.push_back(decompose(l));
        norms_.push_back(operator_norm(l));
    }
}

CascadeSystem CascadeSystem::chained(std::vector<CMatrix> layers, std::vector<CMatrix> couplings) {
    if (layers.empty() || couplings.size() + 1 != layers.size()) {
        throw Error(ErrorCode::PreconditionViolation, "a chained cascade needs n layers and n-1 couplings");
    }
    std::map<LayerPair, CMatrix> map;
    for (std::size_t k = 0; k < couplings.size(); ++k) map.emplace(LayerPair{k + 2, k + 1}, std::move(couplings[k]));
    return CascadeSystem(std::move(layers), std::move(map));
}

std::size_t CascadeSystem::total_dim() const noexcept {
    std::size_t total = 0;
    for (std::size_t d : dims_) total += d;
    return total;
}

const CMatrix* CascadeSystem::coupling(std::size_t i, std::size_t j) const {
    const auto it = couplings_.find({i, j});
    return it == couplings_.end() ? nullptr : &it->second;
}

CascadeSystem CascadeSystem::nominal() const {
    return CascadeSystem(layers_, {});
}

CMatrix CascadeSystem::assembled() const {
    const auto total = static_cast<Eigen::Index>(total_dim());
    CMatrix out = CMatrix::Zero(total, total);
    std::vector<Eigen::Index> offset(layers_.size() + 1, 0);
    for (std::size_t k = 0; k < layers_.size(); ++k) offset[k + 1] = offset[k] + static_cast<Eigen::Index>(dims_[k]);
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        out.block(offset[k], offset[k], layers_[k].rows(), layers_[k].cols()) = layers_[k];
    }
    for (const auto& [key, c] : couplings_) {
        out.block(offset[key.first - 1], offset[key.second - 1], c.rows(), c.cols()) = c;
    }
    return out;
}

ConditionReport validate_conditions(const CascadeSystem& sys) {
    ConditionReport r;
    const std::size_t n = sys.size();

    r.invertible_diagonalizable = true;
    for (std::size_t i = 1; i <= n; ++i) {
        const EigDecomposition& e = sys.eig(i);
        LayerDiagnostics diag;
        diag.condition_number = e.condition_number;
        diag.min_abs_eigenvalue = e.min_abs_eigenvalue();
        const double scale = std::max(sys.layer(i).norm(), std::numeric_limits<double>::min());
        const double residual = (sys.layer(i) * e.vectors - e.vectors * e.values.asDiagonal()).norm();
        diag.pass = diag.condition_number <= tol::kConditionCap && diag.min_abs_eigenvalue >= tol::kSingular &&
                    residual <= tol::kEigResidual * scale;
        if (!diag.pass) {
            r.notes.push_back("layer " + std::to_string(i) + " is singular or numerically non-diagonalizable");
        }
        r.invertible_diagonalizable = r.invertible_diagonalizable && diag.pass;
        r.layers.push_back(diag);
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    r.disjoint_spectra = inf;
    r.resonance_margin = inf;
    for (std::size_t i = 1; i <= n; ++i) {
        const CVector& li = sys.eig(i).values;
        for (std::size_t j = 1; j < i; ++j) {
            const CVector& lj = sys.eig(j).values;
            for (Eigen::Index a = 0; a < li.size(); ++a) {
                for (Eigen::Index b = 0; b < lj.size(); ++b) {
                    r.disjoint_spectra = std::min(r.disjoint_spectra, std::abs(li(a) - lj(b)));
                    if (li(a) != Complex(0.0, 0.0)) {
                        r.resonance_margin = std::min(r.resonance_margin, std::abs(1.0 - lj(b) / li(a)));
                    } else {
                        r.resonance_margin = 0.0;
                    }
                }
            }
        }
    }
    r.disjoint_pass = r.disjoint_spectra > tol::kGap;
    r.resonance_pass = r.resonance_margin > tol::kGap;
    if (!r.disjoint_pass) r.notes.push_back("layer spectra are not disjoint");
    if (!r.resonance_pass) r.notes.push_back("resonance margin below tolerance");

    r.norm_hierarchy = true;
    for (std::size_t i = 1; i <= n; ++i) {
        r.norms.push_back(sys.norm(i));
        if (i > 1 && !(sys.norm(i - 1) < sys.norm(i))) r.norm_hierarchy = false;
    }
    if (!(r.norms.back() <= 1.0 + kUnitNormSlack)) r.norm_hierarchy = false;
    r.marginal_top_norm = std::abs(r.norms.back() - 1.0) <= kUnitNormSlack;
    if (!r.norm_hierarchy) r.notes.push_back("layer norms are not strictly increasing and bounded by 1");
    if (r.marginal_top_norm) r.notes.push_back("top layer has unit norm (marginal case)");

    r.overall = r.invertible_diagonalizable && r.disjoint_pass && r.resonance_pass && r.norm_hierarchy;
    return r;
}

std::vector<double> geometric_norm_schedule(std::size_t layers, double norm_base) {
    std::vector<double> out;
    out.reserve(layers);
    for (std::size_t i = 1; i <= layers; ++i) out.push_back(std::pow(norm_base, static_cast<double>(layers + 1 - i)));
    return out;
}

CascadeSystem random_chained_cascade(const std::vector<std::size_t>& layer_dims, const std::vector<double>& norm_schedule,
                                     Rng& rng) {
    if (layer_dims.empty() || layer_dims.size() != norm_schedule.size()) {
        throw Error(ErrorCode::PreconditionViolation, "layer dimensions and norm schedule must have equal nonzero length");
    }
    for (std::size_t k = 0; k < norm_schedule.size(); ++k) {
        if (layer_dims[k] == 0) throw Error(ErrorCode::PreconditionViolation, "layer dimensions must be positive");
        if (!(norm_schedule[k] > 0.0)) throw Error(ErrorCode::PreconditionViolation, "norms must be positive");
        if (k > 0 && !(norm_schedule[k - 1] < norm_schedule[k])) {
            throw Error(ErrorCode::PreconditionViolation, "norm schedule must be strictly increasing");
        }
    }
    if (!(norm_schedule.back() <= 1.0)) throw Error(ErrorCode::PreconditionViolation, "largest norm must not exceed 1");

    for (int attempt = 0; attempt < tol::kMaxResample; ++attempt) {
        std::vector<CMatrix> layers;
        std::vector<CMatrix> couplings;
        for (std::size_t k = 0; k < layer_dims.size(); ++k) {
            layers.push_back(random_matrix_with_norm(layer_dims[k], layer_dims[k], norm_schedule[k], rng));
            if (k > 0) couplings.push_back(random_uniform_matrix(layer_dims[k], layer_dims[k - 1], rng));
        }
        CascadeSystem sys = CascadeSystem::chained(std::move(layers), std::move(couplings));
        if (validate_conditions(sys).overall) return sys;
    }
    throw Error(ErrorCode::GenerationFailed, "no draw satisfied the cascade conditions");
}

}  // namespace kcascade
