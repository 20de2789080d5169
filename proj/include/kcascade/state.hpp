#pragma once

#include <cstddef>
#include <vector>

#include "kcascade/numerics.hpp"

namespace kcascade {

/// Element of C^{d_1} x ... x C^{d_n}. Layer indices are 1-based in the
/// public accessors to match the layer numbering used in reports and files.
class StateVector {
public:
    StateVector() = default;
    explicit StateVector(std::vector<CVector> layers) : layers_(std::move(layers)) {}

    /// All-zero state with the given layer dimensions.
    static StateVector zeros(const std::vector<std::size_t>& dims);

    [[nodiscard]] std::size_t layer_count() const noexcept { return layers_.size(); }
    [[nodiscard]] std::vector<std::size_t> dims() const;

    /// Canonical projection onto layer i (1-based).
    [[nodiscard]] const CVector& layer(std::size_t i) const;
    [[nodiscard]] CVector& layer(std::size_t i);

    [[nodiscard]] const std::vector<CVector>& layers() const noexcept { return layers_; }

    /// Layers i..j inclusive (1-based).
    [[nodiscard]] std::vector<CVector> slice_range(std::size_t i, std::size_t j) const;

    /// Layers concatenated into one vector of length sum(d_i).
    [[nodiscard]] CVector flatten() const;
    static StateVector unflatten(const CVector& flat, const std::vector<std::size_t>& dims);

    StateVector& operator+=(const StateVector& other);
    StateVector& operator-=(const StateVector& other);
    StateVector& operator*=(Complex scale);

    friend StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
    friend StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
    friend StateVector operator*(Complex s, StateVector a) { return a *= s; }

    [[nodiscard]] bool all_finite() const noexcept;

private:
    void require_same_shape(const StateVector& other) const;

    std::vector<CVector> layers_;
};

/// Canonical projection (1-based layer index).
[[nodiscard]] CVector slice(const StateVector& x, std::size_t i);
[[nodiscard]] std::vector<CVector> slice_range(const StateVector& x, std::size_t i, std::size_t j);

/// Sum over layers of the per-layer Euclidean norm.
[[nodiscard]] double composite_norm(const StateVector& x);

/// Each layer an independent unit-norm random complex vector.
[[nodiscard]] StateVector random_unit_state(const std::vector<std::size_t>& dims, Rng& rng);

}  // namespace kcascade
