#include "kcascade/state.hpp"

#include <string>

#include "kcascade/error.hpp"

namespace kcascade {

StateVector StateVector::zeros(const std::vector<std::size_t>& dims) {
    std::vector<CVector> layers;
    layers.reserve(dims.size());
    for (std::size_t d : dims) layers.push_back(CVector::Zero(static_cast<Eigen::Index>(d)));
    return StateVector(std::move(layers));
}

std::vector<std::size_t> StateVector::dims() const {
    std::vector<std::size_t> out;
    out.reserve(layers_.size());
    for (const auto& l : layers_) out.push_back(static_cast<std::size_t>(l.size()));
    return out;
}

const CVector& StateVector::layer(std::size_t i) const {
    if (i < 1 || i > layers_.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "layer " + std::to_string(i) + " of " + std::to_string(layers_.size()));
    }
    return layers_[i - 1];
}

CVector& StateVector::layer(std::size_t i) {
    return const_cast<CVector&>(static_cast<const StateVector&>(*this).layer(i));
}

std::vector<CVector> StateVector::slice_range(std::size_t i, std::size_t j) const {
    if (i < 1 || i > j || j > layers_.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "slice [" + std::to_string(i) + ", " + std::to_string(j) + "] of " +
                                                    std::to_string(layers_.size()) + " layers");
    }
    return {layers_.begin() + static_cast<std::ptrdiff_t>(i - 1), layers_.begin() + static_cast<std::ptrdiff_t>(j)};
}

CVector StateVector::flatten() const {
    Eigen::Index total = 0;
    for (const auto& l : layers_) total += l.size();
    CVector out(total);
    Eigen::Index offset = 0;
    for (const auto& l : layers_) {
        out.segment(offset, l.size()) = l;
        offset += l.size();
    }
    return out;
}

StateVector StateVector::unflatten(const CVector& flat, const std::vector<std::size_t>& dims) {
    std::vector<CVector> layers;
    Eigen::Index offset = 0;
    for (std::size_t d : dims) {
        const auto len = static_cast<Eigen::Index>(d);
        if (offset + len > flat.size()) throw Error(ErrorCode::DimensionMismatch, "flat vector too short");
        layers.emplace_back(flat.segment(offset, len));
        offset += len;
    }
    if (offset != flat.size()) throw Error(ErrorCode::DimensionMismatch, "flat vector too long");
    return StateVector(std::move(layers));
}

void StateVector::require_same_shape(const StateVector& other) const {
    if (dims() != other.dims()) throw Error(ErrorCode::DimensionMismatch, "state shapes differ");
}

StateVector& StateVector::operator+=(const StateVector& other) {
    require_same_shape(other);
    for (std::size_t k = 0; k < layers_.size(); ++k) layers_[k] += other.layers_[k];
    return *this;
}

StateVector& StateVector::operator-=(const StateVector& other) {
    require_same_shape(other);
    for (std::size_t k = 0; k < layers_.size(); ++k) layers_[k] -= other.layers_[k];
    return *this;
}

StateVector& StateVector::operator*=(Complex scale) {
    for (auto& l : layers_) l *= scale;
    return *this;
}

bool StateVector::all_finite() const noexcept {
    for (const auto& l : layers_) {
        if (!l.allFinite()) return false;
    }
    return true;
}

CVector slice(const StateVector& x, std::size_t i) {
    return x.layer(i);
}

std::vector<CVector> slice_range(const StateVector& x, std::size_t i, std::size_t j) {
    return x.slice_range(i, j);
}

double composite_norm(const StateVector& x) {
    double total = 0.0;
    for (const auto& l : x.layers()) total += l.norm();
    return total;
}

StateVector random_unit_state(const std::vector<std::size_t>& dims, Rng& rng) {
    std::vector<CVector> layers;
    layers.reserve(dims.size());
    for (std::size_t d : dims) layers.push_back(random_unit_vector(d, rng));
    return StateVector(std::move(layers));
}

}  // namespace kcascade
