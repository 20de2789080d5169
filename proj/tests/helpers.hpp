#pragma once

#include <cstdint>
#include <vector>

#include "kcascade/cascade.hpp"
#include "kcascade/experiment.hpp"
#include "kcascade/numerics.hpp"
#include "kcascade/perturbation.hpp"
#include "kcascade/state.hpp"

namespace testing {

using namespace kcascade;

inline CMatrix scalar(double v) {
    CMatrix m(1, 1);
    m(0, 0) = v;
    return m;
}

inline CMatrix real_matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    CMatrix m(rows, cols);
    auto it = values.begin();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = *it++;
    }
    return m;
}

inline CVector cvec(std::initializer_list<Complex> values) {
    CVector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index k = 0;
    for (Complex z : values) v(k++) = z;
    return v;
}

// L1 = 0.5, L2 = 0.9, C21 = 1.
inline CascadeSystem scalar_two_layer() {
    return CascadeSystem::chained({scalar(0.5), scalar(0.9)}, {scalar(1.0)});
}

inline StateVector scalar_state(std::initializer_list<double> values) {
    std::vector<CVector> layers;
    for (double v : values) layers.push_back(cvec({Complex(v, 0.0)}));
    return StateVector(std::move(layers));
}

// Three layers where the middle one has a mode faster than its norm would
// suggest once the fast layer-1 and layer-3 modes are in play.
inline CascadeSystem deflation_example() {
    return CascadeSystem::chained({scalar(0.6), real_matrix(2, 2, {0.9, 0.0, 0.0, 0.3}), scalar(0.95)},
                                  {real_matrix(2, 1, {1.0, 1.0}), real_matrix(1, 2, {1.0, 1.0})});
}

inline CascadeSystem decoupled(const std::vector<CMatrix>& layers) {
    std::vector<CMatrix> zeros;
    for (std::size_t k = 1; k < layers.size(); ++k) {
        zeros.push_back(CMatrix::Zero(layers[k].rows(), layers[k - 1].rows()));
    }
    return CascadeSystem::chained(layers, zeros);
}

// Seeded chained cascade with n <= 7 layers and d_i <= 6.
inline CascadeSystem seeded_system(std::uint64_t seed) {
    Rng rng = make_rng(seed, 99);
    std::uniform_int_distribution<std::size_t> layers(2, 7);
    ExperimentConfig cfg;
    cfg.layers = layers(rng);
    cfg.dim_min = 1;
    cfg.dim_max = 6;
    return generate_cascade(cfg, seed);
}

// Seven layers with ||L_i|| = 0.9^(8-i).
inline CascadeSystem replica(std::uint64_t seed = 2024) {
    return generate_cascade(ExperimentConfig{}, seed);
}

inline StateVector unit_state(const CascadeSystem& sys, std::uint64_t seed) {
    Rng rng = make_rng(seed, stream::kInitialState);
    return random_unit_state(sys.dims(), rng);
}

inline double max_layer_rel_error(const StateVector& a, const StateVector& b) {
    double worst = 0.0;
    for (std::size_t i = 1; i <= a.layer_count(); ++i) {
        const double denom = std::max(b.layer(i).norm(), 1e-300);
        worst = std::max(worst, (a.layer(i) - b.layer(i)).norm() / denom);
    }
    return worst;
}

}  // namespace testing
