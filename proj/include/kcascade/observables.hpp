#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kcascade/cascade.hpp"
#include "kcascade/orbit.hpp"
#include "kcascade/perturbation.hpp"
#include "kcascade/state.hpp"

namespace kcascade {

/// psi_{i,s}(x_i) = (e_s^* V_i^-1) x_i for s >= 1, and the constant 1 for s = 0.
struct PrincipalEigenfunction {
    std::size_t layer = 1;
    std::size_t index = 0;
    CRowVector coeff_row;
    Complex eigenvalue{1.0, 0.0};

    [[nodiscard]] bool is_constant() const noexcept { return index == 0; }
    [[nodiscard]] Complex evaluate_layer(const CVector& xi) const;
    [[nodiscard]] Complex operator()(const StateVector& x) const { return evaluate_layer(x.layer(layer)); }
    /// Operator norm of the functional (2-norm of the coefficient row).
    [[nodiscard]] double norm() const { return is_constant() ? 1.0 : coeff_row.norm(); }
};

[[nodiscard]] PrincipalEigenfunction principal_eigenfunction(const CascadeSystem& sys, std::size_t i, std::size_t s);

/// psi_{(s_1,...,s_n)} = product over layers of psi_{k,s_k}(x_k).
struct ProductEigenfunction {
    std::vector<std::size_t> multi_index;
    std::vector<PrincipalEigenfunction> factors;
    Complex eigenvalue{1.0, 0.0};

    [[nodiscard]] Complex operator()(const StateVector& x) const;
};

/// Constant observable 1 on an n-layer cascade.
[[nodiscard]] ProductEigenfunction constant_observable(std::size_t layer_count);

/// psi_{(0,..,0,s_i,0,..,0)}: the principal eigenfunction of one layer read
/// off the full cascade state.
[[nodiscard]] ProductEigenfunction extend_to_cascade(const PrincipalEigenfunction& pe, std::size_t layer_count);

/// Pointwise product of two product eigenfunctions whose nonconstant factors
/// live on different layers. Throws SameLayerProduct otherwise.
[[nodiscard]] ProductEigenfunction bullet_product(const ProductEigenfunction& a, const ProductEigenfunction& b);

/// Named state-space map used as a pre-composition.
struct StateMap {
    std::string name;
    std::function<StateVector(const StateVector&)> apply;
};

[[nodiscard]] StateMap pert_map(const PerturbationData& pd);

/// base(pre_maps.back()(...pre_maps.front()(x))). Maps are applied front to back.
struct ComposedObservable {
    ProductEigenfunction base;
    std::vector<StateMap> pre_maps;

    [[nodiscard]] Complex operator()(const StateVector& x) const;
    [[nodiscard]] bool composed_with_pert() const noexcept;
};

/// (U_F^t f)(x) = f(F^t(x)).
template <class StepMap, class Observable>
[[nodiscard]] Complex koopman_apply(const StepMap& step, const Observable& f, std::size_t t, StateVector x) {
    for (std::size_t k = 0; k < t; ++k) x = step(x);
    return f(x);
}

/// Step maps for koopman_apply bound to a system (which must outlive them).
[[nodiscard]] std::function<StateVector(const StateVector&)> lin_map(const CascadeSystem& sys);
[[nodiscard]] std::function<StateVector(const StateVector&)> nom_map(const CascadeSystem& sys);

/// (psi_{i,s} o pert)(x), the Koopman eigenfunction of the coupled cascade.
[[nodiscard]] Complex pert_eigenfunction_value(const CascadeSystem& sys, const PerturbationData& pd, std::size_t i,
                                               std::size_t s, const StateVector& x);

/// max over samples x and t = 1..max_t of
///   |phi(Lin^t x) - lambda^t phi(x)| / max(1, |phi(x)|),  phi = psi_{i,s} o pert.
[[nodiscard]] double eigenfunction_residual(const CascadeSystem& sys, const PerturbationData& pd, std::size_t i,
                                            std::size_t s, const std::vector<StateVector>& samples,
                                            std::size_t max_t = 50);

struct Theorem2Report {
    bool pass = false;
    bool bound_pass = false;
    bool decay_pass = false;
    std::size_t violations = 0;
    /// min over t of bound - difference.
    double margin = 0.0;
    /// ratio(T) / max_t ratio(t), ratio = difference / |L_i|^t.
    double decay_ratio = 0.0;
    std::vector<double> difference;
    std::vector<double> ratio;
};

/// |U_Lin^t psi(x) - lambda^t psi(pert x)| against |psi| * bound_a_i(t), and its
/// decay relative to |L_i|^t.
[[nodiscard]] Theorem2Report check_theorem2(const CascadeSystem& sys, const PerturbationData& pd, std::size_t i,
                                            std::size_t s, const StateVector& x, std::size_t steps,
                                            const CheckSettings& settings = {});

inline constexpr double kPeripheralTol = 1e-9;

/// True when |lambda_{i,s}| equals |L_i| within kPeripheralTol.
[[nodiscard]] bool is_peripheral(const CascadeSystem& sys, std::size_t i, std::size_t s);

/// (1/N) sum_{t<N} lambda^-t (U_Lin^t psi_{i,s})(x). Converges to
/// (psi_{i,s} o pert)(x) for a peripheral eigenvalue; throws NotPeripheral otherwise.
[[nodiscard]] Complex laplace_average(const CascadeSystem& sys, const PerturbationData& pd, std::size_t i,
                                      std::size_t s, const StateVector& x, std::size_t terms);

/// Same average with U_Lin replaced by U_Lin (I - P), where P projects onto the
/// pert-composed eigenfunctions of strictly larger modulus. Works for any s.
[[nodiscard]] Complex deflated_laplace_average(const CascadeSystem& sys, const PerturbationData& pd, std::size_t i,
                                               std::size_t s, const StateVector& x, std::size_t terms);

}  // namespace kcascade
