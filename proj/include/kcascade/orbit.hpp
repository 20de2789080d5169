#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kcascade/cascade.hpp"
#include "kcascade/perturbation.hpp"
#include "kcascade/state.hpp"

namespace kcascade {

enum class SystemKind { Lin, Nom, NonLin, NominalNonlinear };

[[nodiscard]] std::string_view to_string(SystemKind kind) noexcept;

/// states[t] for t = 0..T; states[0] is the initial condition.
struct OrbitTrace {
    std::vector<StateVector> states;
    SystemKind kind = SystemKind::Lin;

    [[nodiscard]] std::size_t horizon() const noexcept { return states.empty() ? 0 : states.size() - 1; }
};

/// Orbits whose composite norm exceeds this are reported as Overflow.
inline constexpr double kOverflowNorm = 1e12;

/// One step of the coupled cascade (chained or general).
[[nodiscard]] StateVector lin_step(const CascadeSystem& sys, const StateVector& x);
/// One step with couplings ignored.
[[nodiscard]] StateVector nom_step(const CascadeSystem& sys, const StateVector& x);

[[nodiscard]] OrbitTrace iterate_lin(const CascadeSystem& sys, const StateVector& x0, std::size_t steps);
[[nodiscard]] OrbitTrace iterate_nom(const CascadeSystem& sys, const StateVector& x0, std::size_t steps);

/// Per-layer series indexed [layer-1][t]:
///   abs_err  = |Pi_i Lin^t(x) - Pi_i Nom^t(pert x)|
///   rel_err  = abs_err / |L_i|^t
///   bound_a  = sum_{j<i} |D_{i,j}| |L_j^t pert_j(x)|
///   bound_b  = sum_{j<i} |D_{i,j}| |pert_j(x)|   (multiplies |L_i|^t)
struct ErrorSeries {
    std::vector<double> layer_norms;
    std::vector<std::vector<double>> abs_err;
    std::vector<std::vector<double>> rel_err;
    std::vector<std::vector<double>> bound_a;
    std::vector<double> bound_b;

    [[nodiscard]] std::size_t layers() const noexcept { return abs_err.size(); }
    [[nodiscard]] std::size_t horizon() const noexcept { return abs_err.empty() ? 0 : abs_err.front().size() - 1; }
    /// bound_b_i |L_i|^t.
    [[nodiscard]] double bound_b_scaled(std::size_t layer, std::size_t t) const;
};

[[nodiscard]] ErrorSeries compute_error_series(const CascadeSystem& sys, const PerturbationData& pd,
                                               const StateVector& x0, std::size_t steps);

/// Slack and decay thresholds used by the empirical checks.
struct CheckSettings {
    double slack = 1e-9;
    double decay_factor = 1e-3;
    double equivalence_factor = 1e-6;
};

struct Theorem1Report {
    bool pass = false;
    bool bound_a_pass = false;
    bool bound_b_pass = false;
    bool decay_pass = false;
    std::size_t bound_a_violations = 0;
    std::size_t bound_b_violations = 0;
    /// min over (i >= 2, t) of bound - measured; 0 when no coupled layer exists.
    double bound_a_margin = 0.0;
    double bound_b_margin = 0.0;
    /// rel_err_i(T) / max_{t <= T/2} rel_err_i(t), indexed by layer-1 (layer 1 is 0).
    std::vector<double> decay_ratio;
};

/// Checks both error bounds at every step and the decay of the relative error
/// over the second half of the horizon.
[[nodiscard]] Theorem1Report check_theorem1(const ErrorSeries& es, const CheckSettings& settings = {});

struct Corollary1Report {
    bool pass = false;
    double initial_error = 0.0;
    double terminal_error = 0.0;
    double ratio = 0.0;
    std::vector<double> error;
};

/// Composite-norm distance between the coupled orbit and the nominal orbit
/// started at pert(x), tested for e(T) <= equivalence_factor * e(0).
[[nodiscard]] Corollary1Report check_corollary1(const CascadeSystem& sys, const PerturbationData& pd,
                                                const StateVector& x0, std::size_t steps,
                                                const CheckSettings& settings = {});

/// series[T] / max_t series[t]; 0 for an all-zero series.
[[nodiscard]] double terminal_ratio(const std::vector<double>& series);

/// Least-squares slope of log(max(series[t], 1e-300)) over t in [t0, t1].
[[nodiscard]] double log_linear_slope(const std::vector<double>& series, std::size_t t0, std::size_t t1);

/// Floor applied before taking logarithms.
inline constexpr double kLogFloor = 1e-300;

}  // namespace kcascade
