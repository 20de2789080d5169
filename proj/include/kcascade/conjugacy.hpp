#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "kcascade/cascade.hpp"
#include "kcascade/observables.hpp"
#include "kcascade/orbit.hpp"
#include "kcascade/perturbation.hpp"
#include "kcascade/state.hpp"

namespace kcascade {

/// Homeomorphism tau of the cascade state space with tau(0) = 0, used to
/// realize a nonlinear cascade as NonLin = tau o Lin o tau^-1.
class Conjugacy {
public:
    enum class Kind { Identity, PolynomialDiagonal, UserSupplied };
    enum class InverseMode { ClosedForm, Newton };
    using Map = std::function<StateVector(const StateVector&)>;

    static Conjugacy identity();
    /// Per layer, every real and imaginary coordinate u maps to u + a_i u^3.
    static Conjugacy polynomial_diagonal(std::vector<double> coefficients);
    /// Caller-provided pair; not serializable.
    static Conjugacy user_supplied(Map forward, Map inverse);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] InverseMode inverse_mode() const noexcept { return mode_; }
    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return coefficients_; }

    [[nodiscard]] StateVector forward(const StateVector& x) const;
    [[nodiscard]] StateVector inverse(const StateVector& y) const;

private:
    Conjugacy() = default;

    Kind kind_ = Kind::Identity;
    InverseMode mode_ = InverseMode::ClosedForm;
    std::vector<double> coefficients_;
    Map forward_;
    Map inverse_;
};

/// Diagonal cubic conjugacy for the given system; one coefficient per layer,
/// each finite and non-negative.
[[nodiscard]] Conjugacy make_polynomial_conjugacy(const CascadeSystem& sys, std::vector<double> coefficients);

/// Solves u + a u^3 = y for real u by safeguarded Newton (a >= 0).
[[nodiscard]] double cubic_inverse(double y, double a);

/// max over samples of |tau(tau^-1(y)) - y| / (1 + |y|) in the composite norm.
[[nodiscard]] double conjugacy_round_trip_error(const Conjugacy& conj, const std::vector<StateVector>& samples);

/// Closed composite-norm ball radius in which the nonlinear checks are run.
inline constexpr double kWorkingBallRadius = 2.0;

class NonlinearCascade {
public:
    NonlinearCascade(CascadeSystem base, Conjugacy conj);

    [[nodiscard]] const CascadeSystem& base() const noexcept { return base_; }
    [[nodiscard]] const Conjugacy& conjugacy() const noexcept { return conj_; }

    /// tau(Lin(tau^-1(y))).
    [[nodiscard]] StateVector step(const StateVector& y) const;
    /// tau(Nom(tau^-1(y))).
    [[nodiscard]] StateVector nominal_step(const StateVector& y) const;
    /// tau(pert(tau^-1(y))).
    [[nodiscard]] StateVector pert(const PerturbationData& pd, const StateVector& y) const;

private:
    CascadeSystem base_;
    Conjugacy conj_;
};

[[nodiscard]] OrbitTrace iterate_nonlin(const NonlinearCascade& nl, const StateVector& y0, std::size_t steps);
[[nodiscard]] OrbitTrace iterate_nominal_nonlinear(const NonlinearCascade& nl, const StateVector& y0, std::size_t steps);

struct Theorem3Report {
    bool pass = false;
    double terminal_ratio = 0.0;
    bool in_working_ball = true;
    std::vector<double> error;
};

/// e(t) = |NonLin^t(y0) - (tau Nom tau^-1)^t(tau pert tau^-1 (y0))| and the
/// check e(T) / max_t e(t) <= decay_factor.
[[nodiscard]] Theorem3Report check_theorem3(const NonlinearCascade& nl, const PerturbationData& pd,
                                            const StateVector& y0, std::size_t steps,
                                            const CheckSettings& settings = {});

struct Theorem4Report {
    bool pass = false;
    bool decay_pass = false;
    bool paths_agree = false;
    double decay_ratio = 0.0;
    /// Largest |nonlinear - linear| / max(1, |linear|) over the compared prefix.
    double max_path_gap = 0.0;
    std::vector<double> nonlinear_ratio;
    std::vector<double> linear_ratio;
};

/// Steps over which the nonlinear and linear evaluations are compared.
inline constexpr std::size_t kPathCompareSteps = 50;
inline constexpr double kPathTolerance = 1e-8;

/// Ratio |U_NonLin^t (psi o tau^-1)(y0) - lambda^t (psi o tau^-1)(tau pert tau^-1 y0)| / |L_i|^t,
/// computed along the nonlinear orbit and again along the linear orbit from
/// tau^-1(y0); both must agree and decay.
[[nodiscard]] Theorem4Report check_theorem4(const NonlinearCascade& nl, const PerturbationData& pd, std::size_t i,
                                            std::size_t s, const StateVector& y0, std::size_t steps,
                                            const CheckSettings& settings = {});

}  // namespace kcascade
