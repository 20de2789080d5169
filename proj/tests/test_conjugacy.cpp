#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "kcascade/conjugacy.hpp"
#include "kcascade/error.hpp"
#include "kcascade/observables.hpp"

using namespace testing;

TEST_CASE("cubic map and its inverse") {
    const Conjugacy tau = Conjugacy::polynomial_diagonal({0.1});
    const StateVector y = tau.forward(scalar_state({2.0}));
    CHECK(y.layer(1)(0).real() == doctest::Approx(2.8).epsilon(1e-15));
    CHECK(cubic_inverse(2.8, 0.1) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(cubic_inverse(-2.8, 0.1) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(cubic_inverse(0.0, 0.1) == 0.0);
    CHECK(cubic_inverse(1.5, 0.0) == 1.5);
    CHECK(std::abs(cubic_inverse(1e17, 0.1) + 0.1 * std::pow(cubic_inverse(1e17, 0.1), 3) - 1e17) < 1e2);

    const StateVector z(std::vector<CVector>{cvec({Complex(1.0, -2.0)})});
    const Complex w = tau.forward(z).layer(1)(0);
    CHECK(w.real() == doctest::Approx(1.1));
    CHECK(w.imag() == doctest::Approx(-2.8));

    try {
        (void)cubic_inverse(std::numeric_limits<double>::quiet_NaN(), 0.1);
        FAIL("expected NewtonDivergence");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NewtonDivergence);
    }
    CHECK_THROWS_AS((void)Conjugacy::polynomial_diagonal({-0.1}), Error);
}

TEST_CASE("round trip over a thousand states") {
    const CascadeSystem sys = replica(3);
    const Conjugacy tau = make_polynomial_conjugacy(sys, std::vector<double>(sys.size(), 0.1));
    Rng rng(77);
    std::vector<StateVector> samples;
    std::uniform_real_distribution<double> radius(0.0, kWorkingBallRadius);
    for (int k = 0; k < 1000; ++k) {
        StateVector x = random_unit_state(sys.dims(), rng);
        x *= Complex(radius(rng) / composite_norm(x));
        samples.push_back(std::move(x));
    }
    CHECK(conjugacy_round_trip_error(tau, samples) < 1e-10);
    CHECK_THROWS_AS((void)make_polynomial_conjugacy(sys, {0.1}), Error);
    CHECK(Conjugacy::identity().kind() == Conjugacy::Kind::Identity);
    CHECK(tau.kind() == Conjugacy::Kind::PolynomialDiagonal);
}

TEST_CASE("NonLin is conjugate to Lin") {
    const CascadeSystem sys = seeded_system(21);
    const NonlinearCascade nl(sys, make_polynomial_conjugacy(sys, std::vector<double>(sys.size(), 0.1)));
    const Conjugacy& tau = nl.conjugacy();
    const StateVector x = unit_state(sys, 4);
    const StateVector lhs = nl.step(tau.forward(x));
    const StateVector rhs = tau.forward(lin_step(sys, x));
    CHECK(composite_norm(lhs - rhs) < 1e-10 * (1.0 + composite_norm(rhs)));

    const OrbitTrace a = iterate_nonlin(nl, tau.forward(x), 25);
    const OrbitTrace b = iterate_lin(sys, x, 25);
    CHECK(composite_norm(tau.inverse(a.states[25]) - b.states[25]) < 1e-9);
    CHECK(a.kind == SystemKind::NonLin);
}

TEST_CASE("eigenfunctions transfer through the conjugacy") {
    const CascadeSystem sys = seeded_system(21);
    const PerturbationData pd = compute_perturbation(sys);
    const NonlinearCascade nl(sys, make_polynomial_conjugacy(sys, std::vector<double>(sys.size(), 0.1)));
    const Conjugacy& tau = nl.conjugacy();
    const StateVector y = tau.forward(unit_state(sys, 9));
    for (std::size_t i = 1; i <= sys.size(); ++i) {
        const PrincipalEigenfunction psi = principal_eigenfunction(sys, i, 1);
        const Complex here = psi(apply_pert(pd, tau.inverse(y)));
        const Complex next = psi(apply_pert(pd, tau.inverse(nl.step(y))));
        CHECK(std::abs(next - psi.eigenvalue * here) < 1e-8 * (1.0 + std::abs(here)));
    }
}

TEST_CASE("user supplied conjugacy") {
    const Conjugacy twice = Conjugacy::user_supplied([](const StateVector& x) { return Complex(2.0) * x; },
                                                     [](const StateVector& y) { return Complex(0.5) * y; });
    CHECK(twice.kind() == Conjugacy::Kind::UserSupplied);
    CHECK(twice.forward(scalar_state({1.5})).layer(1)(0) == Complex(3.0));
    CHECK(twice.inverse(scalar_state({3.0})).layer(1)(0) == Complex(1.5));
    CHECK_THROWS_AS((void)Conjugacy::user_supplied(nullptr, nullptr), Error);
}

TEST_CASE("theorems 3 and 4 on the replica") {
    const CascadeSystem sys = replica();
    const PerturbationData pd = compute_perturbation(sys);
    const NonlinearCascade nl(sys, make_polynomial_conjugacy(sys, std::vector<double>(sys.size(), 0.1)));
    const StateVector y0 = unit_state(sys, 2024);
    const Theorem3Report t3 = check_theorem3(nl, pd, y0, 200);
    CHECK(t3.pass);
    CHECK(t3.terminal_ratio < 1e-3);
    CHECK_FALSE(t3.in_working_ball);
    for (std::size_t i = 1; i <= sys.size(); ++i) {
        for (std::size_t s = 1; s <= sys.dim(i); ++s) {
            const Theorem4Report r = check_theorem4(nl, pd, i, s, y0, 200);
            CHECK_MESSAGE(r.pass, "layer " << i << " index " << s);
            CHECK(r.max_path_gap < 1e-8);
        }
    }
}

TEST_CASE("identity conjugacy reproduces the linear checks") {
    const CascadeSystem sys = replica(11);
    const PerturbationData pd = compute_perturbation(sys);
    const NonlinearCascade nl(sys, Conjugacy::identity());
    const StateVector x = unit_state(sys, 11);
    for (std::size_t i = 1; i <= sys.size(); ++i) {
        const Theorem4Report r4 = check_theorem4(nl, pd, i, 1, x, 200);
        const Theorem2Report r2 = check_theorem2(sys, pd, i, 1, x, 200);
        CHECK(r4.max_path_gap == 0.0);
        CHECK(r4.decay_ratio == r2.decay_ratio);
        CHECK(r4.nonlinear_ratio == r2.ratio);
    }
    const Theorem3Report r3 = check_theorem3(nl, pd, x, 200);
    const Corollary1Report c1 = check_corollary1(sys, pd, x, 200);
    CHECK(r3.error == c1.error);
}

TEST_CASE("conjugacy edge cases") {
    const CascadeSystem sys = replica(3);
    const Conjugacy zero = make_polynomial_conjugacy(sys, std::vector<double>(sys.size(), 0.0));
    const StateVector x = unit_state(sys, 1);
    CHECK(composite_norm(zero.forward(x) - x) == 0.0);
    CHECK(composite_norm(zero.inverse(x) - x) == 0.0);

    const NonlinearCascade ident(sys, Conjugacy::identity());
    const OrbitTrace a = iterate_nonlin(ident, x, 20);
    const OrbitTrace b = iterate_lin(sys, x, 20);
    for (std::size_t t = 0; t <= 20; ++t) CHECK(composite_norm(a.states[t] - b.states[t]) == 0.0);

    const NonlinearCascade cubic(sys, make_polynomial_conjugacy(sys, std::vector<double>(sys.size(), 0.1)));
    const OrbitTrace origin = iterate_nonlin(cubic, StateVector::zeros(sys.dims()), 20);
    CHECK(composite_norm(origin.states[20]) == 0.0);
}

TEST_CASE("cubic on some layers only") {
    const CascadeSystem sys = replica();
    const PerturbationData pd = compute_perturbation(sys);
    std::vector<double> a(sys.size(), 0.1);
    a[2] = 0.0;
    a[5] = 0.0;
    const NonlinearCascade nl(sys, make_polynomial_conjugacy(sys, a));
    const StateVector y0 = unit_state(sys, 2024);
    CHECK(check_theorem3(nl, pd, y0, 200).pass);
    CHECK(check_theorem4(nl, pd, 4, 1, y0, 200).pass);
}
