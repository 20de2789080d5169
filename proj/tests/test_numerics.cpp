#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "kcascade/error.hpp"

using namespace testing;

namespace {

// Brute-force max |Mv| over unit vectors v = (cos a, sin a) for a real 2x2 matrix.
double grid_operator_norm(const CMatrix& m, int steps) {
    double best = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double a = std::numbers::pi * k / steps;
        CVector v(2);
        v << std::cos(a), std::sin(a);
        best = std::max(best, (m * v).norm());
    }
    return best;
}

}  // namespace

TEST_CASE("eig reconstructs the matrix") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix m = random_uniform_matrix(5, 5, rng);
        const EigDecomposition e = eig(m);
        CHECK((e.reconstruct() - m).norm() < 1e-10 * (1.0 + m.norm()));
        CHECK((e.vectors * e.inverse - CMatrix::Identity(5, 5)).norm() < 1e-10);
        for (Eigen::Index k = 0; k < 5; ++k) {
            CHECK((m * e.vectors.col(k) - e.values(k) * e.vectors.col(k)).norm() < 1e-10);
        }
    }
}

TEST_CASE("eigenvalues are sorted by magnitude, then real and imaginary part") {
    const CMatrix m = real_matrix(3, 3, {0.2, 0, 0, 0, -0.7, 0, 0, 0, 0.5});
    const EigDecomposition e = eig(m);
    CHECK(e.values(0).real() == doctest::Approx(-0.7));
    CHECK(e.values(1).real() == doctest::Approx(0.5));
    CHECK(e.values(2).real() == doctest::Approx(0.2));

    const CMatrix rot = real_matrix(2, 2, {0, -0.5, 0.5, 0});
    const EigDecomposition r = eig(rot);
    CHECK(r.values(0).imag() > 0.0);
    CHECK(eigenvalue_precedes({1.0, 0.0}, {-1.0, 0.0}));
    CHECK_FALSE(eigenvalue_precedes({-1.0, 0.0}, {1.0, 0.0}));
}

TEST_CASE("power matches repeated multiplication") {
    Rng rng(11);
    const CMatrix m = random_matrix_with_norm(4, 4, 0.8, rng);
    const EigDecomposition e = eig(m);
    CMatrix p = CMatrix::Identity(4, 4);
    for (int t = 0; t <= 12; ++t) {
        CHECK((e.power(t) - p).norm() < 1e-10);
        p = m * p;
    }
    CHECK((e.power(-1) * m - CMatrix::Identity(4, 4)).norm() < 1e-9);
}

TEST_CASE("eig rejects defective and singular matrices") {
    CHECK_THROWS_AS((void)eig(real_matrix(2, 2, {1, 1, 0, 1})), Error);
    try {
        (void)eig(real_matrix(2, 2, {1, 1, 0, 1}));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotDiagonalizable);
    }
    try {
        (void)eig(real_matrix(2, 2, {1, 0, 0, 0}));
        FAIL("expected SingularMatrix");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularMatrix);
    }
    try {
        (void)eig(CMatrix(2, 3));
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("operator norm of a nilpotent Jordan block matches a grid search") {
    const CMatrix j = real_matrix(2, 2, {0, 1, 0, 0});
    CHECK(operator_norm(j) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(grid_operator_norm(j, 20000) == doctest::Approx(1.0).epsilon(1e-6));

    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        CMatrix m = random_uniform_matrix(2, 2, rng);
        CHECK(operator_norm(m) == doctest::Approx(grid_operator_norm(m, 200000)).epsilon(1e-6));
    }
}

TEST_CASE("random draws honour their contracts") {
    Rng rng(5);
    const CMatrix u = random_uniform_matrix(6, 4, rng);
    CHECK(u.imag().norm() == 0.0);
    CHECK(u.real().maxCoeff() <= 1.0);
    CHECK(u.real().minCoeff() >= -1.0);
    CHECK(operator_norm(random_matrix_with_norm(3, 5, 0.42, rng)) == doctest::Approx(0.42).epsilon(1e-12));
    CHECK(random_unit_vector(5, rng).norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS((void)random_matrix_with_norm(2, 2, -1.0, rng), Error);

    Rng a(9), b(9);
    CHECK(random_uniform_matrix(3, 3, a) == random_uniform_matrix(3, 3, b));
}

TEST_CASE("error codes have names") {
    CHECK(to_string(ErrorCode::ResonantPair) == std::string("ResonantPair"));
    const Error e(ErrorCode::Overflow, "boom");
    CHECK(e.code() == ErrorCode::Overflow);
}

TEST_CASE("small closed-form cases") {
    const EigDecomposition id = eig(CMatrix::Identity(2, 2));
    CHECK(id.values == cvec({1.0, 1.0}));
    CHECK((id.vectors - CMatrix::Identity(2, 2)).norm() < 1e-15);

    const EigDecomposition d = eig(real_matrix(2, 2, {0.5, 0, 0, 0.9}));
    CHECK(d.values == cvec({0.9, 0.5}));
    CHECK(std::abs(d.vectors(1, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(d.vectors(0, 1)) == doctest::Approx(1.0));
    CHECK(std::abs(d.vectors(0, 0)) < 1e-15);

    CHECK(operator_norm(CMatrix::Zero(3, 3)) == 0.0);
    CHECK(operator_norm(real_matrix(2, 2, {0.5, 0, 0, 0.9})) == doctest::Approx(0.9).epsilon(1e-15));

    Rng rng(31);
    CHECK(operator_norm(random_matrix_with_norm(2, 2, 0.9, rng)) == doctest::Approx(0.9).epsilon(1e-12));
    const CMatrix one = random_matrix_with_norm(1, 1, 1.0, rng);
    CHECK(std::abs(std::abs(one(0, 0).real()) - 1.0) < 1e-15);
}
