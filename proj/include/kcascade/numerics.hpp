#pragma once

#include <complex>
#include <cstddef>
#include <random>

#include <Eigen/Dense>

namespace kcascade {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;

/// Seeded generator passed explicitly to every randomized routine.
using Rng = std::mt19937_64;

namespace tol {
inline constexpr double kEigResidual = 1e-8;
inline constexpr double kInvResidual = 1e-8;
inline constexpr double kSingular = 1e-12;
inline constexpr double kConditionCap = 1e8;
inline constexpr double kGap = 1e-9;
inline constexpr int kMaxResample = 100;
}  // namespace tol

/// L = V diag(values) V^-1 with eigenvalues sorted by descending magnitude,
/// ties broken by descending real part, then descending imaginary part.
struct EigDecomposition {
    CMatrix vectors;
    CVector values;
    CMatrix inverse;
    double condition_number = 1.0;

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(values.size()); }

    /// V diag(values^t) V^-1; negative t gives inverse powers.
    [[nodiscard]] CMatrix power(int t) const;
    [[nodiscard]] CMatrix reconstruct() const { return power(1); }
    [[nodiscard]] double min_abs_eigenvalue() const;
};

/// Sorted decomposition without acceptance checks. Callers that need the
/// contract enforced use eig().
[[nodiscard]] EigDecomposition decompose(const CMatrix& m);

/// Decomposition meeting the residual contract. Throws NotDiagonalizable when
/// the eigenvector matrix is too ill-conditioned and SingularMatrix when an
/// eigenvalue is numerically zero.
[[nodiscard]] EigDecomposition eig(const CMatrix& m);

/// Orders eigenvalues for reproducible indexing; returns true when a comes first.
[[nodiscard]] bool eigenvalue_precedes(const Complex& a, const Complex& b) noexcept;

/// Induced 2-norm (largest singular value).
[[nodiscard]] double operator_norm(const CMatrix& m);

[[nodiscard]] bool all_finite(const CMatrix& m) noexcept;

/// Real entries uniform in [-1, 1].
[[nodiscard]] CMatrix random_uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng);

/// Uniform [-1, 1] draw rescaled so operator_norm equals target_norm.
[[nodiscard]] CMatrix random_matrix_with_norm(std::size_t rows, std::size_t cols, double target_norm, Rng& rng);

/// Complex vector with real and imaginary parts uniform in [-1, 1], scaled to unit 2-norm.
[[nodiscard]] CVector random_unit_vector(std::size_t dim, Rng& rng);

}  // namespace kcascade
