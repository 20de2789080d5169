#include "kcascade/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "kcascade/error.hpp"

namespace kcascade {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::PreconditionViolation: return "PreconditionViolation";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::NotDiagonalizable: return "NotDiagonalizable";
        case ErrorCode::SingularMatrix: return "SingularMatrix";
        case ErrorCode::DegenerateDraw: return "DegenerateDraw";
        case ErrorCode::GenerationFailed: return "GenerationFailed";
        case ErrorCode::NotChained: return "NotChained";
        case ErrorCode::ConditionsNotMet: return "ConditionsNotMet";
        case ErrorCode::ResonantPair: return "ResonantPair";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::SameLayerProduct: return "SameLayerProduct";
        case ErrorCode::NotPeripheral: return "NotPeripheral";
        case ErrorCode::DeflationIncomplete: return "DeflationIncomplete";
        case ErrorCode::NewtonDivergence: return "NewtonDivergence";
        case ErrorCode::InvalidFormat: return "InvalidFormat";
    }
    return "Unknown";
}

namespace {

// Relative width inside which two magnitudes (or parts) count as tied.
constexpr double kTieTol = 1e-12;

bool tied(double a, double b) noexcept {
    return std::abs(a - b) <= kTieTol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

bool eigenvalue_precedes(const Complex& a, const Complex& b) noexcept {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    if (!tied(ma, mb)) return ma > mb;
    if (!tied(a.real(), b.real())) return a.real() > b.real();
    return a.imag() > b.imag();
}

CMatrix EigDecomposition::power(int t) const {
    CVector scaled(values.size());
    for (Eigen::Index k = 0; k < values.size(); ++k) scaled(k) = std::pow(values(k), t);
    return vectors * scaled.asDiagonal() * inverse;
}

double EigDecomposition::min_abs_eigenvalue() const {
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < values.size(); ++k) m = std::min(m, std::abs(values(k)));
    return m;
}

EigDecomposition decompose(const CMatrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "eigendecomposition needs a non-empty square matrix");
    }
    if (!all_finite(m)) throw Error(ErrorCode::PreconditionViolation, "matrix has non-finite entries");

    Eigen::ComplexEigenSolver<CMatrix> solver(m, true);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::NotDiagonalizable, "eigensolver did not converge");
    }
    const CVector& raw_values = solver.eigenvalues();
    const CMatrix& raw_vectors = solver.eigenvectors();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(raw_values.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return eigenvalue_precedes(raw_values(a), raw_values(b));
    });

    EigDecomposition out;
    const Eigen::Index n = m.rows();
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = raw_values(order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = raw_vectors.col(order[static_cast<std::size_t>(k)]);
    }

    Eigen::JacobiSVD<CMatrix> svd(out.vectors);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    out.condition_number = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    out.inverse = out.vectors.partialPivLu().inverse();
    return out;
}

EigDecomposition eig(const CMatrix& m) {
    EigDecomposition d = decompose(m);
    if (!(d.condition_number <= tol::kConditionCap)) {
        throw Error(ErrorCode::NotDiagonalizable,
                    "eigenvector condition number " + std::to_string(d.condition_number) + " exceeds cap");
    }
    if (d.min_abs_eigenvalue() < tol::kSingular) {
        throw Error(ErrorCode::SingularMatrix, "eigenvalue below singularity tolerance");
    }
    const double scale = std::max(m.norm(), std::numeric_limits<double>::min());
    const double residual = (m * d.vectors - d.vectors * d.values.asDiagonal()).norm();
    if (residual > tol::kEigResidual * scale) {
        throw Error(ErrorCode::NotDiagonalizable, "eigen-residual above tolerance");
    }
    const CMatrix identity = CMatrix::Identity(m.rows(), m.cols());
    if ((d.vectors * d.inverse - identity).norm() > tol::kInvResidual) {
        throw Error(ErrorCode::NotDiagonalizable, "eigenvector inverse residual above tolerance");
    }
    return d;
}

double operator_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

bool all_finite(const CMatrix& m) noexcept {
    return m.allFinite();
}

CMatrix random_uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    CMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    // Row-major draw order keeps the stream layout independent of Eigen's storage order.
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = Complex(uniform(rng), 0.0);
    }
    return out;
}

CMatrix random_matrix_with_norm(std::size_t rows, std::size_t cols, double target_norm, Rng& rng) {
    if (!(target_norm > 0.0) || !std::isfinite(target_norm)) {
        throw Error(ErrorCode::PreconditionViolation, "target norm must be positive and finite");
    }
    for (int attempt = 0; attempt < tol::kMaxResample; ++attempt) {
        CMatrix draw = random_uniform_matrix(rows, cols, rng);
        const double norm = operator_norm(draw);
        if (norm > 0.0) {
            draw *= target_norm / norm;
            return draw;
        }
    }
    throw Error(ErrorCode::DegenerateDraw, "zero matrix drawn on every attempt");
}

CVector random_unit_vector(std::size_t dim, Rng& rng) {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    CVector out(static_cast<Eigen::Index>(dim));
    for (int attempt = 0; attempt < tol::kMaxResample; ++attempt) {
        for (Eigen::Index k = 0; k < out.size(); ++k) {
            const double re = uniform(rng);
            const double im = uniform(rng);
            out(k) = Complex(re, im);
        }
        const double norm = out.norm();
        if (norm > 0.0) return out / norm;
    }
    throw Error(ErrorCode::DegenerateDraw, "zero vector drawn on every attempt");
}

}  // namespace kcascade
