#include "kcascade/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "kcascade/error.hpp"

namespace kcascade {

namespace {

std::string pair_name(std::size_t i, std::size_t j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

void require_dims(const PerturbationData& pd, const StateVector& x) {
    if (x.dims() != pd.dims) throw Error(ErrorCode::DimensionMismatch, "state does not match cascade dimensions");
}

Eigen::Index offset_of(const std::vector<std::size_t>& dims, std::size_t layer) {
    Eigen::Index off = 0;
    for (std::size_t k = 0; k + 1 < layer; ++k) off += static_cast<Eigen::Index>(dims[k]);
    return off;
}

}  // namespace

namespace {

template <class Matrix, class Vector>
Matrix twiddle(const Matrix& b, const Vector& lambda_i, const Vector& lambda_j) {
    using Scalar = typename Matrix::Scalar;
    if (b.rows() != lambda_i.size() || b.cols() != lambda_j.size()) {
        throw Error(ErrorCode::DimensionMismatch, "B must be d_i x d_j");
    }
    Matrix out(b.rows(), b.cols());
    for (Eigen::Index l = 0; l < b.rows(); ++l) {
        for (Eigen::Index m = 0; m < b.cols(); ++m) {
            const Scalar denom = Scalar(1) - lambda_j(m) / lambda_i(l);
            if (!(std::abs(denom) > tol::kGap)) {
                throw Error(ErrorCode::ResonantPair, "eigenvalue pair (" + std::to_string(l + 1) + "," +
                                                         std::to_string(m + 1) + ") is resonant");
            }
            out(l, m) = b(l, m) / denom;
        }
    }
    return out;
}

// Eigendecomposition in long double, ordered like decompose().
void extended_eig(const CMatrix& m, ExtendedPerturbation& ext) {
    const Eigen::ComplexEigenSolver<XMatrix> solver(m.cast<XComplex>());
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NotDiagonalizable, "eigensolver did not converge");
    const auto n = m.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const XVector& raw = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return eigenvalue_precedes(Complex(raw(a)), Complex(raw(b)));
    });
    XMatrix vectors(n, n);
    XVector values(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        vectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
        values(k) = raw(order[static_cast<std::size_t>(k)]);
    }
    ext.inverse.push_back(vectors.partialPivLu().inverse());
    ext.vectors.push_back(std::move(vectors));
    ext.values.push_back(std::move(values));
}

XVector row_times_state(const XMatrix& row, const StateVector& x, std::size_t layers) {
    XVector acc = XVector::Zero(row.rows());
    Eigen::Index off = 0;
    for (std::size_t j = 1; j <= layers; ++j) {
        const CVector& xj = x.layer(j);
        acc.noalias() += row.middleCols(off, xj.size()) * xj.cast<XComplex>();
        off += xj.size();
    }
    return acc;
}

}  // namespace

CMatrix geometric_sum_twiddle(const CMatrix& b, const CVector& lambda_i, const CVector& lambda_j) {
    return twiddle(b, lambda_i, lambda_j);
}

const CMatrix& PerturbationData::D(std::size_t i, std::size_t j) const {
    const auto it = d.find({i, j});
    if (it == d.end()) throw Error(ErrorCode::IndexOutOfRange, "no D" + pair_name(i, j));
    return it->second;
}

const CMatrix& PerturbationData::Ctilde(std::size_t i, std::size_t j) const {
    const auto it = ctilde.find({i, j});
    if (it == ctilde.end()) throw Error(ErrorCode::IndexOutOfRange, "no Ctilde" + pair_name(i, j));
    return it->second;
}

CMatrix PerturbationData::P(std::size_t i, std::size_t j) const {
    if (i < 1 || i > dims.size() || j < 1 || j > i) throw Error(ErrorCode::IndexOutOfRange, "no P" + pair_name(i, j));
    return pert_rows[i - 1].middleCols(offset_of(dims, j), static_cast<Eigen::Index>(dims[j - 1]));
}

CMatrix PerturbationData::assembled() const {
    Eigen::Index total = 0;
    for (std::size_t dim : dims) total += static_cast<Eigen::Index>(dim);
    CMatrix out = CMatrix::Zero(total, total);
    for (std::size_t i = 1; i <= dims.size(); ++i) {
        const CMatrix& row = pert_rows[i - 1];
        out.block(offset_of(dims, i), 0, row.rows(), row.cols()) = row;
    }
    return out;
}

PerturbationData compute_perturbation(const CascadeSystem& sys, const ConditionReport& report) {
    if (!sys.is_chained()) throw Error(ErrorCode::NotChained, "perturbation maps are defined for chained cascades");
    if (!report.overall) throw Error(ErrorCode::ConditionsNotMet, "cascade conditions do not hold");

    const std::size_t n = sys.size();
    PerturbationData pd;
    pd.dims = sys.dims();
    pd.pert_rows.reserve(n);
    ExtendedPerturbation& ext = pd.ext;
    for (std::size_t i = 1; i <= n; ++i) extended_eig(sys.layer(i), ext);

    for (std::size_t i = 1; i <= n; ++i) {
        const auto di = static_cast<Eigen::Index>(sys.dim(i));
        ext.d.emplace(LayerPair{i, i}, XMatrix::Identity(di, di));
        pd.d.emplace(LayerPair{i, i}, CMatrix::Identity(di, di));

        if (i > 1) {
            const CMatrix* c = sys.coupling(i, i - 1);
            const CMatrix coupling =
                c ? *c : CMatrix::Zero(di, static_cast<Eigen::Index>(sys.dim(i - 1)));
            // V_i^-1 C_{i,i-1} is shared by every j in this row.
            const XMatrix left = ext.inverse[i - 1] * coupling.cast<XComplex>();
            for (std::size_t j = 1; j < i; ++j) {
                const XMatrix b = left * ext.d.at({i - 1, j}) * ext.vectors[j - 1];
                const XMatrix ct = twiddle(b, ext.values[i - 1], ext.values[j - 1]);
                // L_i^-1 V_i = V_i Lambda_i^-1, so D_{i,j} = V_i Lambda_i^-1 C~_{i,j} V_j^-1.
                XMatrix dij = ext.vectors[i - 1] * ext.values[i - 1].cwiseInverse().asDiagonal() * ct * ext.inverse[j - 1];
                pd.ctilde.emplace(LayerPair{i, j}, ct.cast<Complex>());
                pd.d.emplace(LayerPair{i, j}, dij.cast<Complex>());
                ext.d.emplace(LayerPair{i, j}, std::move(dij));
            }
        }

        // P_{i,j} = sum_{j'=j}^{i-1} (-1)^{i-1-j'} D_{i,j'} P_{j',j}, and P_{i,i} = I.
        const Eigen::Index width = offset_of(pd.dims, i) + di;
        XMatrix row = XMatrix::Zero(di, width);
        row.rightCols(di).setIdentity();
        for (std::size_t jp = 1; jp < i; ++jp) {
            const long double sign = ((i - 1 - jp) % 2 == 0) ? 1.0L : -1.0L;
            const XMatrix& prev = ext.pert_rows[jp - 1];
            row.leftCols(prev.cols()) += sign * (ext.d.at({i, jp}) * prev);
        }
        CMatrix rounded = row.cast<Complex>();
        if (!all_finite(rounded)) throw Error(ErrorCode::ConditionsNotMet, "perturbation row is not finite");
        pd.pert_rows.push_back(std::move(rounded));
        ext.pert_rows.push_back(std::move(row));
    }
    return pd;
}

PerturbationData compute_perturbation(const CascadeSystem& sys) {
    return compute_perturbation(sys, validate_conditions(sys));
}

CVector apply_pert_layer(const PerturbationData& pd, const StateVector& x, std::size_t i) {
    require_dims(pd, x);
    if (i < 1 || i > pd.size()) throw Error(ErrorCode::IndexOutOfRange, "layer " + std::to_string(i));
    return row_times_state(pd.ext.pert_rows[i - 1], x, i).cast<Complex>();
}

StateVector apply_pert(const PerturbationData& pd, const StateVector& x) {
    require_dims(pd, x);
    std::vector<CVector> out;
    out.reserve(pd.size());
    out.push_back(x.layer(1));
    for (std::size_t i = 2; i <= pd.size(); ++i) out.push_back(apply_pert_layer(pd, x, i));
    return StateVector(std::move(out));
}

StateVector apply_pert_inverse(const PerturbationData& pd, const StateVector& y) {
    require_dims(pd, y);
    std::vector<XVector> x;
    x.reserve(pd.size());
    for (std::size_t i = 1; i <= pd.size(); ++i) {
        const XMatrix& row = pd.ext.pert_rows[i - 1];
        XVector acc = y.layer(i).cast<XComplex>();
        Eigen::Index off = 0;
        for (std::size_t j = 1; j < i; ++j) {
            acc.noalias() -= row.middleCols(off, x[j - 1].size()) * x[j - 1];
            off += x[j - 1].size();
        }
        x.push_back(std::move(acc));
    }
    std::vector<CVector> out;
    out.reserve(x.size());
    for (const XVector& v : x) out.push_back(v.cast<Complex>());
    return StateVector(std::move(out));
}

CVector apply_layer_power(const EigDecomposition& e, const CVector& v, int t) {
    CVector coords = e.inverse * v;
    for (Eigen::Index k = 0; k < coords.size(); ++k) coords(k) *= std::pow(e.values(k), t);
    return e.vectors * coords;
}

ClosedFormSolution::ClosedFormSolution(const CascadeSystem& sys, const PerturbationData& pd) : sys_(&sys), pd_(&pd) {
    if (sys.dims() != pd.dims) throw Error(ErrorCode::DimensionMismatch, "perturbation data belongs to another system");
}

StateVector ClosedFormSolution::at(const StateVector& x, int t) const {
    if (t < 0) throw Error(ErrorCode::PreconditionViolation, "time must be non-negative");
    if (x.dims() != pd_->dims) throw Error(ErrorCode::DimensionMismatch, "state does not match cascade dimensions");
    const ExtendedPerturbation& ext = pd_->ext;
    const std::size_t n = pd_->size();

    // V_j Lambda_j^t V_j^-1 pert_j(x), all in long double.
    std::vector<XVector> evolved;
    evolved.reserve(n);
    for (std::size_t j = 1; j <= n; ++j) {
        XVector coords = ext.inverse[j - 1] * row_times_state(ext.pert_rows[j - 1], x, j);
        for (Eigen::Index k = 0; k < coords.size(); ++k) coords(k) *= std::pow(ext.values[j - 1](k), t);
        evolved.push_back(ext.vectors[j - 1] * coords);
    }

    std::vector<CVector> out;
    out.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        XVector acc = evolved[i - 1];
        for (std::size_t j = 1; j < i; ++j) {
            const long double sign = ((i - j) % 2 == 0) ? 1.0L : -1.0L;
            acc.noalias() += sign * (ext.d.at({i, j}) * evolved[j - 1]);
        }
        out.push_back(acc.cast<Complex>());
    }
    return StateVector(std::move(out));
}

StateVector closed_form_at(const ClosedFormSolution& cf, const StateVector& x, int t) {
    return cf.at(x, t);
}

}  // namespace kcascade
