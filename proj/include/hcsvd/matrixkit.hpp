#pragma once

// Dense numerical kernels shared by the clustering engine: standardization,
// sample correlation, symmetric eigendecomposition, Cholesky factorization and
// block detection on correlation matrices.

#include <hcsvd/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hcsvd {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<std::string>;

inline Labels default_labels(Index p) {
    Labels labels;
    labels.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) labels.push_back("V" + std::to_string(j + 1));
    return labels;
}

/// Rows are observations, columns are variables.
struct RawMatrix {
    Matrix values;
    Labels labels;

    RawMatrix() = default;
    RawMatrix(Matrix v, Labels l = {}) : values(std::move(v)), labels(std::move(l)) {
        if (labels.empty()) labels = default_labels(values.cols());
    }
};

class StandardizedMatrix {
public:
    const Matrix& values() const noexcept { return values_; }
    const Labels& labels() const noexcept { return labels_; }
    Index rows() const noexcept { return values_.rows(); }
    Index cols() const noexcept { return values_.cols(); }

private:
    StandardizedMatrix(Matrix v, Labels l) : values_(std::move(v)), labels_(std::move(l)) {}
    friend StandardizedMatrix standardize(const RawMatrix&);

    Matrix values_;
    Labels labels_;
};

/// Symmetric PSD matrix with unit diagonal. Construction validates the invariants.
class CorrelationMatrix {
public:
    static constexpr double kSymmetryTol = 1e-12;
    static constexpr double kDiagonalTol = 1e-12;
    static constexpr double kPsdTol = -1e-8;

    CorrelationMatrix() = default;

    /// Validates symmetry, unit diagonal, entry bounds and positive semidefiniteness.
    explicit CorrelationMatrix(Matrix values, Labels labels = {}) : values_(std::move(values)), labels_(std::move(labels)) {
        if (labels_.empty()) labels_ = default_labels(values_.cols());
        validate();
    }

    /// Skips validation; for matrices that are correlation matrices by construction
    /// (principal submatrices, generated populations, XᵀX/(n−1) of standardized data).
    static CorrelationMatrix trusted(Matrix values, Labels labels = {}) {
        CorrelationMatrix r;
        r.values_ = std::move(values);
        r.labels_ = labels.empty() ? default_labels(r.values_.cols()) : std::move(labels);
        return r;
    }

    const Matrix& values() const noexcept { return values_; }
    const Labels& labels() const noexcept { return labels_; }
    Index size() const noexcept { return values_.rows(); }
    double operator()(Index i, Index j) const { return values_(i, j); }

    CorrelationMatrix principal_submatrix(std::span<const Index> idx) const {
        const auto m = static_cast<Index>(idx.size());
        Matrix sub(m, m);
        Labels labels;
        labels.reserve(idx.size());
        for (Index a = 0; a < m; ++a) {
            labels.push_back(labels_[static_cast<std::size_t>(idx[a])]);
            for (Index b = 0; b < m; ++b) sub(a, b) = values_(idx[a], idx[b]);
        }
        return trusted(std::move(sub), std::move(labels));
    }

private:
    void validate() const;

    Matrix values_;
    Labels labels_;
};

inline StandardizedMatrix standardize(const RawMatrix& raw) {
    const Index n = raw.values.rows();
    const Index p = raw.values.cols();
    if (n < 2) throw InvalidInput("standardize: need at least 2 observations, got " + std::to_string(n));
    if (p < 1) throw InvalidInput("standardize: need at least 1 variable");
    if (static_cast<Index>(raw.labels.size()) != p) throw InvalidInput("standardize: label count does not match column count");
    if (!raw.values.allFinite()) throw InvalidInput("standardize: non-finite value in data");

    Matrix x = raw.values;
    for (Index j = 0; j < p; ++j) {
        auto col = x.col(j);
        const double mean = col.mean();
        col.array() -= mean;
        // Two-pass centering keeps the mean at rounding level before scaling.
        col.array() -= col.mean();
        const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
        const double scale = std::max(raw.values.col(j).cwiseAbs().maxCoeff(), 1.0);
        if (!(sd > 1e-14 * scale)) throw ConstantColumn(static_cast<std::size_t>(j));
        col /= sd;
    }
    return StandardizedMatrix(std::move(x), raw.labels);
}

/// R = XᵀX/(n−1), with the diagonal pinned to exactly one.
inline CorrelationMatrix correlation(const StandardizedMatrix& x) {
    const double denom = static_cast<double>(x.rows() - 1);
    Matrix r = Matrix::Zero(x.cols(), x.cols());
    r.selfadjointView<Eigen::Lower>().rankUpdate(x.values().transpose(), 1.0 / denom);
    r = r.selfadjointView<Eigen::Lower>();
    for (Index j = 0; j < r.rows(); ++j) r(j, j) = 1.0;
    r = r.cwiseMax(-1.0).cwiseMin(1.0);
    return CorrelationMatrix::trusted(std::move(r), x.labels());
}

struct EigenDecomposition {
    Vector values;   // descending
    Matrix vectors;  // column i pairs with values(i)
};

/// Full symmetric eigendecomposition sorted by descending eigenvalue. Equal
/// eigenvalues keep the solver's original order. `top_k` truncates the result.
inline EigenDecomposition sym_eigen(const Matrix& a, std::optional<Index> top_k = std::nullopt) {
    if (a.rows() != a.cols()) throw InvalidInput("sym_eigen: matrix is not square");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("sym_eigen: eigensolver did not converge");

    const Index p = a.rows();
    std::vector<Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Index{0});
    const Vector& ev = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) { return ev(l) > ev(r); });

    const Index k = top_k ? std::clamp<Index>(*top_k, 0, p) : p;
    EigenDecomposition out{Vector(k), Matrix(p, k)};
    for (Index i = 0; i < k; ++i) {
        out.values(i) = ev(order[static_cast<std::size_t>(i)]);
        out.vectors.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

inline EigenDecomposition sym_eigen(const CorrelationMatrix& r, std::optional<Index> top_k = std::nullopt) {
    return sym_eigen(r.values(), top_k);
}

/// Eigenvalues only, descending.
inline Vector sym_eigenvalues(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("sym_eigenvalues: eigensolver did not converge");
    return solver.eigenvalues().reverse();
}

/// Largest eigenvalue; equals the spectral norm for a PSD matrix.
inline double spectral_norm(const CorrelationMatrix& r) {
    if (r.size() == 1) return std::abs(r(0, 0));
    return sym_eigenvalues(r.values())(0);
}

inline void CorrelationMatrix::validate() const {
    const Index p = values_.rows();
    if (p < 1 || values_.cols() != p) throw InvalidInput("correlation matrix must be square and non-empty");
    if (static_cast<Index>(labels_.size()) != p) throw InvalidInput("correlation matrix label count does not match size");
    if (!values_.allFinite()) throw InvalidInput("correlation matrix has non-finite entries");
    for (Index i = 0; i < p; ++i) {
        if (std::abs(values_(i, i) - 1.0) > kDiagonalTol)
            throw InvalidInput("correlation matrix diagonal (" + std::to_string(i + 1) + ") is not one");
        for (Index j = 0; j < i; ++j) {
            if (std::abs(values_(i, j) - values_(j, i)) > kSymmetryTol)
                throw InvalidInput("correlation matrix is not symmetric at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
            if (std::abs(values_(i, j)) > 1.0 + kSymmetryTol)
                throw InvalidInput("correlation entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") exceeds one in magnitude");
        }
    }
    if (sym_eigenvalues(values_)(p - 1) < kPsdTol) throw InvalidInput("correlation matrix is not positive semidefinite");
}

/// Lower-triangular L with L·Lᵀ = R.
inline Matrix cholesky(const Matrix& r) {
    const Index p = r.rows();
    if (r.cols() != p) throw InvalidInput("cholesky: matrix is not square");
    Matrix l = Matrix::Zero(p, p);
    for (Index j = 0; j < p; ++j) {
        double pivot = r(j, j) - l.row(j).head(j).squaredNorm();
        if (!(pivot > 1e-12)) throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j + 1) + " is not positive");
        const double d = std::sqrt(pivot);
        l(j, j) = d;
        for (Index i = j + 1; i < p; ++i) l(i, j) = (r(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
    }
    return l;
}

inline Matrix cholesky(const CorrelationMatrix& r) { return cholesky(r.values()); }

/// Connected components of the graph with an edge wherever |r_ij| > tol.
/// Each component lists its members in increasing order; components are
/// ordered by their smallest member.
inline std::vector<std::vector<Index>> is_block_diagonal_under_permutation(const CorrelationMatrix& r, double tol) {
    const Index p = r.size();
    std::vector<Index> component(static_cast<std::size_t>(p), -1);
    std::vector<std::vector<Index>> out;
    std::vector<Index> stack;
    for (Index start = 0; start < p; ++start) {
        if (component[static_cast<std::size_t>(start)] >= 0) continue;
        const auto id = static_cast<Index>(out.size());
        out.emplace_back();
        component[static_cast<std::size_t>(start)] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            const Index i = stack.back();
            stack.pop_back();
            out.back().push_back(i);
            for (Index j = 0; j < p; ++j) {
                if (component[static_cast<std::size_t>(j)] < 0 && j != i && std::abs(r(i, j)) > tol) {
                    component[static_cast<std::size_t>(j)] = id;
                    stack.push_back(j);
                }
            }
        }
        std::sort(out.back().begin(), out.back().end());
    }
    return out;
}

}  // namespace hcsvd
