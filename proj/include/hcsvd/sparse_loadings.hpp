#pragma once

// Sparse right singular vectors with an exact number of nonzero entries.
//
// The rank-one problem  min ‖X − u vᵀ‖²_F  s.t. ‖v‖₂ = 1, v sparse  is solved by
// alternating  u ← Xv/‖Xv‖,  z ← Xᵀu,  and soft-thresholding z at its (s+1)-th
// largest magnitude so that exactly the s largest entries survive. Further
// loadings are taken from the deflated residual X ← X − σ u vᵀ.
//
// Every step only touches X through its Gram matrix G = XᵀX:
//   Xᵀu = G v / sqrt(vᵀGv),   σ = sqrt(vᵀGv),   X(I − vvᵀ) ↔ (I − vvᵀ) G (I − vvᵀ),
// so the implementation works on the p×p Gram matrix. This also covers the
// correlation-only path, where R itself plays the role of X (G = R²).

#include <hcsvd/errors.hpp>
#include <hcsvd/matrixkit.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace hcsvd {

struct SparseOptions {
    double power_tol = 1e-9;
    int power_max_iter = 1000;
    double tol = 1e-6;
    int max_iter = 2000;
    /// End a sequence at the first loading that fails to converge (flagged)
    /// instead of throwing ConvergenceFailure.
    bool stop_on_nonconvergence = false;
};

struct SparseLoading {
    Vector vector;               // unit norm, zero outside `support`
    std::vector<Index> support;  // nonzero entries, ascending
    Index degree = 0;            // requested s; equals support.size() unless the
                                 // input has fewer than s directions with signal
    double quasi_singular_value = 0.0;
    int iterations = 0;
};

/// Residual of the sequential rank-one approximations, kept in Gram form
/// (residual_gram = X_rᵀ X_r).
struct DeflationState {
    Matrix residual_gram;
    Index rank_extracted = 0;

    explicit DeflationState(Matrix gram) : residual_gram(std::move(gram)) {}

    double frobenius_norm() const { return std::sqrt(std::max(residual_gram.trace(), 0.0)); }

    /// X ← X − σ u vᵀ, i.e. X ← X (I − v vᵀ).
    void deflate(const Vector& v) {
        const Vector w = residual_gram * v;
        const double q = v.dot(w);
        residual_gram.noalias() -= w * v.transpose();
        residual_gram.noalias() -= v * w.transpose();
        residual_gram.noalias() += (q * v) * v.transpose();
        ++rank_extracted;
    }
};

struct LoadingSequence {
    std::vector<SparseLoading> loadings;
    bool degenerate_residual = false;  // residual vanished before k loadings were found
    bool nonconverged = false;         // stopped at a loading that did not converge
};

namespace detail {

/// Flip so the largest-magnitude entry (smallest index on ties) is positive.
inline void canonical_sign(Vector& v) {
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(best))) best = i;
    if (v(best) < 0) v = -v;
}

/// Indices of the s largest |z| in ascending order (ties resolved towards the
/// smaller index), and the magnitude of the (s+1)-th largest entry (0 when s = p).
inline std::vector<Index> top_magnitudes(const Vector& z, Index s, std::vector<Index>& scratch, double& next_magnitude) {
    const Index p = z.size();
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(s));
    if (s >= p) {
        next_magnitude = 0.0;
        for (Index i = 0; i < p; ++i) out.push_back(i);
        return out;
    }
    scratch.resize(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) scratch[static_cast<std::size_t>(i)] = i;
    const auto before = [&](Index a, Index b) {
        const double za = std::abs(z(a)), zb = std::abs(z(b));
        return za > zb || (za == zb && a < b);
    };
    std::nth_element(scratch.begin(), scratch.begin() + s, scratch.end(), before);
    const Index pivot = scratch[static_cast<std::size_t>(s)];
    next_magnitude = std::abs(z(pivot));
    for (Index i = 0; i < p; ++i)
        if (before(i, pivot)) out.push_back(i);
    return out;
}

/// Eigenvector of the symmetric tridiagonal matrix (diag, sub) for its largest
/// eigenvalue theta, by inverse iteration with the shift just above theta
/// (σI − T is then positive definite and the Thomas recurrence is stable).
inline Vector top_tridiagonal_eigenvector(const Vector& diag, const Vector& sub, double theta) {
    const Index m = diag.size();
    double span = std::abs(theta);
    for (Index i = 0; i < m; ++i) span = std::max(span, std::abs(diag(i)) + (i + 1 < m ? std::abs(sub(i)) : 0.0));
    const double sigma = theta + 1e-10 * std::max(span, 1e-300);
    Vector y = Vector::Ones(m) / std::sqrt(static_cast<double>(m));
    Vector c(m), d(m);
    for (int pass = 0; pass < 3; ++pass) {
        // Solve (σI − T) x = y.
        double piv = sigma - diag(0);
        c(0) = m > 1 ? -sub(0) / piv : 0.0;
        d(0) = y(0) / piv;
        for (Index i = 1; i < m; ++i) {
            piv = (sigma - diag(i)) + sub(i - 1) * c(i - 1);
            c(i) = i + 1 < m ? -sub(i) / piv : 0.0;
            d(i) = (y(i) + sub(i - 1) * d(i - 1)) / piv;
        }
        y(m - 1) = d(m - 1);
        for (Index i = m - 2; i >= 0; --i) y(i) = d(i) - c(i) * y(i + 1);
        y.normalize();
    }
    return y;
}

/// Dense leading eigenvector of a PSD Gram matrix (the leading right singular
/// vector of the underlying data matrix). Restarted Lanczos with full
/// reorthogonalization; stops once the Ritz residual ‖Gu − θu‖ falls below
/// power_tol·θ or power_max_iter matrix-vector products have been spent.
inline Vector leading_direction(const Matrix& gram, const Vector* start, const SparseOptions& opt) {
    const Index p = gram.rows();
    Vector u;
    if (start != nullptr && start->size() == p && start->norm() > 0) {
        u = start->normalized();
    } else {
        u = Vector::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
    }
    const double scale = std::max(gram.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    if ((gram * u).norm() <= 1e-12 * scale) {
        // Start lies in the null space; restart on the heaviest coordinate.
        Index j = 0;
        gram.diagonal().maxCoeff(&j);
        u = Vector::Unit(p, j);
    }

    const Index basis_cap = std::min<Index>(p, 40);
    Matrix q(p, basis_cap);
    Vector w(p);
    int products = 0;
    while (products < opt.power_max_iter) {
        std::vector<double> alpha, beta;
        q.col(0) = u;
        Index m = 0;
        for (; m < basis_cap && products < opt.power_max_iter; ++m) {
            w.noalias() = gram * q.col(m);
            ++products;
            alpha.push_back(q.col(m).dot(w));
            // Full reorthogonalization, twice for stability.
            for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(m + 1) * (q.leftCols(m + 1).transpose() * w);
            const double b = w.norm();
            beta.push_back(b);
            if (m + 1 == basis_cap || b <= 1e-14 * scale) {
                ++m;
                break;
            }
            q.col(m + 1) = w / b;
        }
        const Vector diag = Eigen::Map<const Vector>(alpha.data(), m);
        const Vector sub = Eigen::Map<const Vector>(beta.data(), std::max<Index>(m - 1, 0));
        Eigen::SelfAdjointEigenSolver<Matrix> small;
        small.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        const double theta = small.eigenvalues()(m - 1);
        const Vector y = top_tridiagonal_eigenvector(diag, sub, theta);
        u = q.leftCols(m) * y;
        u.normalize();
        const double residual = std::abs(beta[static_cast<std::size_t>(m - 1)] * y(m - 1));
        if (residual <= opt.power_tol * std::max(theta, 1e-300) || beta.back() <= 1e-14 * scale) break;
    }
    canonical_sign(u);
    return u;
}

}  // namespace detail

/// One sparse loading of degree s from a Gram matrix G = XᵀX.
/// `start` seeds the dense power iteration that initializes the alternation.
inline SparseLoading sparse_rank1_gram(const Matrix& gram, Index s, const Vector* start = nullptr, const SparseOptions& opt = {}) {
    const Index p = gram.rows();
    if (gram.cols() != p || p < 1) throw InvalidInput("sparse_rank1: Gram matrix must be square and non-empty");
    if (s < 1 || s > p) throw InvalidInput("sparse_rank1: degree of sparsity must lie in [1, p]");
    if (!(gram.trace() >= 1e-28)) throw ZeroMatrix("sparse_rank1: input matrix is numerically zero");

    Vector v = detail::leading_direction(gram, start, opt);
    std::vector<Index> support, scratch;
    Vector gv(p), z(p), next(p);

    SparseLoading out;
    bool converged = false;
    bool support_stable = false;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        if (it == 0) {
            gv.noalias() = gram * v;
        } else {
            gv.setZero();
            for (Index i : support) gv += gram.col(i) * v(i);
        }
        const double q = v.dot(gv);
        if (!(q > 0)) throw ConvergenceFailure("sparse_rank1: quasi singular value vanished");
        z = gv / std::sqrt(q);

        double threshold = 0.0;
        auto ranked = detail::top_magnitudes(z, s, scratch, threshold);

        next.setZero();
        Index nonzero = 0;
        for (Index i : ranked) {
            const double shrunk = std::abs(z(i)) - threshold;
            next(i) = std::copysign(shrunk, z(i));
            nonzero += shrunk > 0 ? 1 : 0;
        }
        // Ties at the threshold would drop entries; keep the s largest unshrunk instead.
        if (nonzero < static_cast<Index>(ranked.size())) {
            for (Index i : ranked) next(i) = z(i);
        }
        const double norm = next.norm();
        if (!(norm > 0)) throw ConvergenceFailure("sparse_rank1: thresholded vector vanished");
        next /= norm;
        detail::canonical_sign(next);

        support_stable = ranked == support;
        const double change = (next - v).norm();
        v.swap(next);
        support = std::move(ranked);
        if (support_stable && change < opt.tol) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged && !support_stable)
        throw ConvergenceFailure("sparse_rank1: support still changing after " + std::to_string(opt.max_iter) + " iterations");

    out.quasi_singular_value = std::sqrt(std::max(v.dot(gram * v), 0.0));
    for (Index i : support)
        if (v(i) != 0.0) out.support.push_back(i);
    out.vector = std::move(v);
    out.degree = s;
    out.iterations = it;
    return out;
}

/// First k sparse loadings of degree s, each from the residual left by the previous ones.
/// `starts`, when given, supplies a warm start for the dense initialization of each rank.
inline LoadingSequence sparse_loading_sequence_gram(const Matrix& gram, Index k, Index s, const Matrix* starts = nullptr,
                                                    const SparseOptions& opt = {}) {
    const Index p = gram.rows();
    if (k < 1 || k > p) throw InvalidInput("sparse_loading_sequence: k must lie in [1, p]");
    if (s < 1 || s > std::max<Index>(p - 1, 1)) throw InvalidInput("sparse_loading_sequence: s must lie in [1, p-1]");

    LoadingSequence out;
    out.loadings.reserve(static_cast<std::size_t>(k));
    DeflationState state(gram);
    const double scale = std::max(state.frobenius_norm(), 1.0);
    for (Index r = 0; r < k; ++r) {
        if (r > 0 && state.frobenius_norm() < 1e-12 * scale) {
            out.degenerate_residual = true;
            break;
        }
        Vector start;
        if (starts != nullptr && r < starts->cols()) start = starts->col(r);
        SparseLoading loading;
        try {
            loading = sparse_rank1_gram(state.residual_gram, s, start.size() ? &start : nullptr, opt);
        } catch (const ConvergenceFailure&) {
            if (!opt.stop_on_nonconvergence) throw;
            out.nonconverged = true;
            break;
        }
        state.deflate(loading.vector);
        out.loadings.push_back(std::move(loading));
    }
    return out;
}

inline Matrix gram_of(const Matrix& x) {
    Matrix g = Matrix::Zero(x.cols(), x.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    return g.selfadjointView<Eigen::Lower>();
}

/// Sparse loading of degree s for a data matrix x (n×p).
inline SparseLoading sparse_rank1(const Matrix& x, Index s, const SparseOptions& opt = {}) {
    if (x.size() == 0) throw InvalidInput("sparse_rank1: empty matrix");
    if (!(x.norm() >= 1e-14)) throw ZeroMatrix("sparse_rank1: input matrix is numerically zero");
    return sparse_rank1_gram(gram_of(x), s, nullptr, opt);
}

/// First k sparse loadings of degree s for a data matrix x (n×p).
inline LoadingSequence sparse_loading_sequence(const Matrix& x, Index k, Index s, const SparseOptions& opt = {}) {
    if (x.size() == 0) throw InvalidInput("sparse_loading_sequence: empty matrix");
    if (!(x.norm() >= 1e-14)) throw ZeroMatrix("sparse_loading_sequence: input matrix is numerically zero");
    return sparse_loading_sequence_gram(gram_of(x), k, s, nullptr, opt);
}

}  // namespace hcsvd
