#pragma once

#include <hcsvd.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hcsvd::testing {

/// Pearson correlation computed pairwise from raw columns.
inline double pearson(const Matrix& x, Index a, Index b) {
    const double n = static_cast<double>(x.rows());
    double ma = 0, mb = 0;
    for (Index i = 0; i < x.rows(); ++i) {
        ma += x(i, a);
        mb += x(i, b);
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (Index i = 0; i < x.rows(); ++i) {
        sab += (x(i, a) - ma) * (x(i, b) - mb);
        saa += (x(i, a) - ma) * (x(i, a) - ma);
        sbb += (x(i, b) - mb) * (x(i, b) - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

inline Matrix equicorrelation(Index p, double rho) {
    Matrix m = Matrix::Constant(p, p, rho);
    m.diagonal().setOnes();
    return m;
}

/// Block-diagonal matrix of equicorrelated blocks.
inline Matrix block_equicorrelation(const std::vector<Index>& sizes, const std::vector<double>& rhos) {
    Index p = 0;
    for (Index s : sizes) p += s;
    Matrix m = Matrix::Zero(p, p);
    Index at = 0;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        m.block(at, at, sizes[b], sizes[b]) = equicorrelation(sizes[b], rhos[b]);
        at += sizes[b];
    }
    return m;
}

inline Matrix random_normal(Index n, Index p, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    Matrix x(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) x(i, j) = nd(gen);
    return x;
}

/// Sample correlation of n draws with a random factor structure: always
/// positive definite, with a spread of correlation strengths.
inline CorrelationMatrix random_correlation(Index p, std::mt19937_64& gen, Index n = 0) {
    if (n == 0) n = 4 * p + 20;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Index factors = std::max<Index>(1, p / 3);
    Matrix load(p, factors);
    for (Index i = 0; i < p; ++i)
        for (Index f = 0; f < factors; ++f) load(i, f) = u(gen);
    Matrix x = random_normal(n, factors, gen) * load.transpose() + random_normal(n, p, gen);
    return correlation(standardize(RawMatrix(x)));
}

/// Exact data with correlation matrix r: n = 2p+ rows whose sample
/// correlation equals r up to rounding. Built from an orthonormal basis of
/// centered vectors so that XᵀX/(n−1) = r exactly in exact arithmetic.
inline RawMatrix exact_data(const Matrix& r, Index n, std::mt19937_64& gen) {
    const Index p = r.rows();
    Matrix z = random_normal(n, p, gen);
    z.rowwise() -= z.colwise().mean();
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(n, p);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(r);
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix half = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    return RawMatrix(std::sqrt(static_cast<double>(n - 1)) * q * half);
}

inline Partition block_partition(const std::vector<Index>& sizes) {
    Partition out;
    Index at = 0;
    for (Index s : sizes) {
        Cluster c;
        for (Index i = 0; i < s; ++i) c.push_back(at + i);
        out.push_back(c);
        at += s;
    }
    return out;
}

inline Matrix permute(const Matrix& r, const std::vector<Index>& perm) {
    Matrix out(r.rows(), r.cols());
    for (Index i = 0; i < r.rows(); ++i)
        for (Index j = 0; j < r.cols(); ++j) out(i, j) = r(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    return out;
}

/// Random partition of p items into at most `max_clusters` labels.
inline Partition random_partition(Index p, Index max_clusters, std::mt19937_64& gen) {
    std::uniform_int_distribution<Index> pick(0, max_clusters - 1);
    std::vector<Index> labels(static_cast<std::size_t>(p));
    for (auto& l : labels) l = pick(gen);
    return partition_from_labels(labels);
}

}  // namespace hcsvd::testing
