#include "support.hpp"

#include <gtest/gtest.h>

using namespace hcsvd;
using namespace hcsvd::testing;

TEST(Standardize, ThreePointColumn) {
    Matrix x(3, 1);
    x << 1, 2, 3;
    const auto s = standardize(RawMatrix(x));
    EXPECT_NEAR(s.values()(0, 0), -1.0, 1e-15);
    EXPECT_NEAR(s.values()(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(s.values()(2, 0), 1.0, 1e-15);
}

TEST(Standardize, IdempotentOnStandardizedInput) {
    std::mt19937_64 gen(3);
    const auto once = standardize(RawMatrix(random_normal(40, 5, gen)));
    const auto twice = standardize(RawMatrix(once.values()));
    EXPECT_LT((once.values() - twice.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, MeansAndDeviations) {
    std::mt19937_64 gen(4);
    Matrix x = random_normal(25, 6, gen) * 7.0;
    x.array() += 1e3;
    const auto s = standardize(RawMatrix(x));
    for (Index j = 0; j < 6; ++j) {
        EXPECT_NEAR(s.values().col(j).mean(), 0.0, 1e-10);
        EXPECT_NEAR(std::sqrt(s.values().col(j).squaredNorm() / 24.0), 1.0, 1e-10);
    }
}

TEST(Standardize, ConstantColumnRejected) {
    Matrix x(3, 2);
    x << 1, 5, 2, 5, 3, 5;
    try {
        standardize(RawMatrix(x));
        FAIL() << "expected ConstantColumn";
    } catch (const ConstantColumn& e) {
        EXPECT_EQ(e.column(), 1u);
    }
}

TEST(Standardize, RejectsSingleRowAndNonFinite) {
    EXPECT_THROW(standardize(RawMatrix(Matrix::Ones(1, 2))), InvalidInput);
    Matrix x = Matrix::Random(4, 2);
    x(2, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(standardize(RawMatrix(x)), InvalidInput);
}

TEST(Correlation, IdenticalColumnsGiveOne) {
    Matrix x(4, 2);
    x << 1, 1, 3, 3, 2, 2, 7, 7;
    const auto r = correlation(standardize(RawMatrix(x)));
    EXPECT_DOUBLE_EQ(r(0, 1), 1.0);
}

TEST(Correlation, OrthogonalColumnsGiveZero) {
    Matrix x(3, 2);
    x << -1, 1 / std::sqrt(3.0), 0, -2 / std::sqrt(3.0), 1, 1 / std::sqrt(3.0);
    const auto r = correlation(standardize(RawMatrix(x)));
    EXPECT_NEAR(r(0, 1), 0.0, 1e-15);
}

TEST(Correlation, MatchesPairwisePearson) {
    std::mt19937_64 gen(11);
    const Matrix x = random_normal(50, 4, gen);
    const auto r = correlation(standardize(RawMatrix(x)));
    for (Index a = 0; a < 4; ++a)
        for (Index b = 0; b < 4; ++b) EXPECT_NEAR(r(a, b), a == b ? 1.0 : pearson(x, a, b), 1e-12);
}

TEST(Correlation, AffineInvariance) {
    std::mt19937_64 gen(12);
    const Matrix x = random_normal(30, 5, gen);
    Matrix y = x;
    for (Index j = 0; j < 5; ++j) y.col(j) = (0.3 + j) * y.col(j).array() + (j - 2.5) * 10.0;
    const auto rx = correlation(standardize(RawMatrix(x)));
    const auto ry = correlation(standardize(RawMatrix(y)));
    EXPECT_LT((rx.values() - ry.values()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CorrelationMatrix, ValidationRejectsBadInput) {
    Matrix bad = Matrix::Identity(3, 3);
    bad(0, 1) = 0.5;
    EXPECT_THROW(CorrelationMatrix{bad}, InvalidInput);  // asymmetric
    bad(1, 0) = 0.5;
    EXPECT_NO_THROW(CorrelationMatrix{bad});
    bad(2, 2) = 1.1;
    EXPECT_THROW(CorrelationMatrix{bad}, InvalidInput);  // diagonal
    Matrix indef = equicorrelation(3, 0.99);
    indef(0, 1) = indef(1, 0) = -0.99;
    EXPECT_THROW(CorrelationMatrix{indef}, InvalidInput);  // not PSD
    EXPECT_THROW(CorrelationMatrix(Matrix::Identity(2, 3)), InvalidInput);
}

TEST(SymEigen, Identity) {
    const auto e = sym_eigen(CorrelationMatrix(Matrix::Identity(4, 4)));
    for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(e.values(i), 1.0);
}

TEST(SymEigen, TwoByTwoClosedForm) {
    for (double rho : {-0.7, 0.0, 0.3, 0.9}) {
        const auto e = sym_eigen(CorrelationMatrix(equicorrelation(2, rho)));
        EXPECT_NEAR(e.values(0), 1 + std::abs(rho), 1e-12);
        EXPECT_NEAR(e.values(1), 1 - std::abs(rho), 1e-12);
    }
}

TEST(SymEigen, EquicorrelationClosedForm) {
    for (Index p : {3, 5, 12})
        for (double rho : {0.1, 0.5, 0.95}) {
            const auto e = sym_eigen(CorrelationMatrix(equicorrelation(p, rho)));
            EXPECT_NEAR(e.values(0), 1 + (p - 1) * rho, 1e-10);
            for (Index i = 1; i < p; ++i) EXPECT_NEAR(e.values(i), 1 - rho, 1e-10);
        }
}

TEST(SymEigen, EigenpairsOrthonormalAndSorted) {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto r = random_correlation(9, gen);
        const auto e = sym_eigen(r);
        for (Index i = 0; i + 1 < 9; ++i) EXPECT_GE(e.values(i), e.values(i + 1));
        EXPECT_LT((r.values() * e.vectors - e.vectors * e.values.asDiagonal()).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LT((e.vectors.transpose() * e.vectors - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_NEAR(e.values.sum(), 9.0, 1e-8);
    }
}

TEST(SymEigen, TopK) {
    const auto e = sym_eigen(CorrelationMatrix(equicorrelation(5, 0.4)), 2);
    EXPECT_EQ(e.values.size(), 2);
    EXPECT_EQ(e.vectors.cols(), 2);
    EXPECT_NEAR(e.values(0), 2.6, 1e-12);
}

TEST(SpectralNorm, Examples) {
    EXPECT_NEAR(spectral_norm(CorrelationMatrix(Matrix::Identity(3, 3))), 1.0, 1e-14);
    EXPECT_NEAR(spectral_norm(CorrelationMatrix(equicorrelation(2, 0.6))), 1.6, 1e-12);
    EXPECT_NEAR(spectral_norm(CorrelationMatrix(equicorrelation(3, 0.5))), 2.0, 1e-12);
}

TEST(SpectralNorm, BoundedByOneAndP) {
    std::mt19937_64 gen(6);
    for (int trial = 0; trial < 20; ++trial) {
        const Index p = 2 + trial % 7;
        const double s = spectral_norm(random_correlation(p, gen));
        EXPECT_GE(s, 1.0 - 1e-12);
        EXPECT_LE(s, static_cast<double>(p) + 1e-12);
    }
}

TEST(Cholesky, IdentityAndHandExample) {
    EXPECT_LT((cholesky(CorrelationMatrix(Matrix::Identity(3, 3))) - Matrix::Identity(3, 3)).norm(), 1e-15);
    Matrix expected(2, 2);
    expected << 1, 0, 0.8, 0.6;
    EXPECT_LT((cholesky(CorrelationMatrix(equicorrelation(2, 0.8))) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Cholesky, RankDeficientRejected) {
    EXPECT_THROW(cholesky(CorrelationMatrix(equicorrelation(3, 1.0))), NotPositiveDefinite);
}

TEST(Cholesky, Reconstructs) {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto r = random_correlation(8, gen);
        const Matrix l = cholesky(r);
        EXPECT_LT((l * l.transpose() - r.values()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT(l.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().cwiseAbs().maxCoeff(), 1e-300);
    }
}

TEST(BlockDetection, IdentityGivesSingletons) {
    const auto comps = is_block_diagonal_under_permutation(CorrelationMatrix(Matrix::Identity(4, 4)), 1e-12);
    ASSERT_EQ(comps.size(), 4u);
    for (Index i = 0; i < 4; ++i) EXPECT_EQ(comps[static_cast<std::size_t>(i)], Cluster{i});
}

TEST(BlockDetection, TwoDenseBlocks) {
    const auto r = CorrelationMatrix(block_equicorrelation({3, 3}, {0.5, 0.7}));
    const auto comps = is_block_diagonal_under_permutation(r, 1e-12);
    ASSERT_EQ(comps.size(), 2u);
    EXPECT_EQ(comps[0], (Cluster{0, 1, 2}));
    EXPECT_EQ(comps[1], (Cluster{3, 4, 5}));
}

TEST(BlockDetection, PermutationEquivariant) {
    std::mt19937_64 gen(8);
    const Matrix base = block_equicorrelation({2, 4, 1, 3}, {0.3, 0.6, 0.0, 0.8});
    const Partition truth = canonical(is_block_diagonal_under_permutation(CorrelationMatrix(base), 1e-12));
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Index> perm(10);
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), gen);
        // Permuted index a holds original variable perm[a].
        const auto comps = is_block_diagonal_under_permutation(CorrelationMatrix(permute(base, perm)), 1e-12);
        Partition mapped;
        for (const auto& c : comps) {
            Cluster m;
            for (Index a : c) m.push_back(perm[static_cast<std::size_t>(a)]);
            mapped.push_back(m);
        }
        EXPECT_EQ(canonical(mapped), truth);
    }
}

TEST(BlockDetection, DesignBPopulation) {
    Rng rng(99);
    const auto pop = design_b_population(60, rng);
    const auto comps = is_block_diagonal_under_permutation(pop.correlation, 1e-12);
    ASSERT_EQ(comps.size(), 20u);
    for (const auto& c : comps) EXPECT_EQ(c.size(), 3u);
}
