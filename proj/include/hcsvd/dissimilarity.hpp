#pragma once

#include <hcsvd/errors.hpp>
#include <hcsvd/matrixkit.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hcsvd {

enum class SplitDistanceKind { RV, AVERAGE, SINGLE };

inline constexpr SplitDistanceKind kAllDistanceKinds[] = {SplitDistanceKind::RV, SplitDistanceKind::AVERAGE, SplitDistanceKind::SINGLE};

inline constexpr std::string_view to_string(SplitDistanceKind k) noexcept {
    switch (k) {
        case SplitDistanceKind::RV: return "rv";
        case SplitDistanceKind::AVERAGE: return "average";
        case SplitDistanceKind::SINGLE: return "single";
    }
    return "?";
}

inline std::optional<SplitDistanceKind> parse_distance_kind(std::string_view s) noexcept {
    for (auto k : kAllDistanceKinds)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

/// Blocks of one parent correlation matrix for a bipartition: R_j, R_jj′ and R_j′.
struct ClusterPair {
    Matrix r_j;
    Matrix r_jp;
    Matrix r_jprime;

    static ClusterPair from_parent(const Matrix& r, std::span<const Index> left, std::span<const Index> right) {
        const auto a = static_cast<Index>(left.size()), b = static_cast<Index>(right.size());
        ClusterPair out{Matrix(a, a), Matrix(a, b), Matrix(b, b)};
        for (Index i = 0; i < a; ++i) {
            for (Index j = 0; j < a; ++j) out.r_j(i, j) = r(left[i], left[j]);
            for (Index j = 0; j < b; ++j) out.r_jp(i, j) = r(left[i], right[j]);
        }
        for (Index i = 0; i < b; ++i)
            for (Index j = 0; j < b; ++j) out.r_jprime(i, j) = r(right[i], right[j]);
        return out;
    }
};

inline constexpr double kCollinearityTol = 1e-12;

namespace detail {

inline void check_collinearity(double max_abs) {
    if (max_abs >= 1.0 - kCollinearityTol)
        throw CollinearityViolation("perfectly collinear variables across clusters (|r| = " + std::to_string(max_abs) + ")");
}

/// Sum of a multiset of magnitudes, taken in ascending order so the result
/// depends only on the values and not on the order they were gathered in.
inline double ordered_sum(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
}

struct CrossSummary {
    std::vector<double> magnitudes;  // |r| over the cross block
    double max_abs = 0.0;
};

inline double evaluate(SplitDistanceKind kind, CrossSummary& cross, std::vector<double>& left_sq, std::vector<double>& right_sq) {
    check_collinearity(cross.max_abs);
    const double cells = static_cast<double>(cross.magnitudes.size());
    double d = 0.0;
    switch (kind) {
        case SplitDistanceKind::RV: {
            for (double& m : cross.magnitudes) m *= m;
            const double cross_sq = ordered_sum(cross.magnitudes);
            d = 1.0 - cross_sq / (std::sqrt(ordered_sum(left_sq)) * std::sqrt(ordered_sum(right_sq)));
            break;
        }
        case SplitDistanceKind::AVERAGE: d = 1.0 - ordered_sum(cross.magnitudes) / cells; break;
        case SplitDistanceKind::SINGLE: d = 1.0 - cross.max_abs; break;
    }
    return std::clamp(d, 0.0, 1.0);
}

}  // namespace detail

/// Semidistance between the two clusters of a bipartition.
///   RV:      1 − ‖R_jj′‖²_F / (‖R_j‖_F ‖R_j′‖_F)
///   AVERAGE: 1 − Σ|r| / (p_j p_j′)   over the cross block
///   SINGLE:  1 − max |r|            over the cross block
/// Throws CollinearityViolation when any cross-block |r| reaches one.
/// Sums run over sorted terms, so swapping the clusters gives the identical value.
inline double split_distance(const ClusterPair& pair, SplitDistanceKind kind) {
    const auto& c = pair.r_jp;
    if (c.rows() < 1 || c.cols() < 1 || pair.r_j.rows() != c.rows() || pair.r_j.cols() != c.rows() || pair.r_jprime.rows() != c.cols() ||
        pair.r_jprime.cols() != c.cols())
        throw InvalidInput("split_distance: inconsistent block dimensions");
    detail::CrossSummary cross;
    cross.max_abs = c.cwiseAbs().maxCoeff();
    std::vector<double> left_sq, right_sq;
    if (kind != SplitDistanceKind::SINGLE) {
        cross.magnitudes.reserve(static_cast<std::size_t>(c.size()));
        for (Index j = 0; j < c.cols(); ++j)
            for (Index i = 0; i < c.rows(); ++i) cross.magnitudes.push_back(std::abs(c(i, j)));
    }
    if (kind == SplitDistanceKind::RV) {
        for (Index i = 0; i < pair.r_j.size(); ++i) left_sq.push_back(pair.r_j.data()[i] * pair.r_j.data()[i]);
        for (Index i = 0; i < pair.r_jprime.size(); ++i) right_sq.push_back(pair.r_jprime.data()[i] * pair.r_jprime.data()[i]);
    }
    return detail::evaluate(kind, cross, left_sq, right_sq);
}

/// Same as the ClusterPair overload, reading the blocks straight from the parent matrix.
inline double split_distance(const Matrix& r, std::span<const Index> left, std::span<const Index> right, SplitDistanceKind kind) {
    if (left.empty() || right.empty()) throw InvalidInput("split_distance: both clusters must be non-empty");
    detail::CrossSummary cross;
    const bool gather = kind != SplitDistanceKind::SINGLE;
    if (gather) cross.magnitudes.reserve(left.size() * right.size());
    for (Index i : left) {
        for (Index j : right) {
            const double a = std::abs(r(i, j));
            cross.max_abs = std::max(cross.max_abs, a);
            if (gather) cross.magnitudes.push_back(a);
        }
    }
    std::vector<double> left_sq, right_sq;
    if (kind == SplitDistanceKind::RV) {
        left_sq.reserve(left.size() * left.size());
        right_sq.reserve(right.size() * right.size());
        for (Index i : left)
            for (Index j : left) left_sq.push_back(r(i, j) * r(i, j));
        for (Index i : right)
            for (Index j : right) right_sq.push_back(r(i, j) * r(i, j));
    }
    return detail::evaluate(kind, cross, left_sq, right_sq);
}

/// d_jj = 0; otherwise split_distance.
inline double cluster_distance(const Matrix& r, std::span<const Index> a, std::span<const Index> b, SplitDistanceKind kind) {
    if (std::ranges::equal(a, b)) return 0.0;
    return split_distance(r, a, b, kind);
}

/// 1 − λ₁(R_i)/p_i: low values mean strong common variance inside the cluster.
inline double reliability_height(const CorrelationMatrix& r_i) {
    const Index p = r_i.size();
    if (p < 1) throw InvalidInput("reliability_height: empty cluster");
    return 1.0 - spectral_norm(r_i) / static_cast<double>(p);
}

}  // namespace hcsvd
