#pragma once

// Partitions, split records and the divisive split tree shared by HC-SVD and
// the baseline methods, plus ultrametric checks on distance matrices.

#include <hcsvd/errors.hpp>
#include <hcsvd/matrixkit.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <queue>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace hcsvd {

/// Variable indices (0-based), strictly increasing.
using Cluster = std::vector<Index>;
using Partition = std::vector<Cluster>;

enum class HeightMode { SplitDistance, Reliability, Diameter };

inline constexpr std::string_view to_string(HeightMode m) noexcept {
    switch (m) {
        case HeightMode::SplitDistance: return "split_distance";
        case HeightMode::Reliability: return "reliability";
        case HeightMode::Diameter: return "diameter";
    }
    return "?";
}

enum class SplitSource { SparseLoading, Exhaustive, Diana };

inline constexpr std::string_view to_string(SplitSource s) noexcept {
    switch (s) {
        case SplitSource::SparseLoading: return "sparse_loading";
        case SplitSource::Exhaustive: return "exhaustive";
        case SplitSource::Diana: return "diana";
    }
    return "?";
}

struct SplitRecord {
    Cluster parent;
    Cluster left;  // holds the smallest member of `parent`
    Cluster right;
    double distance = 0.0;
    double height = 0.0;
    SplitSource source = SplitSource::SparseLoading;
    Index sparsity = 0;  // degree s of the winning loading (sparse-loading source)
    Index rank = 0;      // 1-based index of the winning loading in its sequence
    Index loading_count = 0;
    std::size_t candidates_evaluated = 0;
    // Degrees s whose loading sequence stopped at a non-converging loading.
    std::size_t nonconverged_degrees = 0;
    // Index of the split of `left` / `right` in the tree, -1 for a leaf.
    std::ptrdiff_t left_child = -1;
    std::ptrdiff_t right_child = -1;
};

/// Root split first. Internal node i of the dendrogram is splits[i].
struct SplitTree {
    std::vector<SplitRecord> splits;
    Labels labels;
    HeightMode height_mode = HeightMode::SplitDistance;

    Index leaves() const noexcept { return static_cast<Index>(labels.size()); }

    std::vector<double> heights() const {
        std::vector<double> h;
        h.reserve(splits.size());
        for (const auto& s : splits) h.push_back(s.height);
        return h;
    }

    /// Every parent height is at least the heights of its child splits.
    bool monotone(double tol = 0.0) const {
        for (const auto& s : splits) {
            for (auto c : {s.left_child, s.right_child})
                if (c >= 0 && splits[static_cast<std::size_t>(c)].height > s.height + tol) return false;
        }
        return true;
    }
};

inline bool is_partition_of(const Partition& part, Index p) {
    std::vector<char> seen(static_cast<std::size_t>(p), 0);
    Index total = 0;
    for (const auto& c : part) {
        if (c.empty()) return false;
        for (Index v : c) {
            if (v < 0 || v >= p || seen[static_cast<std::size_t>(v)]) return false;
            seen[static_cast<std::size_t>(v)] = 1;
            ++total;
        }
    }
    return total == p;
}

/// Normal form: members sorted, clusters ordered by smallest member.
inline Partition canonical(Partition part) {
    for (auto& c : part) std::sort(c.begin(), c.end());
    std::sort(part.begin(), part.end());
    return part;
}

/// Cluster id per variable (ids follow the canonical cluster order, starting at 0).
inline std::vector<Index> labels_of(const Partition& part, Index p) {
    std::vector<Index> out(static_cast<std::size_t>(p), -1);
    const Partition c = canonical(part);
    for (std::size_t k = 0; k < c.size(); ++k)
        for (Index v : c[k]) out[static_cast<std::size_t>(v)] = static_cast<Index>(k);
    return out;
}

inline Partition partition_from_labels(const std::vector<Index>& labels) {
    std::map<Index, Cluster> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(static_cast<Index>(i));
    Partition out;
    for (auto& [id, members] : groups) out.push_back(std::move(members));
    return canonical(std::move(out));
}

/// Partition with k clusters, taken from the top of the tree: starting from the
/// root, repeatedly apply the pending split with the greatest height (earlier
/// splits first on equal heights). For a monotone tree this is the usual
/// horizontal dendrogram cut.
inline Partition cut_tree(const SplitTree& tree, Index k) {
    const Index p = tree.leaves();
    if (k < 1 || k > p) throw InvalidInput("cut_tree: k must lie in [1, p]");
    Partition out;
    if (tree.splits.empty()) {
        Cluster all(static_cast<std::size_t>(p));
        for (Index i = 0; i < p; ++i) all[static_cast<std::size_t>(i)] = i;
        out.push_back(std::move(all));
        return out;
    }
    using Pending = std::pair<double, std::ptrdiff_t>;
    auto later = [](const Pending& a, const Pending& b) { return a.first < b.first || (a.first == b.first && a.second > b.second); };
    std::priority_queue<Pending, std::vector<Pending>, decltype(later)> pending(later);
    pending.push({tree.splits[0].height, 0});
    std::vector<Cluster> finished;
    Index clusters = 1;
    while (clusters < k && !pending.empty()) {
        const auto [h, idx] = pending.top();
        pending.pop();
        const auto& s = tree.splits[static_cast<std::size_t>(idx)];
        ++clusters;
        for (auto [child, members] : {std::pair{s.left_child, &s.left}, std::pair{s.right_child, &s.right}}) {
            if (child >= 0)
                pending.push({tree.splits[static_cast<std::size_t>(child)].height, child});
            else
                finished.push_back(*members);
        }
    }
    while (!pending.empty()) {
        finished.push_back(tree.splits[static_cast<std::size_t>(pending.top().second)].parent);
        pending.pop();
    }
    return canonical(std::move(finished));
}

/// Assign m_kl = distance of the split that separated k and l.
inline Matrix distance_matrix_of(const SplitTree& tree) {
    const Index p = tree.leaves();
    Matrix m = Matrix::Zero(p, p);
    for (const auto& s : tree.splits)
        for (Index a : s.left)
            for (Index b : s.right) m(a, b) = m(b, a) = s.distance;
    return m;
}

struct UltrametricViolation {
    Index i, l, j;
    friend bool operator==(const UltrametricViolation&, const UltrametricViolation&) = default;
};

/// Triples (i, l, j), i < j, l ∉ {i, j}, with m_ij > max(m_il, m_lj) + tol.
/// Stops collecting after `limit` violations.
inline std::vector<UltrametricViolation> check_ultrametric(const Matrix& m, double tol,
                                                           std::size_t limit = static_cast<std::size_t>(-1)) {
    const Index p = m.rows();
    std::vector<UltrametricViolation> out;
    for (Index i = 0; i < p; ++i)
        for (Index j = i + 1; j < p; ++j)
            for (Index l = 0; l < p; ++l) {
                if (l == i || l == j) continue;
                if (m(i, j) > std::max(m(i, l), m(l, j)) + tol) {
                    out.push_back({i, l, j});
                    if (out.size() >= limit) return out;
                }
            }
    return out;
}

inline std::size_t count_ultrametric_violations(const Matrix& m, double tol) {
    const Index p = m.rows();
    std::size_t count = 0;
    for (Index i = 0; i < p; ++i)
        for (Index j = i + 1; j < p; ++j) {
            const double mij = m(i, j) - tol;
            for (Index l = 0; l < p; ++l)
                if (l != i && l != j && mij > std::max(m(i, l), m(l, j))) ++count;
        }
    return count;
}

}  // namespace hcsvd
