#pragma once

// Reference methods: DIANA on 1 − |r| dissimilarities, and the full-enumeration
// divisive hierarchy used as an exact oracle for small problems.

#include <hcsvd/dissimilarity.hpp>
#include <hcsvd/errors.hpp>
#include <hcsvd/matrixkit.hpp>
#include <hcsvd/tree.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace hcsvd {

/// d_ij = 1 − |r_ij|.
class VariableDistanceMatrix {
public:
    explicit VariableDistanceMatrix(Matrix d, Labels labels = {}) : values_(std::move(d)), labels_(std::move(labels)) {
        const Index p = values_.rows();
        if (values_.cols() != p || p < 1) throw InvalidInput("distance matrix must be square and non-empty");
        if (labels_.empty()) labels_ = default_labels(p);
        for (Index i = 0; i < p; ++i) {
            if (values_(i, i) != 0.0) throw InvalidInput("distance matrix must have a zero diagonal");
            for (Index j = 0; j < i; ++j) {
                if (values_(i, j) != values_(j, i)) throw InvalidInput("distance matrix must be symmetric");
                if (values_(i, j) < 0.0 || values_(i, j) > 1.0) throw InvalidInput("distance entries must lie in [0, 1]");
            }
        }
    }

    static VariableDistanceMatrix from_correlation(const CorrelationMatrix& r) {
        Matrix d = (1.0 - r.values().array().abs()).matrix();
        d.diagonal().setZero();
        d = d.cwiseMax(0.0).cwiseMin(1.0);
        d = (0.5 * (d + d.transpose())).eval();
        return VariableDistanceMatrix(std::move(d), r.labels());
    }

    const Matrix& values() const noexcept { return values_; }
    const Labels& labels() const noexcept { return labels_; }
    Index size() const noexcept { return values_.rows(); }

private:
    Matrix values_;
    Labels labels_;
};

namespace detail {

inline double diameter(const Matrix& d, const Cluster& c) {
    double out = 0.0;
    for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = a + 1; b < c.size(); ++b) out = std::max(out, d(c[a], c[b]));
    return out;
}

/// One DIANA split of cluster c: returns the splinter group.
inline Cluster diana_splinter(const Matrix& d, const Cluster& c) {
    const std::size_t m = c.size();
    std::vector<double> to_rest(m, 0.0), to_splinter(m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) to_rest[a] += d(c[a], c[b]);

    std::vector<char> moved(m, 0);
    std::size_t rest = m, splinter = 0;
    auto move = [&](std::size_t a) {
        moved[a] = 1;
        --rest;
        ++splinter;
        for (std::size_t b = 0; b < m; ++b) {
            to_rest[b] -= d(c[b], c[a]);
            to_splinter[b] += d(c[b], c[a]);
        }
    };

    // Seed: largest average dissimilarity to the rest of the cluster.
    std::size_t seed = 0;
    for (std::size_t a = 1; a < m; ++a)
        if (to_rest[a] > to_rest[seed]) seed = a;
    move(seed);

    while (rest > 1) {
        std::size_t best = m;
        double best_gain = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
            if (moved[a]) continue;
            const double gain = to_rest[a] / static_cast<double>(rest - 1) - to_splinter[a] / static_cast<double>(splinter);
            if (gain > best_gain) {
                best_gain = gain;
                best = a;
            }
        }
        if (best == m) break;
        move(best);
    }

    Cluster out;
    for (std::size_t a = 0; a < m; ++a)
        if (moved[a]) out.push_back(c[a]);
    return out;
}

}  // namespace detail

/// Divisive analysis: split the cluster of largest diameter (smallest first
/// member on ties) by growing a splinter group from its most dissimilar object
/// while some object is closer on average to the splinter than to the rest.
/// Heights and split distances are the diameters of the split clusters.
inline SplitTree diana(const VariableDistanceMatrix& dist) {
    const Matrix& d = dist.values();
    const Index p = dist.size();
    SplitTree tree;
    tree.labels = dist.labels();
    tree.height_mode = HeightMode::Diameter;

    struct Open {
        Cluster members;
        double diameter;
        std::ptrdiff_t parent;
        bool is_left;
    };
    std::vector<Open> open;
    Cluster all(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) all[static_cast<std::size_t>(i)] = i;
    if (p > 1) open.push_back({all, detail::diameter(d, all), -1, false});

    while (!open.empty()) {
        std::size_t pick = 0;
        for (std::size_t c = 1; c < open.size(); ++c) {
            if (open[c].diameter > open[pick].diameter ||
                (open[c].diameter == open[pick].diameter && open[c].members.front() < open[pick].members.front()))
                pick = c;
        }
        Open item = std::move(open[pick]);
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));

        Cluster splinter = detail::diana_splinter(d, item.members);
        Cluster remainder;
        std::set_difference(item.members.begin(), item.members.end(), splinter.begin(), splinter.end(), std::back_inserter(remainder));

        SplitRecord rec;
        rec.parent = item.members;
        const bool splinter_first = splinter.front() < remainder.front();
        rec.left = splinter_first ? splinter : remainder;
        rec.right = splinter_first ? remainder : splinter;
        rec.distance = item.diameter;
        rec.height = item.diameter;
        rec.source = SplitSource::Diana;
        rec.candidates_evaluated = 1;

        const auto idx = static_cast<std::ptrdiff_t>(tree.splits.size());
        if (item.parent >= 0) {
            auto& parent = tree.splits[static_cast<std::size_t>(item.parent)];
            (item.is_left ? parent.left_child : parent.right_child) = idx;
        }
        if (rec.left.size() > 1) open.push_back({rec.left, detail::diameter(d, rec.left), idx, true});
        if (rec.right.size() > 1) open.push_back({rec.right, detail::diameter(d, rec.right), idx, false});
        tree.splits.push_back(std::move(rec));
    }
    return tree;
}

/// Divisive hierarchy in which every cluster is split along its best
/// bipartition among all 2^(p_i−1) − 1. Clusters are processed first in,
/// first out; equal distances prefer the more balanced split, then the
/// lexicographically smaller left side. Exponential: capped at 14 variables.
inline SplitTree brute_force_hierarchy(const CorrelationMatrix& r, SplitDistanceKind kind) {
    const Index p = r.size();
    if (p > 14) throw TooLarge("brute_force_hierarchy: " + std::to_string(p) + " variables exceed the cap of 14");
    if (p < 2) throw InvalidInput("brute_force_hierarchy: need at least two variables");

    SplitTree tree;
    tree.labels = r.labels();
    tree.height_mode = HeightMode::SplitDistance;

    struct Pending {
        Cluster members;
        std::ptrdiff_t parent;
        bool is_left;
    };
    std::deque<Pending> queue;
    Cluster all(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) all[static_cast<std::size_t>(i)] = i;
    queue.push_back({all, -1, false});

    while (!queue.empty()) {
        Pending item = std::move(queue.front());
        queue.pop_front();
        const auto& c = item.members;
        const auto m = c.size();

        SplitRecord best;
        bool have = false;
        const std::uint64_t masks = std::uint64_t{1} << (m - 1);
        for (std::uint64_t mask = 0; mask + 1 < masks; ++mask) {
            Cluster left{c[0]}, right;
            for (std::size_t i = 1; i < m; ++i) ((mask >> (i - 1)) & 1u ? left : right).push_back(c[i]);
            const double dist = split_distance(ClusterPair::from_parent(r.values(), left, right), kind);
            const auto lo = std::min(left.size(), right.size());
            const auto best_lo = have ? std::min(best.left.size(), best.right.size()) : 0;
            if (!have || dist > best.distance || (dist == best.distance && (lo > best_lo || (lo == best_lo && left < best.left)))) {
                best.left = std::move(left);
                best.right = std::move(right);
                best.distance = dist;
                have = true;
            }
        }
        best.parent = c;
        best.height = best.distance;
        best.source = SplitSource::Exhaustive;
        best.candidates_evaluated = masks - 1;

        const auto idx = static_cast<std::ptrdiff_t>(tree.splits.size());
        if (item.parent >= 0) {
            auto& parent = tree.splits[static_cast<std::size_t>(item.parent)];
            (item.is_left ? parent.left_child : parent.right_child) = idx;
        }
        if (best.left.size() > 1) queue.push_back({best.left, idx, true});
        if (best.right.size() > 1) queue.push_back({best.right, idx, false});
        tree.splits.push_back(std::move(best));
    }
    return tree;
}

}  // namespace hcsvd
