#pragma once

// HC-SVD: divisive variable clustering in which the candidate bipartitions of a
// cluster are the supports of its sparse loadings, one candidate per
// (degree of sparsity, loading rank) pair, and the cluster is split along the
// candidate with the greatest between-cluster semidistance.

#include <hcsvd/dissimilarity.hpp>
#include <hcsvd/errors.hpp>
#include <hcsvd/matrixkit.hpp>
#include <hcsvd/parallel.hpp>
#include <hcsvd/sparse_loadings.hpp>
#include <hcsvd/tree.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hcsvd {

struct LoadingPolicy {
    enum class Kind { Kaiser, Fixed, All };
    Kind kind = Kind::Kaiser;
    Index k = 0;

    static LoadingPolicy kaiser() { return {Kind::Kaiser, 0}; }
    static LoadingPolicy fixed(Index k) { return {Kind::Fixed, k}; }
    static LoadingPolicy all() { return {Kind::All, 0}; }

    std::string describe() const {
        switch (kind) {
            case Kind::Kaiser: return "kaiser";
            case Kind::All: return "all";
            case Kind::Fixed: return std::to_string(k);
        }
        return "?";
    }
};

/// Eigenvalues within this distance below one still count towards the Kaiser number.
inline constexpr double kKaiserTol = 1e-10;

/// Number of sparse loadings per degree of sparsity, from descending eigenvalues of R_i.
inline Index loading_count(const Vector& eigenvalues_desc, LoadingPolicy policy) {
    const Index p = eigenvalues_desc.size();
    switch (policy.kind) {
        case LoadingPolicy::Kind::All: return p;
        case LoadingPolicy::Kind::Fixed:
            if (policy.k < 1) throw InvalidInput("loading_count: fixed count must be positive");
            return std::min(policy.k, p);
        case LoadingPolicy::Kind::Kaiser: {
            Index k = 0;
            for (Index i = 0; i < p; ++i)
                if (eigenvalues_desc(i) >= 1.0 - kKaiserTol) ++k;
            return std::max<Index>(k, 1);
        }
    }
    return 1;
}

inline Index loading_count(const CorrelationMatrix& r_i, LoadingPolicy policy) {
    if (policy.kind != LoadingPolicy::Kind::Kaiser) return loading_count(Vector::Zero(r_i.size()), policy);
    return loading_count(sym_eigenvalues(r_i.values()), policy);
}

/// Bipartition of a cluster in local indices. `left` contains 0.
struct Bipartition {
    Cluster left;
    Cluster right;
    SplitSource source = SplitSource::SparseLoading;
    Index sparsity = 0;
    Index rank = 0;
};

inline Bipartition make_bipartition(const std::vector<char>& in_support, SplitSource source, Index s = 0, Index rank = 0) {
    Bipartition b{{}, {}, source, s, rank};
    const bool flip = !in_support.empty() && !in_support[0];
    for (std::size_t i = 0; i < in_support.size(); ++i) ((in_support[i] != 0) != flip ? b.left : b.right).push_back(static_cast<Index>(i));
    return b;
}

/// All 2^(p_i−1) − 1 bipartitions of {0..p_i−1}.
inline std::vector<Bipartition> exhaustive_splits(Index p_i, Index threshold = 6) {
    if (p_i < 2) throw InvalidInput("exhaustive_splits: need at least two variables");
    if (p_i > threshold) throw ThresholdExceeded("exhaustive_splits: " + std::to_string(p_i) + " variables exceed the threshold " + std::to_string(threshold));
    if (p_i > 62) throw ThresholdExceeded("exhaustive_splits: too many variables to enumerate");
    const std::uint64_t count = (std::uint64_t{1} << (p_i - 1)) - 1;
    std::vector<Bipartition> out;
    out.reserve(count);
    std::vector<char> in_left(static_cast<std::size_t>(p_i));
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        in_left[0] = 1;
        for (Index i = 1; i < p_i; ++i) in_left[static_cast<std::size_t>(i)] = (mask >> (i - 1)) & 1u ? 1 : 0;
        out.push_back(make_bipartition(in_left, SplitSource::Exhaustive));
    }
    return out;
}

/// Unique bipartitions proposed by the first k_i sparse loadings of every
/// degree s = 1..p_i−1 of the Gram matrix. Candidates are listed in order of
/// first appearance over (s, rank). `starts` warm-starts the dense
/// initialization of each rank. A sequence that reaches a non-converging
/// loading keeps the loadings before it; `nonconverged` receives the number
/// of degrees cut short that way.
inline std::vector<Bipartition> candidate_splits_gram(const Matrix& gram, Index k_i, const Matrix* starts = nullptr, unsigned threads = 1,
                                                      const SparseOptions& opt = {}, std::size_t* nonconverged = nullptr) {
    const Index p_i = gram.rows();
    if (p_i < 2) throw InvalidInput("candidate_splits: need at least two variables");
    k_i = std::clamp<Index>(k_i, 1, p_i);

    std::vector<std::vector<Bipartition>> per_degree(static_cast<std::size_t>(p_i - 1));
    std::vector<char> cut_short(per_degree.size(), 0);
    SparseOptions tolerant = opt;
    tolerant.stop_on_nonconvergence = true;
    parallel_for(per_degree.size(), threads, [&](std::size_t slot) {
        const Index s = static_cast<Index>(slot) + 1;
        const auto seq = sparse_loading_sequence_gram(gram, k_i, s, starts, tolerant);
        cut_short[slot] = seq.nonconverged;
        auto& out = per_degree[slot];
        std::vector<char> in_support(static_cast<std::size_t>(p_i));
        for (std::size_t r = 0; r < seq.loadings.size(); ++r) {
            const auto& support = seq.loadings[r].support;
            if (support.empty() || static_cast<Index>(support.size()) >= p_i) continue;
            std::fill(in_support.begin(), in_support.end(), 0);
            for (Index i : support) in_support[static_cast<std::size_t>(i)] = 1;
            out.push_back(make_bipartition(in_support, SplitSource::SparseLoading, s, static_cast<Index>(r) + 1));
        }
    });

    if (nonconverged != nullptr) *nonconverged = static_cast<std::size_t>(std::count(cut_short.begin(), cut_short.end(), 1));
    std::vector<Bipartition> out;
    std::set<Cluster> seen;
    for (auto& group : per_degree)
        for (auto& b : group)
            if (seen.insert(b.left).second) out.push_back(std::move(b));
    return out;
}

/// Candidates for a standardized data matrix of one cluster (n×p_i).
inline std::vector<Bipartition> candidate_splits(const Matrix& x_i, Index k_i, unsigned threads = 1, const SparseOptions& opt = {}) {
    return candidate_splits_gram(gram_of(x_i), k_i, nullptr, threads, opt);
}

enum class InputKind { Data, Correlation };

enum class Schedule { Fifo, Lifo };

struct HcsvdOptions {
    SplitDistanceKind kind = SplitDistanceKind::SINGLE;
    LoadingPolicy policy = LoadingPolicy::kaiser();
    HeightMode height_mode = HeightMode::SplitDistance;
    /// Clusters with at most this many variables are split by full enumeration.
    Index exhaustive_threshold = 6;
    unsigned threads = 1;
    Schedule schedule = Schedule::Fifo;
    SparseOptions sparse{};
};

/// Hard cap for enumerating every bipartition (2^13 per split).
inline constexpr Index kBruteForceCap = 14;

/// True when `a` should be preferred over `b` at equal distance:
/// the more balanced split first, then the lexicographically smaller left side.
inline bool better_tie(const Cluster& a_left, const Cluster& a_right, const Cluster& b_left, const Cluster& b_right) {
    const auto a_min = std::min(a_left.size(), a_right.size());
    const auto b_min = std::min(b_left.size(), b_right.size());
    if (a_min != b_min) return a_min > b_min;
    return a_left < b_left;
}

namespace detail {

struct Scored {
    std::size_t index;
    double distance;
};

/// Argmax over the full candidate list with the deterministic tie rule.
inline std::optional<Scored> best_candidate(const Matrix& r_i, const std::vector<Bipartition>& cands, SplitDistanceKind kind,
                                            unsigned threads) {
    if (cands.empty()) return std::nullopt;
    std::vector<double> dist(cands.size());
    parallel_for(cands.size(), threads, [&](std::size_t c) { dist[c] = split_distance(r_i, cands[c].left, cands[c].right, kind); });
    Scored best{0, dist[0]};
    for (std::size_t c = 1; c < cands.size(); ++c) {
        if (dist[c] > best.distance ||
            (dist[c] == best.distance && better_tie(cands[c].left, cands[c].right, cands[best.index].left, cands[best.index].right)))
            best = {c, dist[c]};
    }
    return best;
}

inline Cluster to_global(const Cluster& local, const Cluster& members) {
    Cluster out;
    out.reserve(local.size());
    for (Index i : local) out.push_back(members[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace detail

/// Correlation matrix of the whole problem plus how the sparse loadings see it.
struct SplitContext {
    const CorrelationMatrix& r;
    InputKind input = InputKind::Correlation;
    /// n − 1 for data input: X_iᵀX_i = (n − 1) R_i for standardized columns.
    double gram_scale = 1.0;
};

/// Split one cluster (global, increasing indices) into the best candidate pair.
inline SplitRecord split_cluster(const SplitContext& ctx, const Cluster& members, const HcsvdOptions& opt) {
    const Index p_i = static_cast<Index>(members.size());
    if (p_i < 2) throw InvalidInput("split_cluster: cluster needs at least two variables");
    const CorrelationMatrix r_sub = ctx.r.principal_submatrix(members);
    const Matrix& r_i = r_sub.values();

    SplitRecord rec;
    rec.parent = members;
    std::vector<Bipartition> cands;
    std::optional<EigenDecomposition> eig;
    const bool enumerate = p_i <= opt.exhaustive_threshold;
    if (enumerate) {
        rec.loading_count = loading_count(sym_eigenvalues(r_i), opt.policy);
        cands = exhaustive_splits(p_i, opt.exhaustive_threshold);
    } else {
        eig = sym_eigen(r_i);
        rec.loading_count = loading_count(eig->values, opt.policy);
        const Matrix gram = ctx.input == InputKind::Data ? Matrix(ctx.gram_scale * r_i) : Matrix(r_i * r_i);
        const Matrix starts = eig->vectors.leftCols(rec.loading_count);
        cands = candidate_splits_gram(gram, rec.loading_count, &starts, opt.threads, opt.sparse, &rec.nonconverged_degrees);
    }

    auto best = detail::best_candidate(r_i, cands, opt.kind, opt.threads);
    if (!best) {
        if (p_i > kBruteForceCap) throw NoValidCandidate("split_cluster: no usable sparse-loading candidate for a cluster of " + std::to_string(p_i));
        cands = exhaustive_splits(p_i, kBruteForceCap);
        best = detail::best_candidate(r_i, cands, opt.kind, opt.threads);
    }
    const auto& win = cands[best->index];
    rec.candidates_evaluated = cands.size();
    rec.left = detail::to_global(win.left, members);
    rec.right = detail::to_global(win.right, members);
    rec.distance = best->distance;
    rec.source = win.source;
    rec.sparsity = win.sparsity;
    rec.rank = win.rank;
    if (opt.height_mode == HeightMode::Reliability) {
        const double lambda1 = eig ? eig->values(0) : sym_eigenvalues(r_i)(0);
        rec.height = 1.0 - lambda1 / static_cast<double>(p_i);
    } else {
        rec.height = rec.distance;
    }
    return rec;
}

struct HcsvdDiagnostics {
    std::size_t ultrametric_violations = 0;
    bool monotone = true;
    std::size_t nonconverged_degrees = 0;  // summed over splits
};

struct HcsvdResult {
    SplitTree tree;
    Matrix distances;  // ultrametric distance matrix M
    HcsvdDiagnostics diagnostics;
};

/// Tolerance used for the ultrametric diagnostic attached to every result.
inline constexpr double kUltrametricTol = 1e-12;

namespace detail {

inline HcsvdResult divide(const SplitContext& ctx, const HcsvdOptions& opt) {
    const Index p = ctx.r.size();
    if (p < 2) throw InvalidInput("hcsvd: need at least two variables");

    HcsvdResult out;
    out.tree.labels = ctx.r.labels();
    out.tree.height_mode = opt.height_mode;
    out.distances = Matrix::Zero(p, p);

    struct Pending {
        Cluster members;
        std::ptrdiff_t parent;
        bool is_left;
    };
    std::deque<Pending> queue;
    Cluster all(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) all[static_cast<std::size_t>(i)] = i;
    queue.push_back({std::move(all), -1, false});

    while (!queue.empty()) {
        Pending item;
        if (opt.schedule == Schedule::Fifo) {
            item = std::move(queue.front());
            queue.pop_front();
        } else {
            item = std::move(queue.back());
            queue.pop_back();
        }
        SplitRecord rec = split_cluster(ctx, item.members, opt);
        for (Index a : rec.left)
            for (Index b : rec.right) out.distances(a, b) = out.distances(b, a) = rec.distance;

        const auto idx = static_cast<std::ptrdiff_t>(out.tree.splits.size());
        if (item.parent >= 0) {
            auto& parent = out.tree.splits[static_cast<std::size_t>(item.parent)];
            (item.is_left ? parent.left_child : parent.right_child) = idx;
        }
        if (rec.left.size() > 1) queue.push_back({rec.left, idx, true});
        if (rec.right.size() > 1) queue.push_back({rec.right, idx, false});
        out.tree.splits.push_back(std::move(rec));
    }

    out.diagnostics.ultrametric_violations = count_ultrametric_violations(out.distances, kUltrametricTol);
    out.diagnostics.monotone = out.tree.monotone();
    for (const auto& s : out.tree.splits) out.diagnostics.nonconverged_degrees += s.nonconverged_degrees;
    return out;
}

}  // namespace detail

/// HC-SVD on standardized data.
inline HcsvdResult run_hcsvd(const StandardizedMatrix& x, const HcsvdOptions& opt = {}) {
    const CorrelationMatrix r = correlation(x);
    return detail::divide({r, InputKind::Data, static_cast<double>(x.rows() - 1)}, opt);
}

/// HC-SVD when only the correlation matrix is known; R stands in for the data matrix.
inline HcsvdResult run_hcsvd(const CorrelationMatrix& r, const HcsvdOptions& opt = {}) {
    return detail::divide({r, InputKind::Correlation, 1.0}, opt);
}

}  // namespace hcsvd
