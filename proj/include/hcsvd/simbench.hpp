#pragma once

// Simulation designs with known hierarchical structure, multivariate normal
// sampling, the adjusted Rand index and a seeded benchmark driver.

#include <hcsvd/baselines.hpp>
#include <hcsvd/divisive.hpp>
#include <hcsvd/errors.hpp>
#include <hcsvd/matrixkit.hpp>
#include <hcsvd/parallel.hpp>
#include <hcsvd/tree.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace hcsvd {

// ---------------------------------------------------------------------------
// Random numbers

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// mt19937_64 with portable transforms (53-bit uniforms, Box–Muller normals),
/// so a seed yields the same numbers with any standard library.
class Rng {
public:
    static constexpr const char* kIdentifier = "mt19937_64/splitmix64-substreams/box-muller";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for replication `index` of a run seeded with `seed`.
    static Rng substream(std::uint64_t seed, std::uint64_t index) { return Rng(splitmix64(splitmix64(seed) ^ splitmix64(index + 1))); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (spare_) {
            const double out = *spare_;
            spare_.reset();
            return out;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

// ---------------------------------------------------------------------------
// Designs

enum class Design { A, B };

inline constexpr std::string_view to_string(Design d) noexcept { return d == Design::A ? "a" : "b"; }

/// Known partitions of a population, keyed by cluster count.
struct GroundTruth {
    std::vector<std::pair<Index, Partition>> levels;

    std::vector<Index> counts() const {
        std::vector<Index> out;
        for (const auto& [k, part] : levels) out.push_back(k);
        return out;
    }
    const Partition& at(Index k) const {
        for (const auto& [count, part] : levels)
            if (count == k) return part;
        throw InvalidInput("ground truth has no partition with " + std::to_string(k) + " clusters");
    }
};

struct Population {
    CorrelationMatrix correlation;
    GroundTruth truth;
};

inline constexpr Index kDesignABlock = 20;
inline constexpr Index kDesignASubgroup = 4;
inline constexpr double kDesignAWithin = 0.95;

inline void validate_design(Design design, Index p) {
    if (design == Design::A && (p < 100 || p % 100 != 0)) throw InvalidInput("design a needs p to be a positive multiple of 100");
    if (design == Design::B && (p < 3 || p % 3 != 0)) throw InvalidInput("design b needs p to be a positive multiple of 3");
}

/// Blocks of 20 variables, each made of five subgroups of four. Inside a
/// subgroup the correlation is 0.95; between subgroups a < b it is the step of
/// the deeper subgroup b (0.8, 0.6, 0.4, 0.2 for b = 2..5) plus a uniform
/// perturbation in (−0.05, 0.05), drawn once per block and step. Subgroup 5
/// separates first, then 4, then 3.
inline Population design_a_population(Index p, Rng& rng) {
    validate_design(Design::A, p);
    const Index blocks = p / kDesignABlock;
    const Index groups = kDesignABlock / kDesignASubgroup;
    for (int attempt = 0; attempt < 100; ++attempt) {
        Matrix r = Matrix::Identity(p, p);
        for (Index blk = 0; blk < blocks; ++blk) {
            // step(b) for deeper subgroup b = 1..4 (0-based); index 0 unused.
            double step[5] = {0, 0, 0, 0, 0};
            double eta[4];
            for (double& e : eta) e = rng.uniform(-0.05, 0.05);
            for (Index b = 1; b < groups; ++b) {
                const int m = static_cast<int>(groups - b);  // step 0.2·m
                step[b] = 0.2 * m + eta[m - 1];
            }
            const Index base = blk * kDesignABlock;
            for (Index i = 0; i < kDesignABlock; ++i)
                for (Index j = 0; j < kDesignABlock; ++j) {
                    if (i == j) continue;
                    const Index gi = i / kDesignASubgroup, gj = j / kDesignASubgroup;
                    r(base + i, base + j) = gi == gj ? kDesignAWithin : step[std::max(gi, gj)];
                }
        }
        try {
            (void)cholesky(r);
        } catch (const NotPositiveDefinite&) {
            continue;
        }

        GroundTruth truth;
        // Level t keeps subgroups 0..(4 − t) together and splits the deeper ones off singly.
        for (Index level = 0; level < 4; ++level) {
            Partition part;
            const Index merged_upto = groups - 1 - level;  // subgroups [0, merged_upto] stay together
            for (Index blk = 0; blk < blocks; ++blk) {
                const Index base = blk * kDesignABlock;
                Cluster head;
                for (Index v = 0; v < (merged_upto + 1) * kDesignASubgroup; ++v) head.push_back(base + v);
                part.push_back(std::move(head));
                for (Index g = merged_upto + 1; g < groups; ++g) {
                    Cluster c;
                    for (Index v = 0; v < kDesignASubgroup; ++v) c.push_back(base + g * kDesignASubgroup + v);
                    part.push_back(std::move(c));
                }
            }
            truth.levels.emplace_back(blocks * (level + 1), canonical(std::move(part)));
        }
        return {CorrelationMatrix::trusted(std::move(r)), std::move(truth)};
    }
    throw DesignInfeasible("design a: no positive definite population after 100 draws");
}

/// The 3×3 block of design b for parameter eta: ρ_ij = (−1)^j η^((j−1)²), i < j.
inline Matrix design_b_block(double eta) {
    Matrix b = Matrix::Identity(3, 3);
    for (int j = 2; j <= 3; ++j)
        for (int i = 1; i < j; ++i) {
            const double v = (j % 2 == 0 ? 1.0 : -1.0) * std::pow(eta, (j - 1) * (j - 1));
            b(i - 1, j - 1) = b(j - 1, i - 1) = v;
        }
    return b;
}

/// p/3 blocks of three variables with η_l ~ U(0.8, 0.9) per block.
inline Population design_b_population(Index p, Rng& rng) {
    validate_design(Design::B, p);
    const Index blocks = p / 3;
    Matrix r = Matrix::Identity(p, p);
    Partition coarse, fine;
    for (Index l = 0; l < blocks; ++l) {
        const Matrix block = design_b_block(rng.uniform(0.8, 0.9));
        r.block(3 * l, 3 * l, 3, 3) = block;
        coarse.push_back({3 * l, 3 * l + 1, 3 * l + 2});
        fine.push_back({3 * l, 3 * l + 1});
        fine.push_back({3 * l + 2});
    }
    (void)cholesky(r);  // positive definite for every η in (0.8, 0.9)
    GroundTruth truth;
    truth.levels.emplace_back(blocks, canonical(std::move(coarse)));
    truth.levels.emplace_back(2 * blocks, canonical(std::move(fine)));
    return {CorrelationMatrix::trusted(std::move(r)), std::move(truth)};
}

inline Population design_population(Design d, Index p, Rng& rng) {
    return d == Design::A ? design_a_population(p, rng) : design_b_population(p, rng);
}

/// n draws from N(0, pop): rows Z Lᵀ with pop = L Lᵀ. Normals are consumed row by row.
inline RawMatrix sample_mvn(const CorrelationMatrix& pop, Index n, Rng& rng) {
    if (n < 1) throw InvalidInput("sample_mvn: need at least one observation");
    const Matrix l = cholesky(pop);
    const Index p = pop.size();
    Matrix z(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
    Matrix x = z * l.transpose();
    return RawMatrix(std::move(x), pop.labels());
}

// ---------------------------------------------------------------------------
// Adjusted Rand index

/// Hubert–Arabie adjusted Rand index. When the chance-corrected denominator
/// vanishes the result is 1 for identical partitions and 0 otherwise.
inline double adjusted_rand_index(const Partition& a, const Partition& b) {
    Index p = 0;
    for (const auto& c : a) p += static_cast<Index>(c.size());
    if (!is_partition_of(a, p) || !is_partition_of(b, p)) throw InvalidInput("adjusted_rand_index: partitions must cover the same items");

    const auto la = labels_of(a, p), lb = labels_of(b, p);
    std::map<std::pair<Index, Index>, double> table;
    for (Index i = 0; i < p; ++i) table[{la[static_cast<std::size_t>(i)], lb[static_cast<std::size_t>(i)]}] += 1.0;
    const auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };

    double sum_ij = 0;
    for (const auto& [key, count] : table) sum_ij += choose2(count);
    double sum_a = 0, sum_b = 0;
    for (const auto& c : a) sum_a += choose2(static_cast<double>(c.size()));
    for (const auto& c : b) sum_b += choose2(static_cast<double>(c.size()));

    const double total = choose2(static_cast<double>(p));
    const bool identical = canonical(a) == canonical(b);
    if (total <= 0) return identical ? 1.0 : 0.0;
    const double expected = sum_a * sum_b / total;
    const double denom = 0.5 * (sum_a + sum_b) - expected;
    if (denom == 0.0) return identical ? 1.0 : 0.0;
    return (sum_ij - expected) / denom;
}

// ---------------------------------------------------------------------------
// Benchmark driver

struct DesignSpec {
    Design design = Design::B;
    Index p = 60;
    std::optional<Index> n;  // empty: feed the population matrix directly
    std::uint64_t seed = 1;
    Index replications = 1;

    void validate() const {
        validate_design(design, p);
        if (n && *n < 2) throw InvalidInput("benchmark needs n >= 2");
        if (replications < 1) throw InvalidInput("benchmark needs at least one replication");
    }
};

enum class Method { Hcsvd, Diana };

inline constexpr std::string_view to_string(Method m) noexcept { return m == Method::Hcsvd ? "hcsvd" : "diana"; }

struct BenchOptions {
    std::vector<Method> methods{Method::Hcsvd, Method::Diana};
    std::vector<SplitDistanceKind> kinds{kAllDistanceKinds[0], kAllDistanceKinds[1], kAllDistanceKinds[2]};
    HcsvdOptions hcsvd{};
    unsigned threads = 1;
};

/// One clustering run within a replication. DIANA carries no distance kind.
struct BenchRun {
    Index replication = 0;
    Method method = Method::Hcsvd;
    std::optional<SplitDistanceKind> kind;
    std::vector<std::pair<Index, double>> ari;  // (cut_k, ARI)
    double seconds = 0.0;
    std::string error;
};

struct BenchCell {
    Method method;
    std::optional<SplitDistanceKind> kind;
    Index cut_k;
    std::vector<double> ari;
    double mean = 0.0;
    double sd = 0.0;
    double mean_seconds = 0.0;
};

struct BenchResult {
    DesignSpec spec;
    std::vector<BenchRun> runs;  // replication-major, then method/kind in option order
    std::vector<BenchCell> cells;
    std::size_t failures = 0;

    const BenchCell& cell(Method m, std::optional<SplitDistanceKind> kind, Index k) const {
        for (const auto& c : cells)
            if (c.method == m && c.kind == kind && c.cut_k == k) return c;
        throw InvalidInput("benchmark has no such cell");
    }
};

inline std::string method_label(Method m, std::optional<SplitDistanceKind> kind) {
    std::string out(to_string(m));
    if (kind) (out += "_") += to_string(*kind);
    return out;
}

namespace detail {

template <class Fn>
double timed(Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline std::vector<BenchRun> run_replication(const DesignSpec& spec, const BenchOptions& opt, Index rep) {
    Rng rng = Rng::substream(spec.seed, static_cast<std::uint64_t>(rep));
    const Population pop = design_population(spec.design, spec.p, rng);
    std::optional<StandardizedMatrix> data;
    std::optional<CorrelationMatrix> sample_r;
    if (spec.n) {
        data = standardize(sample_mvn(pop.correlation, *spec.n, rng));
        sample_r = correlation(*data);
    }
    const CorrelationMatrix& r = sample_r ? *sample_r : pop.correlation;

    std::vector<BenchRun> out;
    auto score = [&](BenchRun& run, const SplitTree& tree) {
        for (const auto& [k, truth] : pop.truth.levels) run.ari.emplace_back(k, adjusted_rand_index(cut_tree(tree, k), truth));
    };
    for (Method m : opt.methods) {
        if (m == Method::Hcsvd) {
            for (auto kind : opt.kinds) {
                BenchRun run{rep, m, kind, {}, 0.0, {}};
                HcsvdOptions h = opt.hcsvd;
                h.kind = kind;
                h.threads = 1;
                try {
                    std::optional<HcsvdResult> res;
                    run.seconds = timed([&] { res = data ? run_hcsvd(*data, h) : run_hcsvd(pop.correlation, h); });
                    score(run, res->tree);
                } catch (const std::exception& e) {
                    run.error = e.what();
                    run.ari.clear();
                }
                out.push_back(std::move(run));
            }
        } else {
            BenchRun run{rep, m, std::nullopt, {}, 0.0, {}};
            try {
                std::optional<SplitTree> tree;
                run.seconds = timed([&] { tree = diana(VariableDistanceMatrix::from_correlation(r)); });
                score(run, *tree);
            } catch (const std::exception& e) {
                run.error = e.what();
                run.ari.clear();
            }
            out.push_back(std::move(run));
        }
    }
    return out;
}

}  // namespace detail

/// Every replication draws a fresh population and sample from its own
/// substream of `spec.seed`, so results do not depend on `threads`.
inline BenchResult run_benchmark(const DesignSpec& spec, const BenchOptions& opt = {}) {
    spec.validate();
    std::vector<std::vector<BenchRun>> per_rep(static_cast<std::size_t>(spec.replications));
    parallel_for(per_rep.size(), opt.threads, [&](std::size_t rep) { per_rep[rep] = detail::run_replication(spec, opt, static_cast<Index>(rep)); });

    BenchResult out;
    out.spec = spec;
    for (auto& runs : per_rep)
        for (auto& run : runs) {
            if (!run.error.empty()) ++out.failures;
            out.runs.push_back(std::move(run));
        }

    // Probe a population only for its cluster counts.
    Rng probe = Rng::substream(spec.seed, 0);
    const auto counts = design_population(spec.design, spec.p, probe).truth.counts();
    std::vector<std::pair<Method, std::optional<SplitDistanceKind>>> variants;
    for (Method m : opt.methods) {
        if (m == Method::Hcsvd)
            for (auto kind : opt.kinds) variants.emplace_back(m, kind);
        else
            variants.emplace_back(m, std::nullopt);
    }
    for (const auto& [m, kind] : variants) {
        for (Index k : counts) {
            BenchCell cell{m, kind, k, {}, 0.0, 0.0, 0.0};
            double seconds = 0;
            std::size_t timed_runs = 0;
            for (const auto& run : out.runs) {
                if (run.method != m || run.kind != kind) continue;
                seconds += run.seconds;
                ++timed_runs;
                for (const auto& [cut, ari] : run.ari)
                    if (cut == k) cell.ari.push_back(ari);
            }
            if (!cell.ari.empty()) {
                double sum = 0;
                for (double a : cell.ari) sum += a;
                cell.mean = sum / static_cast<double>(cell.ari.size());
                double ss = 0;
                for (double a : cell.ari) ss += (a - cell.mean) * (a - cell.mean);
                cell.sd = cell.ari.size() > 1 ? std::sqrt(ss / static_cast<double>(cell.ari.size() - 1)) : 0.0;
            } else {
                cell.mean = cell.sd = std::numeric_limits<double>::quiet_NaN();
            }
            cell.mean_seconds = timed_runs ? seconds / static_cast<double>(timed_runs) : 0.0;
            out.cells.push_back(std::move(cell));
        }
    }
    return out;
}

}  // namespace hcsvd
