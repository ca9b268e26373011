#pragma once

// Command-line front end: cluster, simulate, bench, ari.
//
// Exit codes: 0 success, 1 other failure, 2 malformed input or usage,
// 3 perfect collinearity, 4 convergence failure.

#include <hcsvd/baselines.hpp>
#include <hcsvd/divisive.hpp>
#include <hcsvd/errors.hpp>
#include <hcsvd/io.hpp>
#include <hcsvd/simbench.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hcsvd::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kBadInput = 2, kCollinear = 3, kNoConvergence = 4 };

struct RunConfig {
    bool correlation_input = false;
    std::string distance = "single";
    std::string heights = "split";
    std::string loadings = "kaiser";
    Index exhaustive_threshold = 6;
    std::vector<Index> cut_counts;
    std::string format = "json";
    unsigned threads = 1;
    std::uint64_t seed = 1;
    std::string out;
    std::string cut_prefix;
};

inline LoadingPolicy parse_policy(const std::string& s) {
    if (s == "kaiser") return LoadingPolicy::kaiser();
    if (s == "all") return LoadingPolicy::all();
    Index k = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), k);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || k < 1) throw InvalidInput("--loadings expects kaiser, all or a positive integer, got '" + s + "'");
    return LoadingPolicy::fixed(k);
}

inline SplitDistanceKind parse_kind(const std::string& s) {
    auto kind = parse_distance_kind(s);
    if (!kind) throw InvalidInput("unknown distance kind '" + s + "' (expected rv, average or single)");
    return *kind;
}

inline HeightMode parse_heights(const std::string& s) {
    if (s == "split" || s == "split_distance") return HeightMode::SplitDistance;
    if (s == "reliability") return HeightMode::Reliability;
    throw InvalidInput("unknown height mode '" + s + "' (expected split or reliability)");
}

inline HcsvdOptions options_of(const RunConfig& cfg) {
    HcsvdOptions opt;
    opt.kind = parse_kind(cfg.distance);
    opt.policy = parse_policy(cfg.loadings);
    opt.height_mode = parse_heights(cfg.heights);
    if (cfg.exhaustive_threshold < 0) throw InvalidInput("--exhaustive-threshold must be non-negative");
    opt.exhaustive_threshold = cfg.exhaustive_threshold;
    opt.threads = std::max(1u, cfg.threads);
    return opt;
}

/// Settings that shape the output. The thread count is left out on purpose:
/// it never changes results.
inline nlohmann::ordered_json config_echo(const RunConfig& cfg, const HcsvdOptions& opt) {
    nlohmann::ordered_json c;
    c["input_kind"] = cfg.correlation_input ? "correlation_csv" : "data_csv";
    c["distance"] = std::string(to_string(opt.kind));
    c["heights"] = std::string(to_string(opt.height_mode));
    c["loadings"] = opt.policy.describe();
    c["exhaustive_threshold"] = opt.exhaustive_threshold;
    c["cut"] = cfg.cut_counts;
    c["format"] = cfg.format;
    c["seed"] = cfg.seed;
    return c;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    return in;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
    if (!out) throw Error("cannot write '" + path + "'");
}

inline std::string stem_of(const std::string& path) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return path.substr(0, dot);
    return path;
}

// ---------------------------------------------------------------------------

inline int cmd_cluster(const RunConfig& cfg, const std::string& input, std::ostream& out, std::ostream& err) {
    const HcsvdOptions opt = options_of(cfg);
    if (cfg.format != "json" && cfg.format != "newick" && cfg.format != "csv") throw InvalidInput("unknown format '" + cfg.format + "'");

    auto in = open_input(input);
    HcsvdResult res;
    if (cfg.correlation_input) {
        const CorrelationMatrix r = io::read_correlation_csv(in);
        for (Index k : cfg.cut_counts)
            if (k < 1 || k > r.size()) throw InvalidInput("--cut " + std::to_string(k) + " outside [1, " + std::to_string(r.size()) + "]");
        res = run_hcsvd(r, opt);
    } else {
        const StandardizedMatrix x = standardize(io::read_data_csv(in));
        for (Index k : cfg.cut_counts)
            if (k < 1 || k > x.cols()) throw InvalidInput("--cut " + std::to_string(k) + " outside [1, " + std::to_string(x.cols()) + "]");
        res = run_hcsvd(x, opt);
    }

    std::string doc;
    if (cfg.format == "json") {
        io::DendrogramInfo info{res.diagnostics.ultrametric_violations, res.diagnostics.monotone, config_echo(cfg, opt), res.diagnostics.nonconverged_degrees};
        doc = io::dendrogram_json(res.tree, info).dump(2) + "\n";
    } else if (cfg.format == "newick") {
        bool clamped = false;
        doc = io::to_newick(res.tree, &clamped) + "\n";
        if (clamped) err << "warning: heights are not monotone; negative branch lengths were written as 0\n";
    } else {
        std::ostringstream s;
        io::write_matrix_csv(s, res.distances, res.tree.labels);
        doc = s.str();
    }
    if (cfg.out.empty()) {
        out << doc;
    } else {
        write_file(cfg.out, doc);
    }

    const std::string prefix = !cfg.cut_prefix.empty() ? cfg.cut_prefix : !cfg.out.empty() ? stem_of(cfg.out) : "hcsvd";
    for (Index k : cfg.cut_counts) {
        std::ostringstream s;
        io::write_partition(s, cut_tree(res.tree, k), res.tree.labels);
        write_file(prefix + "_k" + std::to_string(k) + ".csv", s.str());
    }

    err << "variables: " << res.tree.leaves() << ", splits: " << res.tree.splits.size()
        << ", ultrametric violations: " << res.diagnostics.ultrametric_violations
        << ", monotone heights: " << (res.diagnostics.monotone ? "yes" : "no");
    if (res.diagnostics.nonconverged_degrees > 0) err << ", non-converged loading sequences: " << res.diagnostics.nonconverged_degrees;
    err << '\n';
    return kOk;
}

inline Design parse_design(const std::string& s) {
    if (s == "a" || s == "A") return Design::A;
    if (s == "b" || s == "B") return Design::B;
    throw InvalidInput("unknown design '" + s + "' (expected a or b)");
}

inline int cmd_simulate(const std::string& design, Index p, Index n, std::uint64_t seed, const std::string& prefix, std::ostream& err) {
    const Design d = parse_design(design);
    validate_design(d, p);
    if (n < 2) throw InvalidInput("--n must be at least 2");
    Rng rng = Rng::substream(seed, 0);
    const Population pop = design_population(d, p, rng);
    const RawMatrix data = sample_mvn(pop.correlation, n, rng);

    std::ostringstream s;
    io::write_matrix_csv(s, data.values, data.labels);
    write_file(prefix + "_data.csv", s.str());
    s.str("");
    io::write_matrix_csv(s, pop.correlation.values(), pop.correlation.labels());
    write_file(prefix + "_population.csv", s.str());
    for (const auto& [k, truth] : pop.truth.levels) {
        s.str("");
        io::write_partition(s, truth, pop.correlation.labels());
        write_file(prefix + "_truth_k" + std::to_string(k) + ".csv", s.str());
    }
    err << "wrote " << prefix << "_data.csv (" << n << "x" << p << "), " << prefix << "_population.csv and " << pop.truth.levels.size()
        << " ground-truth files\n";
    return kOk;
}

struct BenchFile {
    DesignSpec spec;
    BenchOptions options;
    nlohmann::ordered_json echo = nlohmann::ordered_json::object();
};

/// `key = value` lines; `#` starts a comment. Required: design, p. Optional:
/// n (omitted or `inf` feeds the population matrix), seed, replications,
/// methods (hcsvd,diana), kinds (rv,average,single), loadings, heights,
/// exhaustive_threshold.
inline BenchFile parse_bench_spec(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (io::trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidInput("spec line " + std::to_string(row) + ": expected key = value");
        const std::string key = io::trim(line.substr(0, eq));
        if (key.empty()) throw InvalidInput("spec line " + std::to_string(row) + ": empty key");
        if (!kv.emplace(key, io::trim(line.substr(eq + 1))).second) throw InvalidInput("spec line " + std::to_string(row) + ": duplicate key '" + key + "'");
    }
    static const std::set<std::string> known{"design", "p", "n", "seed", "replications", "methods", "kinds", "loadings", "heights", "exhaustive_threshold"};
    for (const auto& [key, value] : kv)
        if (!known.count(key)) throw InvalidInput("spec: unknown key '" + key + "'");
    for (const char* required : {"design", "p"})
        if (!kv.count(required)) throw InvalidInput(std::string("spec is missing required key '") + required + "'");

    auto integer = [&](const std::string& key) {
        const auto& v = kv.at(key);
        long long x = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
        if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) throw InvalidInput("spec: '" + key + "' must be an integer, got '" + v + "'");
        return x;
    };
    auto list = [&](const std::string& key) {
        std::vector<std::string> out;
        for (auto& item : io::split_fields(kv.at(key)))
            if (!item.empty()) out.push_back(item);
        if (out.empty()) throw InvalidInput("spec: '" + key + "' is empty");
        return out;
    };

    BenchFile f;
    f.spec.design = parse_design(kv.at("design"));
    f.spec.p = static_cast<Index>(integer("p"));
    if (kv.count("n") && kv.at("n") != "inf") f.spec.n = static_cast<Index>(integer("n"));
    if (kv.count("seed")) {
        const auto& v = kv.at("seed");
        std::uint64_t s = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), s);
        if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) throw InvalidInput("spec: 'seed' must be an unsigned integer");
        f.spec.seed = s;
    }
    if (kv.count("replications")) f.spec.replications = static_cast<Index>(integer("replications"));
    if (kv.count("methods")) {
        f.options.methods.clear();
        for (const auto& m : list("methods")) {
            if (m == "hcsvd") f.options.methods.push_back(Method::Hcsvd);
            else if (m == "diana") f.options.methods.push_back(Method::Diana);
            else throw InvalidInput("spec: unknown method '" + m + "'");
        }
    }
    if (kv.count("kinds")) {
        f.options.kinds.clear();
        for (const auto& k : list("kinds")) f.options.kinds.push_back(parse_kind(k));
    }
    if (kv.count("loadings")) f.options.hcsvd.policy = parse_policy(kv.at("loadings"));
    if (kv.count("heights")) f.options.hcsvd.height_mode = parse_heights(kv.at("heights"));
    if (kv.count("exhaustive_threshold")) f.options.hcsvd.exhaustive_threshold = static_cast<Index>(integer("exhaustive_threshold"));
    f.spec.validate();

    auto& e = f.echo;
    e["design"] = std::string(to_string(f.spec.design));
    e["p"] = f.spec.p;
    e["n"] = io::n_field(f.spec);
    e["seed"] = f.spec.seed;
    e["replications"] = f.spec.replications;
    auto methods = nlohmann::ordered_json::array();
    for (Method m : f.options.methods) methods.push_back(std::string(to_string(m)));
    e["methods"] = methods;
    auto kinds = nlohmann::ordered_json::array();
    for (auto k : f.options.kinds) kinds.push_back(std::string(to_string(k)));
    e["kinds"] = kinds;
    e["loadings"] = f.options.hcsvd.policy.describe();
    e["heights"] = std::string(to_string(f.options.hcsvd.height_mode));
    e["exhaustive_threshold"] = f.options.hcsvd.exhaustive_threshold;
    return f;
}

inline int cmd_bench(const std::string& spec_path, unsigned threads, const std::string& prefix, bool timings, std::ostream& err) {
    auto in = open_input(spec_path);
    BenchFile f = parse_bench_spec(in);
    f.options.threads = std::max(1u, threads);
    const BenchResult res = run_benchmark(f.spec, f.options);

    std::ostringstream csv;
    io::write_bench_csv(csv, res, timings);
    write_file(prefix + ".csv", csv.str());
    write_file(prefix + ".json", io::bench_json(res, f.echo, timings).dump(2) + "\n");

    for (const auto& run : res.runs)
        if (!run.error.empty())
            err << "replication " << run.replication + 1 << ", " << method_label(run.method, run.kind) << ": " << run.error << '\n';
    for (const auto& c : res.cells) {
        err << method_label(c.method, c.kind) << " k=" << c.cut_k << " mean ARI " << c.mean << " (sd " << c.sd << ")";
        if (timings) err << ", " << c.mean_seconds << " s";
        err << '\n';
    }
    return res.failures == res.runs.size() && !res.runs.empty() ? kFailure : kOk;
}

inline int cmd_ari(const std::string& a_path, const std::string& b_path, std::ostream& out) {
    auto a_in = open_input(a_path);
    auto b_in = open_input(b_path);
    const auto a = io::read_partition(a_in);
    const auto b = io::read_partition(b_in);
    const std::set<std::string> la(a.labels.begin(), a.labels.end()), lb(b.labels.begin(), b.labels.end());
    if (la != lb) throw InvalidInput("partition files list different variables");
    const double ari = adjusted_rand_index(io::partition_over(a, a.labels), io::partition_over(b, a.labels));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", ari);
    out << buf << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Divisive hierarchical variable clustering with sparse singular vectors", "hcsvd"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    RunConfig cfg;
    std::string input;
    auto* cluster = app.add_subcommand("cluster", "Cluster the variables of a data or correlation CSV");
    cluster->add_option("input", input, "Input CSV (first row: labels)")->required();
    cluster->add_flag("--corr", cfg.correlation_input, "Input is a correlation matrix");
    cluster->add_option("--distance", cfg.distance, "rv | average | single")->capture_default_str();
    cluster->add_option("--heights", cfg.heights, "split | reliability")->capture_default_str();
    cluster->add_option("--loadings", cfg.loadings, "kaiser | all | <int>")->capture_default_str();
    cluster->add_option("--exhaustive-threshold", cfg.exhaustive_threshold, "Enumerate all splits up to this cluster size")->capture_default_str();
    cluster->add_option("--cut", cfg.cut_counts, "Cluster counts to cut at")->delimiter(',');
    cluster->add_option("--format", cfg.format, "json | newick | csv")->capture_default_str();
    cluster->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
    cluster->add_option("--seed", cfg.seed, "Seed (echoed in metadata)")->capture_default_str();
    cluster->add_option("--out", cfg.out, "Output file (default: stdout)");
    cluster->add_option("--cut-prefix", cfg.cut_prefix, "Cut files are written to PREFIX_k<k>.csv");

    std::string design;
    Index sim_p = 0, sim_n = 0;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "Sample data from a simulation design");
    simulate->add_option("--design", design, "a | b")->required();
    simulate->add_option("--p", sim_p, "Number of variables")->required();
    simulate->add_option("--n", sim_n, "Number of observations")->required();
    simulate->add_option("--seed", sim_seed, "Seed")->capture_default_str();
    simulate->add_option("--out", sim_out, "Output prefix")->required();

    std::string spec_path, bench_out = "bench";
    unsigned bench_threads = 1;
    bool no_timings = false;
    auto* bench = app.add_subcommand("bench", "Run a benchmark described by a key = value spec file");
    bench->add_option("spec", spec_path, "Spec file")->required();
    bench->add_option("--threads", bench_threads, "Worker threads")->capture_default_str();
    bench->add_option("--out", bench_out, "Output prefix (PREFIX.csv, PREFIX.json)")->capture_default_str();
    bench->add_flag("--no-timings", no_timings, "Write NA instead of wall-clock seconds");

    std::string ari_a, ari_b;
    auto* ari = app.add_subcommand("ari", "Adjusted Rand index of two partition files");
    ari->add_option("a", ari_a, "Partition file")->required();
    ari->add_option("b", ari_b, "Partition file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadInput;
    }

    try {
        if (*cluster) return cmd_cluster(cfg, input, out, err);
        if (*simulate) return cmd_simulate(design, sim_p, sim_n, sim_seed, sim_out, err);
        if (*bench) return cmd_bench(spec_path, bench_threads, bench_out, !no_timings, err);
        if (*ari) return cmd_ari(ari_a, ari_b, out);
    } catch (const CollinearityViolation& e) {
        err << "error: " << e.what() << '\n';
        return kCollinear;
    } catch (const ConvergenceFailure& e) {
        err << "error: " << e.what() << '\n';
        return kNoConvergence;
    } catch (const NoValidCandidate& e) {
        err << "error: " << e.what() << '\n';
        return kNoConvergence;
    } catch (const ZeroMatrix& e) {
        err << "error: " << e.what() << '\n';
        return kNoConvergence;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const NotPositiveDefinite& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}

}  // namespace hcsvd::cli
