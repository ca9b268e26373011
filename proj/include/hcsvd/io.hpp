#pragma once

// Text formats: comma-separated matrices with a label header, partition files,
// dendrogram documents (JSON and Newick) and benchmark tables.

#include <hcsvd/divisive.hpp>
#include <hcsvd/errors.hpp>
#include <hcsvd/matrixkit.hpp>
#include <hcsvd/simbench.hpp>
#include <hcsvd/tree.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace hcsvd {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kDendrogramSchema = "hcsvd-dendrogram/1";

namespace io {

// ---------------------------------------------------------------------------
// CSV

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

/// Lossless shortest representation of a double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& field, std::size_t row, std::size_t col) {
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    if (!field.empty() && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, v);
    if (field.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
        throw InvalidInput("row " + std::to_string(row) + ", column " + std::to_string(col) + ": not a finite number: '" + field + "'");
    return v;
}

struct Table {
    Labels header;
    std::vector<std::vector<double>> rows;
};

/// First line holds the labels; every further non-empty line holds one number
/// per label. Rows and columns in messages are 1-based, counting the header row.
inline Table read_numeric_table(std::istream& in) {
    Table t;
    std::string line;
    std::size_t row = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (!have_header) {
            if (row == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) fields = split_fields(line.substr(3));
            std::set<std::string> seen;
            for (std::size_t c = 0; c < fields.size(); ++c) {
                if (fields[c].empty()) throw InvalidInput("row " + std::to_string(row) + ", column " + std::to_string(c + 1) + ": empty label");
                if (!seen.insert(fields[c]).second)
                    throw InvalidInput("row " + std::to_string(row) + ", column " + std::to_string(c + 1) + ": duplicate label '" + fields[c] + "'");
            }
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw InvalidInput("row " + std::to_string(row) + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                               std::to_string(fields.size()));
        std::vector<double> values;
        values.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) values.push_back(parse_double(fields[c], row, c + 1));
        t.rows.push_back(std::move(values));
    }
    if (!have_header) throw InvalidInput("row 1: missing header row");
    return t;
}

inline Matrix to_matrix(const Table& t) {
    Matrix m(static_cast<Index>(t.rows.size()), static_cast<Index>(t.header.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < t.header.size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = t.rows[i][j];
    return m;
}

inline RawMatrix read_data_csv(std::istream& in) {
    Table t = read_numeric_table(in);
    if (t.rows.size() < 2) throw InvalidInput("data input needs at least two observation rows, found " + std::to_string(t.rows.size()));
    Matrix m = to_matrix(t);
    return RawMatrix(std::move(m), std::move(t.header));
}

/// Square matrix under a header of labels. Checked for symmetry within 1e-8,
/// then symmetrized by averaging and validated as a correlation matrix.
inline CorrelationMatrix read_correlation_csv(std::istream& in) {
    Table t = read_numeric_table(in);
    const std::size_t p = t.header.size();
    if (t.rows.size() != p)
        throw InvalidInput("correlation input is not square: " + std::to_string(t.rows.size()) + " rows under " + std::to_string(p) + " labels");
    Matrix m = to_matrix(t);
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < i; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-8)
                throw InvalidInput("row " + std::to_string(i + 2) + ", column " + std::to_string(j + 1) + ": correlation matrix is not symmetric");
    m = (0.5 * (m + m.transpose())).eval();
    return CorrelationMatrix(std::move(m), std::move(t.header));
}

inline void write_matrix_csv(std::ostream& out, const Matrix& m, const Labels& labels) {
    for (std::size_t j = 0; j < labels.size(); ++j) out << (j ? "," : "") << labels[j];
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Partition files: "variable,cluster" header, one line per variable.

inline void write_partition(std::ostream& out, const Partition& part, const Labels& labels) {
    const auto ids = labels_of(part, static_cast<Index>(labels.size()));
    out << "variable,cluster\n";
    for (std::size_t i = 0; i < labels.size(); ++i) out << labels[i] << ',' << ids[i] + 1 << '\n';
}

struct LabeledPartition {
    Labels labels;
    std::vector<std::string> cluster_ids;
};

inline LabeledPartition read_partition(std::istream& in) {
    LabeledPartition out;
    std::string line;
    std::size_t row = 0;
    bool header = false;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 2) throw InvalidInput("row " + std::to_string(row) + ": expected 2 fields (variable,cluster)");
        if (!header) {
            header = true;
            continue;
        }
        if (fields[0].empty() || fields[1].empty()) throw InvalidInput("row " + std::to_string(row) + ": empty field");
        if (!seen.insert(fields[0]).second) throw InvalidInput("row " + std::to_string(row) + ": duplicate variable '" + fields[0] + "'");
        out.labels.push_back(fields[0]);
        out.cluster_ids.push_back(fields[1]);
    }
    if (out.labels.empty()) throw InvalidInput("partition file lists no variables");
    return out;
}

/// Partition of `order` induced by the cluster ids of `lp`.
inline Partition partition_over(const LabeledPartition& lp, const Labels& order) {
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < lp.labels.size(); ++i) position[lp.labels[i]] = i;
    std::map<std::string, Index> id_of;
    std::vector<Index> ids;
    for (const auto& label : order) {
        const auto it = position.find(label);
        if (it == position.end()) throw InvalidInput("variable '" + label + "' is missing from a partition file");
        const auto& raw = lp.cluster_ids[it->second];
        ids.push_back(id_of.emplace(raw, static_cast<Index>(id_of.size())).first->second);
    }
    return partition_from_labels(ids);
}

// ---------------------------------------------------------------------------
// Dendrograms

struct Merge {
    std::ptrdiff_t left;  // < 0: leaf −left (1-based); > 0: earlier merge number
    std::ptrdiff_t right;
    double height;
    Index size;
};

/// Bottom-up merge list: a merge is listed once both of its children are,
/// choosing the lowest height among the available ones (then the later split).
/// Leaves are −1..−p, internal nodes 1..p−1 in listing order.
inline std::vector<Merge> merges_of(const SplitTree& tree) {
    const auto count = tree.splits.size();
    std::vector<std::ptrdiff_t> parent(count, -1);
    std::vector<int> waiting(count, 0);
    for (std::size_t i = 0; i < count; ++i)
        for (auto c : {tree.splits[i].left_child, tree.splits[i].right_child})
            if (c >= 0) {
                parent[static_cast<std::size_t>(c)] = static_cast<std::ptrdiff_t>(i);
                ++waiting[i];
            }

    using Ready = std::pair<double, std::ptrdiff_t>;  // (height, −split index)
    std::priority_queue<Ready, std::vector<Ready>, std::greater<>> ready;
    for (std::size_t i = 0; i < count; ++i)
        if (waiting[i] == 0) ready.emplace(tree.splits[i].height, -static_cast<std::ptrdiff_t>(i));

    std::vector<std::ptrdiff_t> node_id(count, 0);
    std::vector<Merge> out;
    out.reserve(count);
    while (!ready.empty()) {
        const auto i = static_cast<std::size_t>(-ready.top().second);
        ready.pop();
        const auto& s = tree.splits[i];
        auto id_of = [&](const Cluster& side, std::ptrdiff_t child) {
            return child >= 0 ? node_id[static_cast<std::size_t>(child)] : -static_cast<std::ptrdiff_t>(side.front() + 1);
        };
        out.push_back({id_of(s.left, s.left_child), id_of(s.right, s.right_child), s.height, static_cast<Index>(s.parent.size())});
        node_id[i] = static_cast<std::ptrdiff_t>(out.size());
        if (parent[i] >= 0 && --waiting[static_cast<std::size_t>(parent[i])] == 0)
            ready.emplace(tree.splits[static_cast<std::size_t>(parent[i])].height, -parent[i]);
    }
    return out;
}

struct DendrogramInfo {
    std::size_t ultrametric_violations = 0;
    bool monotone = true;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::size_t nonconverged_degrees = 0;
};

inline nlohmann::ordered_json dendrogram_json(const SplitTree& tree, const DendrogramInfo& info) {
    nlohmann::ordered_json doc;
    doc["schema"] = kDendrogramSchema;
    doc["labels"] = tree.labels;
    doc["height_mode"] = std::string(to_string(tree.height_mode));
    auto merges = nlohmann::ordered_json::array();
    for (const auto& m : merges_of(tree)) merges.push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}});
    doc["merges"] = std::move(merges);
    doc["diagnostics"] = {{"ultrametric_violations", info.ultrametric_violations},
                          {"monotone", info.monotone},
                          {"nonconverged_degrees", info.nonconverged_degrees}};
    doc["metadata"] = {{"version", kVersion}, {"config", info.config}, {"rng", Rng::kIdentifier}};
    return doc;
}

inline std::string newick_label(const std::string& label) {
    if (label.find_first_of(" \t()[]':;,") == std::string::npos && !label.empty()) return label;
    std::string out = "'";
    for (char c : label) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

/// Branch length = parent height − child height, leaves at height 0. Negative
/// lengths (non-monotone trees) are written as 0; `clamped` reports whether
/// that happened.
inline std::string to_newick(const SplitTree& tree, bool* clamped = nullptr) {
    if (clamped) *clamped = false;
    if (tree.splits.empty()) return tree.labels.empty() ? ";" : newick_label(tree.labels.front()) + ";";
    std::string out;
    auto length = [&](double parent_h, double child_h) {
        double len = parent_h - child_h;
        if (len < 0) {
            if (clamped) *clamped = true;
            len = 0;
        }
        return ":" + format_double(len);
    };
    auto emit = [&](auto&& self, std::size_t i) -> void {
        const auto& s = tree.splits[i];
        out += '(';
        bool first = true;
        for (auto [side, child] : {std::pair{&s.left, s.left_child}, std::pair{&s.right, s.right_child}}) {
            if (!first) out += ',';
            first = false;
            if (child >= 0) {
                self(self, static_cast<std::size_t>(child));
                out += length(s.height, tree.splits[static_cast<std::size_t>(child)].height);
            } else {
                out += newick_label(tree.labels[static_cast<std::size_t>(side->front())]);
                out += length(s.height, 0.0);
            }
        }
        out += ')';
    };
    emit(emit, 0);
    return out + ";";
}

/// Parsed rooted tree; node 0 is the root.
struct NewickTree {
    struct Node {
        std::string label;
        double length = 0.0;
        std::vector<std::size_t> children;
    };
    std::vector<Node> nodes;

    /// Heights as implied by branch lengths: the root sits at the largest
    /// root-to-leaf path length, every node below by its branch length.
    std::vector<double> heights() const {
        std::vector<double> depth(nodes.size(), 0.0);
        double deepest = 0.0;
        std::vector<std::size_t> stack{0};
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            if (nodes[i].children.empty()) deepest = std::max(deepest, depth[i]);
            for (auto c : nodes[i].children) {
                depth[c] = depth[i] + nodes[c].length;
                stack.push_back(c);
            }
        }
        std::vector<double> h(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) h[i] = deepest - depth[i];
        return h;
    }
};

inline NewickTree parse_newick(std::string_view text) {
    NewickTree tree;
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) { throw InvalidInput("newick, offset " + std::to_string(pos) + ": " + what); };
    auto skip = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    auto read_label = [&]() {
        skip();
        std::string label;
        if (pos < text.size() && text[pos] == '\'') {
            ++pos;
            while (true) {
                if (pos >= text.size()) fail("unterminated quoted label");
                if (text[pos] == '\'') {
                    if (pos + 1 < text.size() && text[pos + 1] == '\'') {
                        label += '\'';
                        pos += 2;
                        continue;
                    }
                    ++pos;
                    break;
                }
                label += text[pos++];
            }
            return label;
        }
        while (pos < text.size() && std::string_view("(),:;").find(text[pos]) == std::string_view::npos) label += text[pos++];
        return trim(label);
    };
    auto read_length = [&]() {
        skip();
        if (pos >= text.size() || text[pos] != ':') return 0.0;
        ++pos;
        skip();
        const auto start = pos;
        while (pos < text.size() && std::string_view("(),:;").find(text[pos]) == std::string_view::npos) ++pos;
        return parse_double(trim(text.substr(start, pos - start)), 1, start + 1);
    };
    auto parse = [&](auto&& self) -> std::size_t {
        const auto id = tree.nodes.size();
        tree.nodes.emplace_back();
        skip();
        if (pos < text.size() && text[pos] == '(') {
            ++pos;
            while (true) {
                const auto child = self(self);
                tree.nodes[id].children.push_back(child);
                skip();
                if (pos >= text.size()) fail("unexpected end");
                if (text[pos] == ',') {
                    ++pos;
                    continue;
                }
                if (text[pos] == ')') {
                    ++pos;
                    break;
                }
                fail("expected ',' or ')'");
            }
        }
        tree.nodes[id].label = read_label();
        tree.nodes[id].length = read_length();
        return id;
    };
    parse(parse);
    skip();
    if (pos >= text.size() || text[pos] != ';') fail("expected ';'");
    return tree;
}

// ---------------------------------------------------------------------------
// Benchmark tables

inline std::string n_field(const DesignSpec& spec) { return spec.n ? std::to_string(*spec.n) : "inf"; }

/// Columns: design,p,n,replication,method,distance_kind,cut_k,ari,seconds.
/// Failed runs list NA for every ground-truth count.
inline void write_bench_csv(std::ostream& out, const BenchResult& res, bool with_timings = true) {
    out << "design,p,n,replication,method,distance_kind,cut_k,ari,seconds\n";
    Rng probe = Rng::substream(res.spec.seed, 0);
    const auto counts = design_population(res.spec.design, res.spec.p, probe).truth.counts();
    for (const auto& run : res.runs) {
        const std::string kind = run.kind ? std::string(to_string(*run.kind)) : "NA";
        const std::string seconds = with_timings ? format_double(run.seconds) : "NA";
        for (Index k : counts) {
            std::string ari = "NA";
            for (const auto& [cut, value] : run.ari)
                if (cut == k) ari = format_double(value);
            out << to_string(res.spec.design) << ',' << res.spec.p << ',' << n_field(res.spec) << ',' << run.replication + 1 << ','
                << to_string(run.method) << ',' << kind << ',' << k << ',' << ari << ',' << seconds << '\n';
        }
    }
}

inline nlohmann::ordered_json bench_json(const BenchResult& res, const nlohmann::ordered_json& config, bool with_timings = true) {
    nlohmann::ordered_json doc;
    doc["schema"] = "hcsvd-bench/1";
    doc["design"] = std::string(to_string(res.spec.design));
    doc["p"] = res.spec.p;
    doc["n"] = res.spec.n ? nlohmann::ordered_json(*res.spec.n) : nlohmann::ordered_json("inf");
    doc["seed"] = res.spec.seed;
    doc["replications"] = res.spec.replications;
    doc["failures"] = res.failures;
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : res.cells) {
        nlohmann::ordered_json cell;
        cell["method"] = std::string(to_string(c.method));
        cell["distance_kind"] = c.kind ? nlohmann::ordered_json(std::string(to_string(*c.kind))) : nlohmann::ordered_json(nullptr);
        cell["cut_k"] = c.cut_k;
        cell["runs"] = c.ari.size();
        cell["mean_ari"] = std::isfinite(c.mean) ? nlohmann::ordered_json(c.mean) : nlohmann::ordered_json(nullptr);
        cell["sd_ari"] = std::isfinite(c.sd) ? nlohmann::ordered_json(c.sd) : nlohmann::ordered_json(nullptr);
        if (with_timings) cell["mean_seconds"] = c.mean_seconds;
        cells.push_back(std::move(cell));
    }
    doc["cells"] = std::move(cells);
    doc["metadata"] = {{"version", kVersion}, {"config", config}, {"rng", Rng::kIdentifier}};
    return doc;
}

}  // namespace io
}  // namespace hcsvd
