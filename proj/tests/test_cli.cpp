#include "support.hpp"

#include <hcsvd/cli.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hcsvd;
using namespace hcsvd::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "hcsvd");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("hcsvd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

std::string data_csv(const Matrix& x) {
    std::ostringstream s;
    io::write_matrix_csv(s, x, default_labels(x.cols()));
    return s.str();
}

}  // namespace

TEST_F(Cli, TwoVariableData) {
    spit(path("two.csv"), "u,v\n1,2\n2,1\n3,5\n4,3\n");
    const auto r = run_cli({"cluster", path("two.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["schema"], "hcsvd-dendrogram/1");
    ASSERT_EQ(doc["merges"].size(), 1u);
    EXPECT_EQ(doc["merges"][0]["left"], -1);
    EXPECT_EQ(doc["merges"][0]["right"], -2);
    EXPECT_EQ(doc["labels"], nlohmann::json({"u", "v"}));
    EXPECT_NE(r.err.find("ultrametric violations: 0"), std::string::npos);
}

TEST_F(Cli, MalformedInputExitsTwo) {
    spit(path("bad.csv"), "a,b\n1,2\n3,oops\n");
    const auto r = run_cli({"cluster", path("bad.csv")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("row 3, column 2"), std::string::npos);
    spit(path("rect.csv"), "a,b,c\n1,0.1,0.2\n0.1,1,0.3\n");
    EXPECT_EQ(run_cli({"cluster", "--corr", path("rect.csv")}).code, 2);
    EXPECT_EQ(run_cli({"cluster", path("missing.csv")}).code, 2);
    EXPECT_EQ(run_cli({"cluster", "--distance", "complete", path("bad.csv")}).code, 2);
    EXPECT_EQ(run_cli({"cluster"}).code, 2);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
    spit(path("const.csv"), "a,b\n1,2\n1,3\n1,4\n");
    EXPECT_EQ(run_cli({"cluster", path("const.csv")}).code, 2);
}

TEST_F(Cli, CollinearInputExitsThree) {
    spit(path("col.csv"), "a,b,c\n1,2,0\n2,4,1\n3,6,0\n4,8,2\n");
    const auto r = run_cli({"cluster", path("col.csv")});
    EXPECT_EQ(r.code, 3) << r.err;
    spit(path("corr.csv"), "a,b,c\n1,-1,0.2\n-1,1,-0.2\n0.2,-0.2,1\n");
    EXPECT_EQ(run_cli({"cluster", "--corr", path("corr.csv")}).code, 3);
}

TEST_F(Cli, CutFiles) {
    std::mt19937_64 gen(111);
    spit(path("x.csv"), data_csv(random_normal(30, 5, gen)));
    const auto r = run_cli({"cluster", path("x.csv"), "--cut", "1,5", "--format", "newick", "--out", path("tree.nwk")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(slurp(path("tree.nwk")).back(), '\n');
    std::ifstream one(path("tree_k1.csv")), all(path("tree_k5.csv"));
    const auto lp1 = io::read_partition(one), lp5 = io::read_partition(all);
    EXPECT_EQ(std::set<std::string>(lp1.cluster_ids.begin(), lp1.cluster_ids.end()).size(), 1u);
    EXPECT_EQ(std::set<std::string>(lp5.cluster_ids.begin(), lp5.cluster_ids.end()).size(), 5u);
    EXPECT_EQ(run_cli({"cluster", path("x.csv"), "--cut", "6"}).code, 2);
    ASSERT_EQ(run_cli({"cluster", path("x.csv"), "--cut", "2", "--cut-prefix", path("named")}).code, 0);
    EXPECT_TRUE(fs::exists(path("named_k2.csv")));
}

TEST_F(Cli, DistanceMatrixFormat) {
    spit(path("r.csv"), "a,b,c\n1,0.8,0.1\n0.8,1,0.2\n0.1,0.2,1\n");
    const auto r = run_cli({"cluster", "--corr", path("r.csv"), "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    const auto t = io::read_numeric_table(in);
    EXPECT_EQ(t.header, (Labels{"a", "b", "c"}));
    const Matrix m = io::to_matrix(t);
    Matrix expected(3, 3);
    expected << 0, 0.2, 0.8, 0.2, 0, 0.8, 0.8, 0.8, 0;
    EXPECT_LT((m - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST_F(Cli, AbilitiesFixtureSixClusters) {
    const std::string fixture = std::string(HCSVD_TEST_DATA) + "/abilities.csv";
    const auto r = run_cli({"cluster", "--corr", fixture, "--distance", "single", "--cut", "6", "--cut-prefix", path("ab")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("ab_k6.csv")), slurp(std::string(HCSVD_TEST_DATA) + "/abilities_k6.csv"));
    const auto ari = run_cli({"ari", path("ab_k6.csv"), std::string(HCSVD_TEST_DATA) + "/abilities_k6.csv"});
    EXPECT_EQ(ari.out, "1.000000\n");
}

TEST_F(Cli, ThreadCountDoesNotChangeOutput) {
    Rng rng(112);
    const auto pop = design_b_population(30, rng);
    spit(path("x.csv"), data_csv(sample_mvn(pop.correlation, 90, rng).values));
    for (const std::string kind : {"rv", "average", "single"}) {
        const auto one = run_cli({"cluster", path("x.csv"), "--distance", kind, "--threads", "1", "--cut", "10", "--cut-prefix", path("t1")});
        const auto four = run_cli({"cluster", path("x.csv"), "--distance", kind, "--threads", "4", "--cut", "10", "--cut-prefix", path("t4")});
        ASSERT_EQ(one.code, 0);
        EXPECT_EQ(one.out, four.out);
        EXPECT_EQ(slurp(path("t1_k10.csv")), slurp(path("t4_k10.csv")));
    }
}

TEST_F(Cli, SimulateIsDeterministic) {
    ASSERT_EQ(run_cli({"simulate", "--design", "b", "--p", "60", "--n", "180", "--seed", "3", "--out", path("s1")}).code, 0);
    ASSERT_EQ(run_cli({"simulate", "--design", "b", "--p", "60", "--n", "180", "--seed", "3", "--out", path("s2")}).code, 0);
    EXPECT_EQ(slurp(path("s1_data.csv")), slurp(path("s2_data.csv")));
    EXPECT_EQ(slurp(path("s1_population.csv")), slurp(path("s2_population.csv")));
    std::ifstream data(path("s1_data.csv"));
    const auto x = io::read_data_csv(data);
    EXPECT_EQ(x.values.rows(), 180);
    EXPECT_EQ(x.values.cols(), 60);
    EXPECT_TRUE(fs::exists(path("s1_truth_k20.csv")));
    EXPECT_TRUE(fs::exists(path("s1_truth_k40.csv")));
    EXPECT_EQ(run_cli({"simulate", "--design", "b", "--p", "61", "--n", "10", "--out", path("bad")}).code, 2);
}

TEST_F(Cli, SimulateDesignA) {
    ASSERT_EQ(run_cli({"simulate", "--design", "a", "--p", "100", "--n", "300", "--out", path("a")}).code, 0);
    for (int k : {5, 10, 15, 20}) EXPECT_TRUE(fs::exists(path("a_truth_k" + std::to_string(k) + ".csv"))) << k;
}

TEST_F(Cli, AriCommand) {
    spit(path("a.csv"), "variable,cluster\nw,1\nx,1\ny,2\nz,2\n");
    spit(path("singles.csv"), "variable,cluster\nw,1\nx,2\ny,3\nz,4\n");
    spit(path("one.csv"), "variable,cluster\nz,7\ny,7\nx,7\nw,7\n");
    spit(path("other.csv"), "variable,cluster\nw,1\nx,1\ny,2\nq,2\n");
    EXPECT_EQ(run_cli({"ari", path("a.csv"), path("a.csv")}).out, "1.000000\n");
    EXPECT_EQ(run_cli({"ari", path("singles.csv"), path("one.csv")}).out, "0.000000\n");
    EXPECT_EQ(run_cli({"ari", path("a.csv"), path("other.csv")}).code, 2);
}

TEST_F(Cli, BenchRowCount) {
    spit(path("spec.txt"), "# small run\ndesign = b\np = 60\nn = 180\nseed = 9\nreplications = 10\n");
    const auto r = run_cli({"bench", path("spec.txt"), "--out", path("b1"), "--no-timings"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream csv(slurp(path("b1.csv")));
    std::string line;
    std::size_t rows = 0;
    std::getline(csv, line);
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 10u * 4u * 2u);
    const auto doc = nlohmann::json::parse(slurp(path("b1.json")));
    EXPECT_EQ(doc["replications"], 10);
}

TEST_F(Cli, BenchThreadCountDoesNotChangeOutput) {
    spit(path("spec.txt"), "design = b\np = 24\nn = 72\nseed = 10\nreplications = 4\n");
    ASSERT_EQ(run_cli({"bench", path("spec.txt"), "--out", path("b1"), "--no-timings"}).code, 0);
    ASSERT_EQ(run_cli({"bench", path("spec.txt"), "--out", path("b3"), "--no-timings", "--threads", "3"}).code, 0);
    EXPECT_EQ(slurp(path("b1.csv")), slurp(path("b3.csv")));
    EXPECT_EQ(slurp(path("b1.json")), slurp(path("b3.json")));
}

TEST_F(Cli, BenchPopulationSmoke) {
    spit(path("spec.txt"), "design = b\np = 30\nmethods = hcsvd\n");
    ASSERT_EQ(run_cli({"bench", path("spec.txt"), "--out", path("pop")}).code, 0);
    const auto doc = nlohmann::json::parse(slurp(path("pop.json")));
    for (const auto& cell : doc["cells"]) EXPECT_EQ(cell["mean_ari"], 1.0);
}

TEST_F(Cli, BenchSpecErrors) {
    spit(path("nodesign.txt"), "p = 60\n");
    const auto r = run_cli({"bench", path("nodesign.txt"), "--out", path("x")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("design"), std::string::npos);
    spit(path("unknown.txt"), "design = b\np = 60\ncolour = blue\n");
    EXPECT_EQ(run_cli({"bench", path("unknown.txt"), "--out", path("x")}).code, 2);
    spit(path("badp.txt"), "design = b\np = 61\n");
    EXPECT_EQ(run_cli({"bench", path("badp.txt"), "--out", path("x")}).code, 2);
}

TEST_F(Cli, BinaryExitCodes) {
    spit(path("two.csv"), "u,v\n1,2\n2,1\n3,5\n");
    const std::string bin = HCSVD_CLI_PATH;
    const auto quiet = " > " + path("stdout.txt") + " 2> " + path("stderr.txt");
    EXPECT_EQ(WEXITSTATUS(std::system((bin + " cluster " + path("two.csv") + quiet).c_str())), 0);
    EXPECT_EQ(WEXITSTATUS(std::system((bin + " cluster --corr " + path("two.csv") + quiet).c_str())), 2);
    EXPECT_EQ(WEXITSTATUS(std::system((bin + " --version" + quiet).c_str())), 0);
}
