#include "sylkrylov/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "sylkrylov");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = sylkrylov::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Data rows of a CSV file: lines after the column line that do not start with '#'.
std::vector<std::vector<std::string>> rows(const std::string& text, std::string* header = nullptr) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(text);
    bool seen_columns = false;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#')
            continue;
        if (!seen_columns) {
            seen_columns = true;
            if (header)
                *header = line;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');)
            cells.push_back(c);
        out.push_back(cells);
    }
    return out;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("sylkrylov_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SolveConverges) {
    const auto r = run_cli({"solve", "--preset", "example1", "--n0", "10", "--method", "exp",
                            "--tol", "1e-10", "--seed", "42", "--output", path("run.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::string header;
    const auto hist = rows(slurp(path("run.csv")), &header);
    EXPECT_EQ(header, "m,dim_A,dim_B,residual");
    ASSERT_FALSE(hist.empty());
    EXPECT_EQ(std::stoi(hist.back()[0]), static_cast<int>(hist.size()));
    EXPECT_LE(std::stod(hist.back()[3]), 1e-10);
    EXPECT_EQ(hist.front()[1], "4");
    const std::string text = slurp(path("run.csv"));
    EXPECT_EQ(text.rfind(sylkrylov::cli::kCsvHeader, 0), 0u);
    EXPECT_NE(text.find("# converged=1"), std::string::npos);
}

TEST_F(CliTest, TimesTableHasGridPoints) {
    const auto r = run_cli({"solve", "--preset", "example1", "--method", "bdf1", "--h", "0.01",
                            "--interval", "0", "2", "--output", path("bdf.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::string header;
    const auto t = rows(slurp(path("bdf.times.csv")), &header);
    EXPECT_EQ(header, "k,t,residual_fro,residual_two,rank");
    ASSERT_EQ(t.size(), 201u);
    EXPECT_EQ(std::stod(t.back()[1]), 2.0);
    EXPECT_EQ(t.front()[0], "0");
}

TEST_F(CliTest, InvalidMethod) {
    const auto r = run_cli({"solve", "--method", "bdf7"});
    EXPECT_EQ(r.code, 1);
    for (const char* name : {"exp", "bdf1", "bdf2", "bdf3", "ros2"})
        EXPECT_NE(r.err.find(name), std::string::npos) << r.err;
}

TEST_F(CliTest, NotConvergedExitCode) {
    const auto r = run_cli({"solve", "--n0", "6", "--m-max", "1", "--tol", "1e-14"});
    EXPECT_EQ(r.code, 2) << r.err;
    EXPECT_NE(r.out.find("NOT converged"), std::string::npos);
}

TEST_F(CliTest, CompareFourMethods) {
    const auto r = run_cli({"compare", "--preset", "example1", "--n0", "10", "--methods",
                            "exp,bdf1,bdf2,ros2", "--output", path("cmp.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::string header;
    const auto t = rows(slurp(path("cmp.csv")), &header);
    EXPECT_EQ(header, "method,m,converged,residual_fro_Tf,residual_max");
    ASSERT_EQ(t.size(), 4u);
    for (const auto& row : t) {
        EXPECT_EQ(row[2], "1") << row[0];
        EXPECT_LE(std::stod(row[4]), 1e-10 * 10) << row[0];
    }
    EXPECT_NE(r.out.find("runtime="), std::string::npos);
}

TEST_F(CliTest, CompareTimingColumn) {
    const auto r = run_cli({"compare", "--n0", "6", "--methods", "exp", "--tol", "1e-8",
                            "--timing", "--output", path("cmp.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::string header;
    rows(slurp(path("cmp.csv")), &header);
    EXPECT_EQ(header, "method,m,converged,residual_fro_Tf,residual_max,runtime_s");
}

TEST_F(CliTest, CompareSingleMethodMatchesSolve) {
    const auto c = run_cli({"compare", "--n0", "6", "--methods", "bdf2", "--tol", "1e-8",
                            "--output", path("cmp.csv")});
    const auto s = run_cli({"solve", "--n0", "6", "--method", "bdf2", "--tol", "1e-8",
                            "--output", path("solve.csv")});
    ASSERT_EQ(c.code, 0) << c.err;
    ASSERT_EQ(s.code, 0) << s.err;
    const auto ct = rows(slurp(path("cmp.csv")));
    const auto hist = rows(slurp(path("solve.csv")));
    const auto times = rows(slurp(path("solve.times.csv")));
    ASSERT_EQ(ct.size(), 1u);
    EXPECT_EQ(std::stoul(ct[0][1]), hist.size());
    EXPECT_EQ(ct[0][4], hist.back()[3]);
    EXPECT_EQ(ct[0][3], times.back()[2]);
}

TEST_F(CliTest, CompareWithoutMethods) {
    EXPECT_EQ(run_cli({"compare", "--n0", "5"}).code, 1);
    EXPECT_EQ(run_cli({"compare", "--n0", "5", "--methods", ""}).code, 1);
}

TEST_F(CliTest, BoundsTwelveRows) {
    const auto r = run_cli({"bounds", "--preset", "example1", "--n0", "10", "--interval", "0", "1",
                            "--output", path("b.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::string header;
    const auto t = rows(slurp(path("b.csv")), &header);
    EXPECT_EQ(header, "m,error,bound_alpha,bound_beta,bound_global");
    ASSERT_EQ(t.size(), 12u);
    for (const auto& row : t) {
        const double err = std::stod(row[1]), a = std::stod(row[2]), b = std::stod(row[3]);
        EXPECT_LE(err, a) << row[0];
        EXPECT_LE(a, b) << row[0];
    }
}

TEST_F(CliTest, BoundsSingleRow) {
    const auto r = run_cli({"bounds", "--n0", "6", "--m-max", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(rows(r.out).size(), 1u);
}

TEST_F(CliTest, BoundsRefusesLargeProblems) {
    const auto r = run_cli({"bounds", "--n0", "100"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("must not exceed"), std::string::npos) << r.err;
}

TEST_F(CliTest, DeterministicOutput) {
    const std::vector<std::string> base{"solve", "--preset", "example1", "--n0", "10", "--s", "2",
                                        "--seed", "42", "--interval", "0", "2"};
    auto a = base, b = base;
    a.insert(a.end(), {"--output", path("a.csv")});
    b.insert(b.end(), {"--output", path("b.csv")});
    ASSERT_EQ(run_cli(a).code, 0);
    ASSERT_EQ(run_cli(b).code, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_EQ(slurp(path("a.times.csv")), slurp(path("b.times.csv")));
}

TEST_F(CliTest, ConfigFileAndOverride) {
    {
        std::ofstream cfg(path("run.cfg"));
        cfg << "# comment\npreset = example1\nn0 = 5\nmethod = bdf2\ntol = 1e-6\ninterval = 0 1\n";
    }
    const auto r = run_cli({"solve", "--config", path("run.cfg"), "--method", "ros2",
                            "--output", path("c.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string text = slurp(path("c.csv"));
    EXPECT_NE(text.find("# method=ros2"), std::string::npos);
    EXPECT_NE(text.find("# n=25"), std::string::npos);
    EXPECT_NE(text.find("# Tf=1"), std::string::npos);

    {
        std::ofstream bad(path("bad.cfg"));
        bad << "n0 10\n";
    }
    EXPECT_EQ(run_cli({"solve", "--config", path("bad.cfg")}).code, 1);
    EXPECT_EQ(run_cli({"solve", "--config", path("missing.cfg")}).code, 1);
}

TEST_F(CliTest, JsonOutput) {
    const auto r = run_cli({"solve", "--n0", "6", "--tol", "1e-8", "--format", "json",
                            "--output", path("r.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string text = slurp(path("r.json"));
    EXPECT_NE(text.find("\"format\": \"sylkrylov-json v1\""), std::string::npos);
    EXPECT_NE(text.find("\"history\""), std::string::npos);
    EXPECT_NE(text.find("\"times\""), std::string::npos);
}

TEST_F(CliTest, FactorFiles) {
    const auto r = run_cli({"solve", "--n0", "6", "--tol", "1e-8", "--factors", path("Z")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string za = slurp(path("Z_ZA.csv"));
    std::istringstream in(za);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, sylkrylov::cli::kCsvHeader);
    int lines = 0;
    while (std::getline(in, line))
        ++lines;
    EXPECT_EQ(lines, 36);
    EXPECT_TRUE(fs::exists(path("Z_ZB.csv")));
}

TEST_F(CliTest, BadArguments) {
    EXPECT_EQ(run_cli({}).code, 1);
    EXPECT_EQ(run_cli({"solve", "--preset", "nope"}).code, 1);
    EXPECT_EQ(run_cli({"solve", "--interval", "1", "0"}).code, 1);
    EXPECT_EQ(run_cli({"solve", "--preset", "file"}).code, 1);
    EXPECT_EQ(run_cli({"solve", "--preset", "example2", "--A", path("none.mtx")}).code, 1);
    EXPECT_EQ(run_cli({"solve", "--h", "-1"}).code, 1);
    const auto help = run_cli({"--help"});
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("solve"), std::string::npos);
}

TEST_F(CliTest, SurrogatePreset) {
    const auto r = run_cli({"solve", "--preset", "surrogate100", "--s", "1", "--interval", "0",
                            "0.2", "--output", path("s.csv")});
    EXPECT_EQ(r.code, 0) << r.err << r.out;
    EXPECT_NE(slurp(path("s.csv")).find("# h=0.001"), std::string::npos);
}
