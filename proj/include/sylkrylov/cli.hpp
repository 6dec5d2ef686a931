#pragma once

#include "sylkrylov/problems.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sylkrylov::cli {

inline constexpr const char* kCsvHeader = "# sylkrylov-csv v1";

/// Flags of the solve / compare / bounds subcommands. Unset optionals take the preset
/// defaults (example1: h = 0.01, tol = 1e-10; example2 and surrogate100: h = 0.001, tol = 1e-7).
struct RunConfig {
    std::string preset = "example1";  // example1 | example2 | surrogate100 | file
    Index n0 = 10;
    std::optional<Index> p0;
    std::string A_path;
    std::string B_path;
    Index s = 2;
    std::uint64_t seed = 42;
    std::optional<int> sign;
    std::vector<double> interval;  // empty or {t0, Tf}
    std::string method = "exp";
    std::vector<std::string> methods;  // compare only
    std::string basis = "eba";
    std::optional<double> tol;
    std::optional<double> h;
    Index m_max = 30;
    double dtol = 1e-12;
    double gamma = 1.0 + 0.70710678118654752440;
    int quad_nodes = 12;
    int quad_substeps = 8;
    std::string norm = "fro";
    std::string output;
    std::string format = "csv";
    std::string factors;
    bool timing = false;
};

DSEProblem build_problem(const RunConfig& cfg);
SolverConfig build_solver_config(const RunConfig& cfg, Method method);

/// Runs the command line. Returns the process exit code: 0 success / converged,
/// 2 not converged, 1 on any error (message written to err).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Number formatting shared by every CSV writer (17 significant digits).
std::string format_number(double v);

}  // namespace sylkrylov::cli
