#include "sylkrylov/cli.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <variant>

namespace sylkrylov::cli {

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

namespace {

using Cell = std::variant<std::string, double, long long>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// Header comment fields, in insertion order.
using Meta = std::vector<std::pair<std::string, std::string>>;

std::string cell_text(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c))
        return *s;
    if (const auto* d = std::get_if<double>(&c))
        return format_number(*d);
    return std::to_string(std::get<long long>(c));
}

void write_csv(std::ostream& os, const Meta& meta, const Table& t) {
    os << kCsvHeader << '\n';
    for (const auto& [k, v] : meta)
        os << "# " << k << '=' << v << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << cell_text(row[i]);
        os << '\n';
    }
}

nlohmann::ordered_json to_json(const Meta& meta, const std::vector<Table>& tables) {
    nlohmann::ordered_json j;
    j["format"] = "sylkrylov-json v1";
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [k, v] : meta)
        m[k] = v;
    j["meta"] = m;
    for (const auto& t : tables) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
            nlohmann::ordered_json r;
            for (std::size_t i = 0; i < row.size(); ++i) {
                const auto& c = row[i];
                if (const auto* s = std::get_if<std::string>(&c))
                    r[t.columns[i]] = *s;
                else if (const auto* d = std::get_if<double>(&c))
                    r[t.columns[i]] = std::isfinite(*d) ? nlohmann::ordered_json(*d)
                                                        : nlohmann::ordered_json(format_number(*d));
                else
                    r[t.columns[i]] = std::get<long long>(c);
            }
            rows.push_back(r);
        }
        j[t.name] = rows;
    }
    return j;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("output: cannot write '" + path + "'");
    return f;
}

// Tables go to cfg.output (the first table, further tables to <stem>.<name>.csv for CSV),
// or to `out` when no output path is given.
void emit(const RunConfig& cfg, const Meta& meta, const std::vector<Table>& tables,
          std::ostream& out) {
    if (cfg.format == "json") {
        const std::string text = to_json(meta, tables).dump(2) + "\n";
        if (cfg.output.empty()) {
            out << text;
        } else {
            auto f = open_output(cfg.output);
            f << text;
        }
        return;
    }
    if (cfg.output.empty()) {
        for (const auto& t : tables)
            write_csv(out, meta, t);
        return;
    }
    for (std::size_t i = 0; i < tables.size(); ++i) {
        std::string path = cfg.output;
        if (i > 0) {
            const auto dot = path.rfind('.');
            const std::string stem =
                (dot == std::string::npos || dot < path.find_last_of('/') + 1) ? path
                                                                                : path.substr(0, dot);
            path = stem + "." + tables[i].name + ".csv";
        }
        auto f = open_output(path);
        write_csv(f, meta, tables[i]);
    }
}

struct PresetDefaults {
    double h;
    double tol;
};

PresetDefaults preset_defaults(const std::string& preset) {
    if (preset == "example1")
        return {0.01, 1e-10};
    return {0.001, 1e-7};
}

}  // namespace

DSEProblem build_problem(const RunConfig& cfg) {
    DSEProblem pr;
    if (cfg.preset == "example1") {
        pr = example1(cfg.n0, cfg.p0.value_or(cfg.n0), cfg.s, cfg.seed);
    } else if (cfg.preset == "example2") {
        const std::string name = cfg.A_path.empty() ? kRailFileName : cfg.A_path;
        pr = example2(read_matrix_market(resolve_data_file(name)), cfg.s, cfg.seed);
    } else if (cfg.preset == "surrogate100") {
        pr = surrogate100(cfg.s, cfg.seed);
    } else if (cfg.preset == "file") {
        if (cfg.A_path.empty())
            throw Error("--A: preset 'file' needs a Matrix Market file for A");
        const SparseOperator A = read_matrix_market(resolve_data_file(cfg.A_path));
        const SparseOperator B =
            cfg.B_path.empty() ? A : read_matrix_market(resolve_data_file(cfg.B_path));
        auto [E, F] = random_low_rank(A.dimension(), B.dimension(), cfg.s, cfg.seed);
        pr.A = A;
        pr.B = B;
        pr.E = std::move(E);
        pr.F = std::move(F);
        pr.t0 = 0.0;
        pr.Tf = 2.0;
    } else {
        throw Error("--preset: unknown preset '" + cfg.preset +
                    "' (allowed: example1, example2, surrogate100, file)");
    }
    if (cfg.sign)
        pr.sign = *cfg.sign;
    if (!cfg.interval.empty()) {
        if (cfg.interval.size() != 2 || !(cfg.interval[0] < cfg.interval[1]))
            throw Error("--interval: expected two values t0 < Tf");
        pr.t0 = cfg.interval[0];
        pr.Tf = cfg.interval[1];
    }
    return pr;
}

SolverConfig build_solver_config(const RunConfig& cfg, Method method) {
    const PresetDefaults d = preset_defaults(cfg.preset);
    SolverConfig c;
    c.method = method;
    if (cfg.basis == "eba")
        c.basis = BasisFlavor::EBA;
    else if (cfg.basis == "ba")
        c.basis = BasisFlavor::BA;
    else
        throw Error("--basis: expected eba or ba, got '" + cfg.basis + "'");
    c.tol = cfg.tol.value_or(d.tol);
    c.h = cfg.h.value_or(d.h);
    c.m_max = cfg.m_max;
    c.dtol = cfg.dtol;
    c.ros2.gamma = cfg.gamma;
    c.quadrature.nodes_per_interval = cfg.quad_nodes;
    c.quadrature.substeps = cfg.quad_substeps;
    if (cfg.norm == "fro")
        c.norm = NormChoice::Frobenius;
    else if (cfg.norm == "two")
        c.norm = NormChoice::Two;
    else
        throw Error("--norm: expected fro or two, got '" + cfg.norm + "'");
    c.store = StoreFactors::None;
    try {
        c.validate();
    } catch (const Error& e) {
        throw Error(std::string("invalid settings: ") + e.what());
    }
    return c;
}

namespace {

Meta base_meta(const std::string& command, const RunConfig& cfg, const DSEProblem& pr,
               const SolverConfig& sc) {
    return {
        {"command", command},
        {"preset", cfg.preset},
        {"n", std::to_string(pr.n())},
        {"p", std::to_string(pr.p())},
        {"s", std::to_string(pr.s())},
        {"seed", std::to_string(cfg.seed)},
        {"t0", format_number(pr.t0)},
        {"Tf", format_number(pr.Tf)},
        {"basis", to_string(sc.basis)},
        {"tol", format_number(sc.tol)},
        {"h", format_number(sc.h)},
        {"m_max", std::to_string(sc.m_max)},
        {"norm", cfg.norm},
    };
}

int factor_rank(const Matrix& G, double dtol) {
    if (G.size() == 0)
        return 0;
    const SvdResult s = svd(G);
    int l = 0;
    while (l < s.sigma.size() && s.sigma(l) > dtol)
        ++l;
    return l;
}

void dump_matrix(const std::string& path, const Matrix& M) {
    auto f = open_output(path);
    f << kCsvHeader << '\n';
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j)
            f << (j ? "," : "") << format_number(M(i, j));
        f << '\n';
    }
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    const DSEProblem pr = build_problem(cfg);
    SolverConfig sc = build_solver_config(cfg, parse_method(cfg.method));
    if (!cfg.factors.empty())
        sc.store = StoreFactors::Final;
    const auto start = std::chrono::steady_clock::now();
    const LowRankSolution sol = solve(pr, sc);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Meta meta = base_meta("solve", cfg, pr, sc);
    meta.emplace_back("method", to_string(sc.method));
    meta.emplace_back("converged", sol.converged ? "1" : "0");
    meta.emplace_back("m_final", std::to_string(sol.m_final));
    if (cfg.timing)
        meta.emplace_back("runtime_s", format_number(seconds));

    Table history{"history", {"m", "dim_A", "dim_B", "residual"}, {}};
    const Index dA = sc.basis == BasisFlavor::EBA ? 2 * pr.s() : pr.s();
    for (std::size_t i = 0; i < sol.residual_history.size(); ++i) {
        const auto m = static_cast<long long>(i + 1);
        history.rows.push_back({m, m * dA, m * dA, sol.residual_history[i]});
    }
    Table times{"times", {"k", "t", "residual_fro", "residual_two", "rank"}, {}};
    for (std::size_t k = 0; k < sol.trajectory.size(); ++k)
        times.rows.push_back({static_cast<long long>(k), sol.trajectory.times[k],
                              sol.final_residuals[k].frobenius, sol.final_residuals[k].two,
                              static_cast<long long>(factor_rank(sol.trajectory.G[k], sc.dtol))});

    out << fmt::format("solve {} n={} p={} s={} method={} basis={}\n", cfg.preset, pr.n(), pr.p(),
                       pr.s(), to_string(sc.method), to_string(sc.basis));
    for (std::size_t i = 0; i < sol.residual_history.size(); ++i)
        out << fmt::format("  m={:<3d} residual={:.3e}\n", i + 1, sol.residual_history[i]);
    for (const auto& w : sol.warnings)
        out << "warning: " << w << '\n';
    out << fmt::format("{} at m={} (basis sizes {} x {}), final residual {:.3e}, {:.2f} s\n",
                       sol.converged ? "converged" : "NOT converged", sol.decompA.steps,
                       sol.decompA.size(), sol.decompB.size(),
                       sol.residual_history.empty() ? 0.0 : sol.residual_history.back(), seconds);

    if (!cfg.output.empty())
        emit(cfg, meta, {history, times}, out);
    if (!cfg.factors.empty() && !sol.factors.empty()) {
        dump_matrix(cfg.factors + "_ZA.csv", sol.factors.back().ZA);
        dump_matrix(cfg.factors + "_ZB.csv", sol.factors.back().ZB);
    }
    return sol.converged ? 0 : 2;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
    if (cfg.methods.empty())
        throw Error("--methods: at least one method is required");
    std::vector<Method> methods;
    for (const auto& name : cfg.methods)
        methods.push_back(parse_method(name));
    const DSEProblem pr = build_problem(cfg);
    Table table{"compare", {"method", "m", "converged", "residual_fro_Tf", "residual_max"}, {}};
    if (cfg.timing)
        table.columns.push_back("runtime_s");
    bool all = true;
    SolverConfig first;
    for (std::size_t i = 0; i < methods.size(); ++i) {
        const SolverConfig sc = build_solver_config(cfg, methods[i]);
        if (i == 0)
            first = sc;
        const auto start = std::chrono::steady_clock::now();
        const LowRankSolution sol = solve(pr, sc);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all = all && sol.converged;
        std::vector<Cell> row{std::string(to_string(methods[i])),
                              static_cast<long long>(sol.decompA.steps),
                              static_cast<long long>(sol.converged ? 1 : 0),
                              sol.final_residuals.back().frobenius,
                              sol.residual_history.back()};
        if (cfg.timing)
            row.emplace_back(seconds);
        table.rows.push_back(std::move(row));
        out << fmt::format("{:<5} m={:<3d} runtime={:.3f}s residual(Tf)={:.3e} {}\n",
                           to_string(methods[i]), sol.decompA.steps, seconds,
                           sol.final_residuals.back().frobenius,
                           sol.converged ? "converged" : "NOT converged");
    }
    emit(cfg, base_meta("compare", cfg, pr, first), {table}, out);
    return all ? 0 : 2;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out) {
    const DSEProblem pr = build_problem(cfg);
    if (pr.n() > kDenseExpMaxDimension || pr.p() > kDenseExpMaxDimension)
        throw Error("bounds: the reference solution needs dense exponentials; n and p must not "
                    "exceed " + std::to_string(kDenseExpMaxDimension) + " (got n=" +
                    std::to_string(pr.n()) + ", p=" + std::to_string(pr.p()) + ")");
    SolverConfig sc = build_solver_config(cfg, Method::ExpQuadrature);
    pr.validate();
    const TimeGrid grid = TimeGrid::uniform(pr.t0, pr.Tf, sc.h);
    const Matrix Xref = integral_reference(pr, {pr.t0, pr.Tf}, sc.quadrature).back();
    const double mu2A = lognorm2(pr.A), mu2B = lognorm2(pr.B);
    const double E0 = norm2(pr.initial_value());

    const SparseOperator Bt = pr.B.transposed();
    const Matrix Es = pr.signed_E();
    ArnoldiProcess pa(pr.A, Es, sc.basis), pb(Bt, pr.F, sc.basis);
    Table table{"bounds", {"m", "error", "bound_alpha", "bound_beta", "bound_global"}, {}};
    bool dominated = true;
    for (Index m = 1; m <= sc.m_max; ++m) {
        if (!pa.can_step() || !pb.can_step())
            break;
        pa.step();
        pb.step();
        const auto dA = pa.decomposition();
        const auto dB = pb.decomposition();
        const ProjectedDSE proj = project(dA, dB, Es, pr.F, pr.t0, pr.Tf);
        const ProjectedTrajectory traj = solve_exp_quadrature(proj, grid, sc.quadrature);
        const Matrix Xm = dA.basis * traj.G.back() * dB.basis.transpose();
        const double err = norm2(Xref - Xm);
        const BoundReport r = bound_report(traj, proj, dA, dB, pr.F, mu2A, mu2B, pr.Tf, E0,
                                           sc.quadrature);
        const double ba = r.bound_alpha, bb = r.bound_beta, bg = r.bound_global;
        dominated = dominated && err <= ba && err <= bb;
        table.rows.push_back({static_cast<long long>(m), err, ba, bb, bg});
    }
    Meta meta = base_meta("bounds", cfg, pr, sc);
    meta.emplace_back("mu2A", format_number(mu2A));
    meta.emplace_back("mu2B", format_number(mu2B));
    if (!cfg.output.empty())
        out << fmt::format("bounds: {} rows, error below both bounds on every row: {}\n",
                           table.rows.size(), dominated ? "yes" : "no");
    emit(cfg, meta, {table}, out);
    return 0;
}

void add_common(CLI::App* app, RunConfig& cfg) {
    app->add_option("--preset", cfg.preset, "example1 | example2 | surrogate100 | file")
        ->check(CLI::IsMember({"example1", "example2", "surrogate100", "file"}));
    app->add_option("--n0", cfg.n0, "inner grid points per direction for A (example1)")
        ->check(CLI::Range(2, 1000));
    app->add_option("--p0", cfg.p0, "inner grid points per direction for B (default n0)")
        ->check(CLI::Range(2, 1000));
    app->add_option("--A", cfg.A_path, "Matrix Market file for A (example2, file)");
    app->add_option("--B", cfg.B_path, "Matrix Market file for B (file; default A)");
    app->add_option("--s", cfg.s, "columns of E and F")->check(CLI::PositiveNumber);
    app->add_option("--seed", cfg.seed, "seed of the random E, F");
    app->add_option("--sign", cfg.sign, "sign of the constant term E F^T")
        ->check(CLI::IsMember({-1, 1}));
    app->add_option("--interval", cfg.interval, "t0 Tf")->expected(2);
    app->add_option("--basis", cfg.basis, "eba | ba")->check(CLI::IsMember({"eba", "ba"}));
    app->add_option("--tol", cfg.tol, "residual tolerance")->check(CLI::PositiveNumber);
    app->add_option("--m-max", cfg.m_max, "maximal number of Krylov steps")
        ->check(CLI::PositiveNumber);
    app->add_option("--h", cfg.h, "time step")->check(CLI::PositiveNumber);
    app->add_option("--dtol", cfg.dtol, "singular value truncation")->check(CLI::NonNegativeNumber);
    app->add_option("--gamma", cfg.gamma, "ROS(2) parameter")->check(CLI::PositiveNumber);
    app->add_option("--quad-nodes", cfg.quad_nodes, "Gauss-Legendre nodes per piece")
        ->check(CLI::Range(2, 64));
    app->add_option("--quad-substeps", cfg.quad_substeps, "Gauss-Legendre pieces")
        ->check(CLI::Range(1, 1 << 20));
    app->add_option("--norm", cfg.norm, "fro | two")->check(CLI::IsMember({"fro", "two"}));
    app->add_option("--output", cfg.output, "output file");
    app->add_option("--format", cfg.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app->add_flag("--timing", cfg.timing, "add runtimes to the written tables");
}

const std::vector<std::string> kMethods{"exp", "bdf1", "bdf2", "bdf3", "ros2"};

// Flat key=value config: each line becomes --key value (several values separated by spaces).
std::vector<std::string> config_arguments(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("--config: cannot open '" + path + "'");
    std::vector<std::string> args;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("--config: line " + std::to_string(lineno) + " is not key=value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "timing") {
            if (value == "true" || value == "1")
                args.push_back("--timing");
            continue;
        }
        args.push_back("--" + key);
        std::istringstream vs(value);
        for (std::string v; vs >> v;)
            args.push_back(v);
    }
    return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Krylov projection solvers for differential Sylvester equations", "sylkrylov"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);
    std::string config_path;

    auto* solve_cmd = app.add_subcommand("solve", "solve one problem, write residual histories");
    auto* compare_cmd = app.add_subcommand("compare", "run several methods on one problem");
    auto* bounds_cmd = app.add_subcommand("bounds", "measured error against the error bounds");
    for (auto* sub : {solve_cmd, compare_cmd, bounds_cmd}) {
        add_common(sub, cfg);
        sub->add_option("--config", config_path, "flat key=value file with flag values");
    }
    solve_cmd->add_option("--method", cfg.method, "exp | bdf1 | bdf2 | bdf3 | ros2")
        ->check(CLI::IsMember(kMethods));
    solve_cmd->add_option("--factors", cfg.factors, "write final factors to <prefix>_ZA.csv, _ZB.csv");
    compare_cmd->add_option("--methods", cfg.methods, "comma separated methods")
        ->delimiter(',')
        ->required()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    bounds_cmd->add_option("--method", cfg.method, "ignored; bounds use exp")
        ->check(CLI::IsMember(kMethods));

    std::vector<std::string> args(argv + 1, argv + argc);
    // Config file values go first so that explicit flags override them.
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            std::vector<std::string> extra;
            try {
                extra = config_arguments(args[i + 1]);
            } catch (const std::exception& e) {
                err << "error: " << e.what() << '\n';
                return 1;
            }
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            args.insert(args.begin() + 1, extra.begin(), extra.end());
            break;
        }
    }
    const bool bounds_default_m = std::find(args.begin(), args.end(), "--m-max") == args.end();
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        for (auto* sub : app.get_subcommands())
            out << sub->help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    try {
        if (solve_cmd->parsed())
            return cmd_solve(cfg, out);
        if (compare_cmd->parsed())
            return cmd_compare(cfg, out);
        if (bounds_default_m)
            cfg.m_max = 12;
        return cmd_bounds(cfg, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace sylkrylov::cli
