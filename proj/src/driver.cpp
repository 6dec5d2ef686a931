#include "sylkrylov/driver.hpp"

#include "sylkrylov/sylvester.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sylkrylov {

Matrix DSEProblem::initial_value() const {
    if (zero_initial())
        return Matrix::Zero(n(), p());
    return Z0 * Z0t.transpose();
}

namespace {

void require_full_rank(const Matrix& M, const char* name) {
    const SvdResult s = svd(M);
    const double top = s.sigma.size() ? s.sigma(0) : 0.0;
    const double bottom = s.sigma.size() ? s.sigma(s.sigma.size() - 1) : 0.0;
    if (!(top > 0.0) || bottom <= 1e-12 * top)
        throw Error(std::string("problem: ") + name + " is not of full column rank");
}

}  // namespace

void DSEProblem::validate(bool allow_rank_deficient) const {
    if (n() < 1 || p() < 1)
        throw DimensionError("problem: A and B must be nonempty");
    if (E.rows() != n())
        throw DimensionError("problem: E has " + std::to_string(E.rows()) + " rows, A is " +
                             std::to_string(n()) + "x" + std::to_string(n()));
    if (F.rows() != p())
        throw DimensionError("problem: F has " + std::to_string(F.rows()) + " rows, B is " +
                             std::to_string(p()) + "x" + std::to_string(p()));
    if (E.cols() != F.cols())
        throw DimensionError("problem: E and F must have the same number of columns");
    if (E.cols() < 1)
        throw DimensionError("problem: s must be at least 1");
    require_finite(E, "problem E");
    require_finite(F, "problem F");
    if (!(t0 < Tf) || !std::isfinite(t0) || !std::isfinite(Tf))
        throw Error("problem: interval must satisfy t0 < Tf");
    if (sign != 1.0 && sign != -1.0)
        throw Error("problem: sign must be +1 or -1");
    if (Z0.cols() != Z0t.cols() || (Z0.cols() > 0 && (Z0.rows() != n() || Z0t.rows() != p())))
        throw DimensionError("problem: initial factors Z0, Z0t have inconsistent shapes");
    if (!allow_rank_deficient) {
        require_full_rank(E, "E");
        require_full_rank(F, "F");
    }
}

const char* to_string(Method m) {
    switch (m) {
    case Method::ExpQuadrature: return "exp";
    case Method::BDF1: return "bdf1";
    case Method::BDF2: return "bdf2";
    case Method::BDF3: return "bdf3";
    case Method::ROS2: return "ros2";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    if (name == "exp")
        return Method::ExpQuadrature;
    if (name == "bdf1")
        return Method::BDF1;
    if (name == "bdf2")
        return Method::BDF2;
    if (name == "bdf3")
        return Method::BDF3;
    if (name == "ros2")
        return Method::ROS2;
    throw Error("unknown method '" + name + "' (allowed: exp, bdf1, bdf2, bdf3, ros2)");
}

int bdf_order(Method m) {
    switch (m) {
    case Method::BDF1: return 1;
    case Method::BDF2: return 2;
    case Method::BDF3: return 3;
    default: return 0;
    }
}

void SolverConfig::validate() const {
    if (!(tol > 0.0))
        throw Error("config: tol must be positive");
    if (m_max < 1)
        throw Error("config: m_max must be at least 1");
    if (!(dtol >= 0.0))
        throw Error("config: dtol must be nonnegative");
    if (!(h > 0.0) || !std::isfinite(h))
        throw Error("config: h must be positive");
    ros2.validate();
    quadrature.validate();
}

ProjectedTrajectory integrate_projected(const ProjectedDSE& proj, const Matrix& Y0,
                                        const TimeGrid& grid, const SolverConfig& config) {
    switch (config.method) {
    case Method::ExpQuadrature:
        if (Y0.size() > 0 && Y0.cwiseAbs().maxCoeff() != 0.0)
            throw UnsupportedError(
                "exp method: nonzero initial value is not supported (use bdf or ros2)");
        return solve_exp_quadrature(proj, grid, config.quadrature);
    case Method::BDF1:
    case Method::BDF2:
    case Method::BDF3:
        return solve_bdf(proj, Y0, BDFSpec::of_order(bdf_order(config.method)), grid);
    case Method::ROS2:
        return solve_ros2(proj, Y0, config.ros2, grid);
    }
    throw Error("integrate_projected: unknown method");
}

namespace {

template <class Fn>
auto annotate_m(Index m, Fn&& fn) -> decltype(fn()) {
    const std::string at = "m = " + std::to_string(m) + ": ";
    try {
        return fn();
    } catch (const SpectralClashError& e) {
        throw SpectralClashError(at + e.what());
    } catch (const SingularError& e) {
        throw SingularError(at + e.what());
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(at + e.what());
    } catch (const UnsupportedError& e) {
        throw UnsupportedError(at + e.what());
    } catch (const DimensionError& e) {
        throw DimensionError(at + e.what());
    } catch (const Error& e) {
        throw Error(at + e.what());
    }
}

double monitored(const std::vector<ResidualNorm>& norms, NormChoice choice) {
    double out = 0.0;
    for (const auto& r : norms)
        out = std::max(out, choice == NormChoice::Frobenius ? r.frobenius : r.two);
    return out;
}

}  // namespace

LowRankSolution solve(const DSEProblem& problem, const SolverConfig& config) {
    config.validate();
    problem.validate(config.allow_rank_deficient);
    if (config.method == Method::ExpQuadrature && !problem.zero_initial() &&
        problem.Z0.cwiseAbs().maxCoeff() != 0.0 && problem.Z0t.cwiseAbs().maxCoeff() != 0.0)
        throw UnsupportedError(
            "exp method: nonzero initial value is not supported (use bdf or ros2)");

    const SparseOperator Bt = problem.B.transposed();
    const Matrix Es = problem.signed_E();
    const TimeGrid grid = TimeGrid::uniform(problem.t0, problem.Tf, config.h);

    ArnoldiProcess pa(problem.A, Es, config.basis, config.tolerances);
    ArnoldiProcess pb(Bt, problem.F, config.basis, config.tolerances);

    LowRankSolution sol;
    sol.times = grid.times;
    if (pa.start_rank_deficient() || pb.start_rank_deficient())
        sol.warnings.push_back("starting block is numerically rank deficient");

    double best = std::numeric_limits<double>::infinity();
    for (Index m = 1; m <= config.m_max; ++m) {
        if (!pa.can_step() || !pb.can_step()) {
            if (pa.broken_down() || pb.broken_down())
                sol.breakdown = true;
            else
                sol.warnings.push_back("basis growth stopped at the operator dimension");
            break;
        }
        annotate_m(m, [&] {
            pa.step();
            pb.step();
            return 0;
        });
        BlockKrylovDecomposition dA = pa.decomposition();
        BlockKrylovDecomposition dB = pb.decomposition();
        ProjectedDSE proj = project(dA, dB, Es, problem.F, problem.t0, problem.Tf);
        Matrix Y0 = Matrix::Zero(proj.rows(), proj.cols());
        if (!problem.zero_initial())
            Y0 = (dA.basis.transpose() * problem.Z0) * (dB.basis.transpose() * problem.Z0t).transpose();
        ProjectedTrajectory traj =
            annotate_m(m, [&] { return integrate_projected(proj, Y0, grid, config); });
        std::vector<ResidualNorm> norms = residual_norms(traj, proj);
        const double r = monitored(norms, config.norm);
        sol.residual_history.push_back(r);
        sol.m_final = m;
        if (!std::isfinite(r))
            throw ConvergenceError("m = " + std::to_string(m) + ": residual is not finite");
        if (r <= best || r < config.tol) {
            best = r;
            sol.decompA = std::move(dA);
            sol.decompB = std::move(dB);
            sol.projected = std::move(proj);
            sol.trajectory = std::move(traj);
            sol.final_residuals = std::move(norms);
        }
        if (r < config.tol) {
            sol.converged = true;
            break;
        }
    }
    if (pa.broken_down() || pb.broken_down())
        sol.breakdown = true;
    if (sol.residual_history.empty())
        throw Error("solve: no Krylov step could be taken");

    if (!problem.zero_initial()) {
        const Matrix& V = sol.decompA.basis;
        const Matrix& W = sol.decompB.basis;
        const Matrix PZ0 = problem.Z0 - V * (V.transpose() * problem.Z0);
        const Matrix PZ0t = problem.Z0t - W * (W.transpose() * problem.Z0t);
        // X0 - V V^T X0 W W^T = (I - P_V) X0 + P_V X0 (I - P_W)
        const Matrix X0 = problem.initial_value();
        if (problem.n() * problem.p() <= kDenseOracleMaxEntries) {
            const Matrix proj0 = V * (V.transpose() * X0 * W) * W.transpose();
            sol.unprojected_initial_norm = (X0 - proj0).norm();
        } else {
            sol.unprojected_initial_norm =
                (PZ0.norm() * problem.Z0t.norm() + problem.Z0.norm() * PZ0t.norm());
        }
        if (sol.unprojected_initial_norm > 0.0)
            sol.warnings.push_back("initial value has a component outside the Krylov bases (norm " +
                                   std::to_string(sol.unprojected_initial_norm) + ")");
    }

    std::vector<std::size_t> slots;
    if (config.store == StoreFactors::All)
        for (std::size_t k = 0; k < sol.trajectory.size(); ++k)
            slots.push_back(k);
    else if (config.store == StoreFactors::Final)
        slots.push_back(sol.trajectory.size() - 1);
    for (std::size_t k : slots) {
        sol.factor_times.push_back(k);
        sol.factors.push_back(truncate_factorize(sol.trajectory.G[k], sol.decompA.basis,
                                                 sol.decompB.basis, config.dtol));
    }
    return sol;
}

Matrix reconstruct_dense(const LowRankSolution& sol, std::size_t slot) {
    if (slot >= sol.factors.size())
        throw Error("reconstruct_dense: no factors stored at slot " + std::to_string(slot));
    const LowRankFactors& f = sol.factors[slot];
    if (f.ZA.rows() * f.ZB.rows() > kDenseOracleMaxEntries)
        throw DimensionError("reconstruct_dense: n*p exceeds the dense limit");
    if (f.rank() == 0)
        return Matrix::Zero(f.ZA.rows(), f.ZB.rows());
    return f.ZA * f.ZB.transpose();
}

}  // namespace sylkrylov
