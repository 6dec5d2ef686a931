#include "sylkrylov/integrators.hpp"

#include "sylkrylov/sylvester.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>

namespace sylkrylov {

TimeGrid TimeGrid::uniform(double t0, double Tf, double h) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw Error("TimeGrid: step h must be positive");
    if (!(t0 < Tf))
        throw Error("TimeGrid: t0 must be smaller than Tf");
    const double ratio = (Tf - t0) / h;
    double N = std::ceil(ratio);
    if (std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio))
        N = std::round(ratio);
    N = std::max(N, 1.0);
    if (N > 1e8)
        throw Error("TimeGrid: too many steps");
    TimeGrid g;
    g.t0 = t0;
    g.Tf = Tf;
    g.h = h;
    const auto steps = static_cast<Index>(N);
    g.times.resize(static_cast<std::size_t>(steps) + 1);
    for (Index k = 0; k < steps; ++k)
        g.times[static_cast<std::size_t>(k)] = t0 + static_cast<double>(k) * h;
    g.times.back() = Tf;
    return g;
}

bool TimeGrid::last_step_shortened() const {
    const double last = times.back() - times[times.size() - 2];
    return std::abs(last - h) > 1e-9 * h;
}

double TimeGrid::step(Index k) const {
    if (k < 0 || k >= steps())
        throw Error("TimeGrid::step: index out of range");
    if (k == steps() - 1 && last_step_shortened())
        return times.back() - times[times.size() - 2];
    return h;
}

BDFSpec BDFSpec::of_order(int p) {
    BDFSpec s;
    s.order = p;
    switch (p) {
    case 1:
        s.beta = 1.0;
        s.alpha = {1.0};
        break;
    case 2:
        s.beta = 2.0 / 3.0;
        s.alpha = {4.0 / 3.0, -1.0 / 3.0};
        break;
    case 3:
        s.beta = 6.0 / 11.0;
        s.alpha = {18.0 / 11.0, -9.0 / 11.0, 2.0 / 11.0};
        break;
    default:
        throw Error("BDFSpec: order must be 1, 2 or 3, got " + std::to_string(p));
    }
    return s;
}

void ROS2Spec::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw Error("ROS2Spec: gamma must be positive");
}

namespace {

void check_initial(const ProjectedDSE& proj, const Matrix& Y0) {
    if (Y0.rows() != proj.rows() || Y0.cols() != proj.cols())
        throw DimensionError("initial value has shape " + std::to_string(Y0.rows()) + "x" +
                             std::to_string(Y0.cols()) + ", projected problem is " +
                             std::to_string(proj.rows()) + "x" + std::to_string(proj.cols()));
}

Matrix shifted(const Matrix& T, double scale, double shift) {
    Matrix M = scale * T;
    M.diagonal().array() -= shift;
    return M;
}

// Size of the terms of scale * TA - shift * I and scale * TB - shift * I before cancellation.
double term_scale(const ProjectedDSE& proj, double scale, double shift) {
    const double q = static_cast<double>(proj.rows()), r = static_cast<double>(proj.cols());
    return std::abs(scale) * (proj.TA.norm() + proj.TB.norm()) +
           std::abs(shift) * (std::sqrt(q) + std::sqrt(r));
}

[[noreturn]] void rethrow_at_step(const SingularError& e, Index k) {
    throw SpectralClashError(std::string(e.what()) + " (time step " + std::to_string(k + 1) + ")");
}

}  // namespace

ProjectedTrajectory solve_exp_quadrature(const ProjectedDSE& proj, const TimeGrid& grid,
                                         const QuadratureSpec& q, ExpQuadratureMode mode) {
    q.validate();
    const Matrix C = proj.Em * proj.Fm.transpose();
    const Matrix R = proj.TB.transpose();
    ProjectedTrajectory traj;
    traj.push_back(grid.times.front(), Matrix::Zero(proj.rows(), proj.cols()), proj.dA);
    if (mode == ExpQuadratureMode::PerNode) {
        for (Index k = 1; k <= grid.steps(); ++k) {
            const double t = grid.times[static_cast<std::size_t>(k)];
            traj.push_back(t, exponential_integral_direct(proj.TA, R, C, t - grid.t0, q),
                           proj.dA);
        }
        return traj;
    }
    const ExponentialStep full = exponential_step(proj.TA, R, C, grid.h, q);
    std::optional<ExponentialStep> last;
    if (grid.last_step_shortened())
        last = exponential_step(proj.TA, R, C, grid.step(grid.steps() - 1), q);
    Matrix G = traj.G.front();
    for (Index k = 0; k < grid.steps(); ++k) {
        const ExponentialStep& st = (last && k == grid.steps() - 1) ? *last : full;
        Matrix next = st.Q;
        next.noalias() += st.PL * G * st.PR;
        G = std::move(next);
        traj.push_back(grid.times[static_cast<std::size_t>(k + 1)], G, proj.dA);
    }
    return traj;
}

ProjectedTrajectory solve_bdf(const ProjectedDSE& proj, const Matrix& Y0, const BDFSpec& spec,
                              const TimeGrid& grid) {
    check_initial(proj, Y0);
    const BDFSpec checked = BDFSpec::of_order(spec.order);
    if (spec.beta != checked.beta || spec.alpha != checked.alpha)
        throw Error("BDFSpec: coefficients do not match order " + std::to_string(spec.order));
    const Matrix C = proj.Em * proj.Fm.transpose();

    // One cached solver per distinct (h beta).
    std::map<double, SylvesterSolver> solvers;
    auto solver_for = [&](double hb) -> const SylvesterSolver& {
        auto it = solvers.find(hb);
        if (it == solvers.end())
            it = solvers
                     .emplace(hb, SylvesterSolver(shifted(proj.TA, hb, 0.5),
                                                  shifted(proj.TB, hb, 0.5), default_tolerances(),
                                                  term_scale(proj, hb, 0.5)))
                     .first;
        return it->second;
    };

    ProjectedTrajectory traj;
    traj.push_back(grid.times.front(), Y0, proj.dA);
    for (Index k = 0; k < grid.steps(); ++k) {
        const double hk = grid.step(k);
        const bool shortened = hk != grid.h;
        const int p = shortened ? 1 : std::min<int>(spec.order, static_cast<int>(k) + 1);
        const BDFSpec s = BDFSpec::of_order(p);
        const double hb = hk * s.beta;
        Matrix rhs = hb * C;
        for (int i = 0; i < p; ++i)
            rhs += s.alpha[static_cast<std::size_t>(i)] * traj.G[traj.G.size() - 1 - i];
        Matrix Y;
        try {
            Y = solver_for(hb).solve(rhs);
        } catch (const SingularError& e) {
            rethrow_at_step(e, k);
        }
        traj.push_back(grid.times[static_cast<std::size_t>(k + 1)], std::move(Y), proj.dA);
    }
    return traj;
}

ProjectedTrajectory solve_ros2(const ProjectedDSE& proj, const Matrix& Y0, const ROS2Spec& spec,
                               const TimeGrid& grid) {
    check_initial(proj, Y0);
    spec.validate();
    std::map<double, SylvesterSolver> solvers;
    auto solver_for = [&](double hk) -> const SylvesterSolver& {
        auto it = solvers.find(hk);
        if (it == solvers.end()) {
            const double shift = 1.0 / (2.0 * hk);
            it = solvers
                     .emplace(hk, SylvesterSolver(shifted(proj.TA, spec.gamma, shift),
                                                  shifted(proj.TB, spec.gamma, shift),
                                                  default_tolerances(),
                                                  term_scale(proj, spec.gamma, shift)))
                     .first;
        }
        return it->second;
    };

    ProjectedTrajectory traj;
    traj.push_back(grid.times.front(), Y0, proj.dA);
    Matrix Y = Y0;
    for (Index k = 0; k < grid.steps(); ++k) {
        const double hk = grid.step(k);
        try {
            const SylvesterSolver& solver = solver_for(hk);
            const Matrix K1 = solver.solve(proj.rhs(Y));
            Matrix r2 = proj.rhs(Y + K1);
            r2 -= (2.0 / hk) * K1;
            const Matrix K2 = solver.solve(r2);
            Y += 1.5 * K1 + 0.5 * K2;
        } catch (const SingularError& e) {
            rethrow_at_step(e, k);
        }
        traj.push_back(grid.times[static_cast<std::size_t>(k + 1)], Y, proj.dA);
    }
    return traj;
}

LowRankFactors truncate_factorize(const Matrix& G, const Matrix& basisA, const Matrix& basisB,
                                  double dtol) {
    if (!(dtol >= 0.0))
        throw Error("truncate_factorize: dtol must be nonnegative");
    if (basisA.cols() != G.rows() || basisB.cols() != G.cols())
        throw DimensionError("truncate_factorize: bases do not match G");
    LowRankFactors out;
    if (G.size() == 0) {
        out.ZA.resize(basisA.rows(), 0);
        out.ZB.resize(basisB.rows(), 0);
        return out;
    }
    const SvdResult s = svd(G);
    Index l = 0;
    while (l < s.sigma.size() && s.sigma(l) > dtol)
        ++l;
    const Vector root = s.sigma.head(l).cwiseSqrt();
    out.ZA = basisA * (s.U.leftCols(l) * root.asDiagonal());
    out.ZB = basisB * (s.V.leftCols(l) * root.asDiagonal());
    return out;
}

}  // namespace sylkrylov
