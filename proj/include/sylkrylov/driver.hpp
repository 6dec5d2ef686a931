#pragma once

#include "sylkrylov/bounds.hpp"
#include "sylkrylov/integrators.hpp"

#include <string>
#include <vector>

namespace sylkrylov {

/// dX/dt = A X + X B + sign * E F^T on [t0, Tf], X(t0) = Z0 Z0t^T.
struct DSEProblem {
    SparseOperator A;  // n x n
    SparseOperator B;  // p x p
    Matrix E;          // n x s
    Matrix F;          // p x s
    double t0 = 0.0;
    double Tf = 1.0;
    Matrix Z0;   // n x r, empty (or zero columns) for X0 = 0
    Matrix Z0t;  // p x r
    /// Sign of the constant term, +1 or -1.
    double sign = 1.0;

    Index n() const { return A.dimension(); }
    Index p() const { return B.dimension(); }
    Index s() const { return E.cols(); }
    bool zero_initial() const { return Z0.cols() == 0; }
    /// sign * E, the block that enters the Krylov start and the projected equation.
    Matrix signed_E() const { return sign * E; }
    Matrix initial_value() const;

    /// Throws DimensionError / Error naming the offending field. `allow_rank_deficient`
    /// relaxes the full-column-rank requirement on E and F.
    void validate(bool allow_rank_deficient = false) const;
};

enum class Method { ExpQuadrature, BDF1, BDF2, BDF3, ROS2 };

const char* to_string(Method m);
/// Parses exp | bdf1 | bdf2 | bdf3 | ros2.
Method parse_method(const std::string& name);
int bdf_order(Method m);

enum class NormChoice { Frobenius, Two };

enum class StoreFactors {
    All,    ///< factors at every grid time
    Final,  ///< factors at Tf only
    None,
};

struct SolverConfig {
    Method method = Method::ExpQuadrature;
    BasisFlavor basis = BasisFlavor::EBA;
    double tol = 1e-10;
    Index m_max = 30;
    double dtol = 1e-12;
    double h = 0.01;
    ROS2Spec ros2{};
    QuadratureSpec quadrature{};
    NormChoice norm = NormChoice::Frobenius;
    StoreFactors store = StoreFactors::Final;
    /// Accept rank-deficient E or F (degenerate test inputs).
    bool allow_rank_deficient = false;
    Tolerances tolerances{};

    void validate() const;
};

struct LowRankSolution {
    std::vector<double> times;
    /// Indices into `times` for which factors were stored, matching `factors`.
    std::vector<std::size_t> factor_times;
    std::vector<LowRankFactors> factors;
    /// Max-over-grid residual norm after each Krylov size m = 1..m_final.
    std::vector<double> residual_history;
    /// Residual norms (both kinds) on the grid for the returned trajectory.
    std::vector<ResidualNorm> final_residuals;
    Index m_final = 0;
    bool converged = false;
    bool breakdown = false;
    /// |X0 - V V^T X0 W W^T|_F, the part of a nonzero initial value outside the bases.
    double unprojected_initial_norm = 0.0;
    std::vector<std::string> warnings;

    BlockKrylovDecomposition decompA;
    BlockKrylovDecomposition decompB;
    ProjectedDSE projected;
    ProjectedTrajectory trajectory;
};

/// Grows both Krylov bases in lockstep, re-solves the projected problem at every m and
/// stops once the max-over-grid residual norm drops below tol.
LowRankSolution solve(const DSEProblem& problem, const SolverConfig& config);

/// ZA ZB^T at factor slot `slot`. Requires n * p <= 1e6.
Matrix reconstruct_dense(const LowRankSolution& sol, std::size_t slot);

/// Integrates the projected problem with the configured method.
ProjectedTrajectory integrate_projected(const ProjectedDSE& proj, const Matrix& Y0,
                                        const TimeGrid& grid, const SolverConfig& config);

}  // namespace sylkrylov
