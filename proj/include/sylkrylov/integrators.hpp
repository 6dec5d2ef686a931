#pragma once

#include "sylkrylov/projection.hpp"
#include "sylkrylov/quadrature.hpp"

#include <vector>

namespace sylkrylov {

/// Uniform grid t0, t0 + h, ..., Tf with N = ceil((Tf - t0) / h) steps. The last step is
/// shortened so that the grid ends exactly at Tf.
struct TimeGrid {
    double t0 = 0.0;
    double Tf = 1.0;
    double h = 0.01;
    std::vector<double> times;

    static TimeGrid uniform(double t0, double Tf, double h);
    Index steps() const { return static_cast<Index>(times.size()) - 1; }
    double step(Index k) const;  // times[k + 1] - times[k], h for every full step
    bool last_step_shortened() const;
};

/// BDF(p) coefficients: Y_{k+1} = sum_i alpha_i Y_{k-i} + h beta F(Y_{k+1}).
struct BDFSpec {
    int order = 1;
    double beta = 1.0;
    std::vector<double> alpha{1.0};

    static BDFSpec of_order(int p);
};

struct ROS2Spec {
    double gamma = 1.0 + 0.70710678118654752440;

    void validate() const;
};

enum class ExpQuadratureMode {
    Semigroup,  ///< one quadrature per distinct step length, chained through e^{hT}
    PerNode,    ///< every grid time integrated from t0, exponentials per node
};

/// G(t) = int_{t0}^{t} e^{(t - u) TA} Em Fm^T e^{(t - u) TB^T} du on the grid (zero initial value).
ProjectedTrajectory solve_exp_quadrature(const ProjectedDSE& proj, const TimeGrid& grid,
                                         const QuadratureSpec& q,
                                         ExpQuadratureMode mode = ExpQuadratureMode::Semigroup);

/// BDF(p) on the grid starting from Y0. Orders ramp 1, 2, ..., p over the first steps; a
/// shortened last step is taken with BDF(1).
ProjectedTrajectory solve_bdf(const ProjectedDSE& proj, const Matrix& Y0, const BDFSpec& spec,
                              const TimeGrid& grid);

/// Two-stage Rosenbrock scheme of order 2.
ProjectedTrajectory solve_ros2(const ProjectedDSE& proj, const Matrix& Y0, const ROS2Spec& spec,
                               const TimeGrid& grid);

struct LowRankFactors {
    Matrix ZA;  // n x l
    Matrix ZB;  // p x l
    Index rank() const { return ZA.cols(); }
};

/// Keeps the singular values of G above dtol: ZA = basisA U_l S_l^{1/2}, ZB = basisB V_l S_l^{1/2}.
LowRankFactors truncate_factorize(const Matrix& G, const Matrix& basisA, const Matrix& basisB,
                                  double dtol);

}  // namespace sylkrylov
