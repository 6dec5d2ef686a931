#pragma once

#include "sylkrylov/krylov.hpp"

#include <vector>

namespace sylkrylov {

/// Reduced equation  dY/dt = TA Y + Y TB^T + Em Fm^T  on [t0, Tf].
struct ProjectedDSE {
    Matrix TA;      // V^T A V
    Matrix TB;      // W^T B^T W
    Matrix Em;      // V^T E
    Matrix Fm;      // W^T F
    Matrix TnextA;  // coupling block of the A-side decomposition
    Matrix TnextB;  // coupling block of the B^T-side decomposition
    Index dA = 0;
    Index dB = 0;
    double t0 = 0.0;
    double Tf = 1.0;

    Index rows() const { return TA.rows(); }
    Index cols() const { return TB.rows(); }
    /// TA Y + Y TB^T + Em Fm^T
    Matrix rhs(const Matrix& Y) const;
};

/// Small solutions G(t_k) on a time grid. Gbar[k] holds the last dA rows of G[k].
struct ProjectedTrajectory {
    std::vector<double> times;
    std::vector<Matrix> G;
    std::vector<Matrix> Gbar;

    std::size_t size() const { return times.size(); }
    void push_back(double t, Matrix g, Index dA);
};

ProjectedDSE project(const BlockKrylovDecomposition& decompA,
                     const BlockKrylovDecomposition& decompB, const Matrix& E, const Matrix& F,
                     double t0, double Tf);

struct ResidualNorm {
    double frobenius = 0.0;
    double two = 0.0;
};

/// Residual norms of X = V G W^T from small matrices only:
///   |R|_F^2 = |TnextA Ga|_F^2 + |TnextB Gb^T|_F^2,   |R|_2 = max(|TnextA Ga|_2, |TnextB Gb^T|_2),
/// where Ga is the last dA rows of G and Gb the last dB columns.
ResidualNorm residual_norm(const Matrix& G, const ProjectedDSE& proj);
std::vector<ResidualNorm> residual_norms(const ProjectedTrajectory& traj,
                                         const ProjectedDSE& proj);

struct ExplicitResidual {
    Matrix matrix;
    double frobenius = 0.0;
};

inline constexpr Index kDenseOracleMaxEntries = 1'000'000;

/// R = dX/dt - A X - X B - E F^T assembled densely, with dX/dt taken from the reduced
/// equation. Oracle for residual_norms; requires n * p <= 1e6.
ExplicitResidual assemble_residual_explicit(const SparseOperator& A, const SparseOperator& B,
                                            const Matrix& E, const Matrix& F,
                                            const BlockKrylovDecomposition& decompA,
                                            const BlockKrylovDecomposition& decompB,
                                            const ProjectedDSE& proj, const Matrix& G);

}  // namespace sylkrylov
