#include "sylkrylov/projection.hpp"

#include <cmath>
#include <string>

namespace sylkrylov {

Matrix ProjectedDSE::rhs(const Matrix& Y) const {
    Matrix out = TA * Y;
    out.noalias() += Y * TB.transpose();
    out.noalias() += Em * Fm.transpose();
    return out;
}

void ProjectedTrajectory::push_back(double t, Matrix g, Index dA) {
    times.push_back(t);
    Gbar.push_back(g.bottomRows(dA));
    G.push_back(std::move(g));
}

ProjectedDSE project(const BlockKrylovDecomposition& decompA,
                     const BlockKrylovDecomposition& decompB, const Matrix& E, const Matrix& F,
                     double t0, double Tf) {
    if (E.rows() != decompA.dimension())
        throw DimensionError("project: E rows do not match the A-side basis");
    if (F.rows() != decompB.dimension())
        throw DimensionError("project: F rows do not match the B-side basis");
    if (E.cols() != F.cols())
        throw DimensionError("project: E and F column counts differ");
    if (!(t0 < Tf))
        throw Error("project: t0 must be smaller than Tf");
    ProjectedDSE p;
    p.TA = decompA.T;
    p.TB = decompB.T;
    p.Em = decompA.basis.transpose() * E;
    p.Fm = decompB.basis.transpose() * F;
    p.TnextA = decompA.T_next;
    p.TnextB = decompB.T_next;
    p.dA = decompA.block_width;
    p.dB = decompB.block_width;
    p.t0 = t0;
    p.Tf = Tf;
    return p;
}

ResidualNorm residual_norm(const Matrix& G, const ProjectedDSE& proj) {
    if (G.rows() != proj.rows() || G.cols() != proj.cols())
        throw DimensionError("residual_norm: G does not match the projected problem");
    const Matrix MA = proj.TnextA * G.bottomRows(proj.dA);
    const Matrix MB = proj.TnextB * G.rightCols(proj.dB).transpose();
    ResidualNorm r;
    r.frobenius = std::sqrt(MA.squaredNorm() + MB.squaredNorm());
    r.two = std::max(norm2(MA), norm2(MB));
    return r;
}

std::vector<ResidualNorm> residual_norms(const ProjectedTrajectory& traj,
                                         const ProjectedDSE& proj) {
    std::vector<ResidualNorm> out;
    out.reserve(traj.size());
    for (const auto& G : traj.G)
        out.push_back(residual_norm(G, proj));
    return out;
}

ExplicitResidual assemble_residual_explicit(const SparseOperator& A, const SparseOperator& B,
                                            const Matrix& E, const Matrix& F,
                                            const BlockKrylovDecomposition& decompA,
                                            const BlockKrylovDecomposition& decompB,
                                            const ProjectedDSE& proj, const Matrix& G) {
    const Index n = A.dimension();
    const Index p = B.dimension();
    if (n * p > kDenseOracleMaxEntries)
        throw DimensionError("assemble_residual_explicit: n*p = " + std::to_string(n * p) +
                             " exceeds the dense oracle limit");
    const Matrix& V = decompA.basis;
    const Matrix& W = decompB.basis;
    const Matrix X = V * G * W.transpose();
    const Matrix Xdot = V * proj.rhs(G) * W.transpose();
    ExplicitResidual out;
    out.matrix = Xdot - A.apply(X) - X * B.matrix() - E * F.transpose();
    out.frobenius = out.matrix.norm();
    return out;
}

}  // namespace sylkrylov
