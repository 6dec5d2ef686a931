#include "sylkrylov/sylvester.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>
#include <vector>

namespace sylkrylov {

SylvesterSystem SylvesterSystem::from_factors(Matrix left, Matrix right, const Matrix& E,
                                              const Matrix& F) {
    if (E.cols() != F.cols())
        throw DimensionError("SylvesterSystem: factor column counts differ");
    return {std::move(left), std::move(right), E * F.transpose()};
}

namespace {

struct Block {
    Index start;
    Index size;
};

// Diagonal blocks of a quasi upper triangular matrix (1x1 or 2x2).
std::vector<Block> diagonal_blocks(const Matrix& S) {
    std::vector<Block> blocks;
    const Index n = S.rows();
    Index i = 0;
    while (i < n) {
        if (i + 1 < n && S(i + 1, i) != 0.0) {
            blocks.push_back({i, 2});
            i += 2;
        } else {
            blocks.push_back({i, 1});
            i += 1;
        }
    }
    return blocks;
}

void check_sylvester_dims(const Matrix& left, const Matrix& right, const Matrix& rhs) {
    require_square(left, "sylvester left");
    require_square(right, "sylvester right");
    if (rhs.rows() != left.rows() || rhs.cols() != right.rows())
        throw DimensionError("sylvester: rhs is " + std::to_string(rhs.rows()) + "x" +
                             std::to_string(rhs.cols()) + ", expected " +
                             std::to_string(left.rows()) + "x" + std::to_string(right.rows()));
}

}  // namespace

SylvesterSolver::SylvesterSolver(const Matrix& left, const Matrix& right, const Tolerances& tol,
                                 std::optional<double> scale)
    : left_schur_(real_schur(left, tol)),
      right_schur_(real_schur(right, tol)),
      pivot_floor_(tol.sylvester_pivot * scale.value_or(left.norm() + right.norm())) {}

Matrix SylvesterSolver::solve(const Matrix& rhs) const {
    const Matrix& SA = left_schur_.S;
    const Matrix& SB = right_schur_.S;
    const Index q = SA.rows();
    const Index r = SB.rows();
    if (rhs.rows() != q || rhs.cols() != r)
        throw DimensionError("SylvesterSolver: rhs dimension mismatch");
    require_finite(rhs, "SylvesterSolver rhs");

    // Transformed equation SA Yt + Yt SB^T = -Ct.
    const Matrix Ct = left_schur_.Q.transpose() * rhs * right_schur_.Q;
    Matrix Yt = Matrix::Zero(q, r);
    const auto row_blocks = diagonal_blocks(SA);
    const auto col_blocks = diagonal_blocks(SB);

    for (auto cj = col_blocks.rbegin(); cj != col_blocks.rend(); ++cj) {
        const Index j0 = cj->start;
        const Index nb = cj->size;
        const Index j1 = j0 + nb;
        Matrix D = -Ct.middleCols(j0, nb);
        if (j1 < r)
            D.noalias() -= Yt.rightCols(r - j1) * SB.block(j0, j1, nb, r - j1).transpose();
        const Matrix SBjj = SB.block(j0, j0, nb, nb);

        for (auto ri = row_blocks.rbegin(); ri != row_blocks.rend(); ++ri) {
            const Index i0 = ri->start;
            const Index na = ri->size;
            const Index i1 = i0 + na;
            Matrix rhs_small = D.middleRows(i0, na);
            if (i1 < q)
                rhs_small.noalias() -=
                    SA.block(i0, i1, na, q - i1) * Yt.block(i1, j0, q - i1, nb);

            if (na == 1 && nb == 1) {
                const double pivot = SA(i0, i0) + SBjj(0, 0);
                if (std::abs(pivot) <= pivot_floor_)
                    throw SpectralClashError("bartels_stewart: eigenvalues of left and -right "
                                             "coincide (pivot " + std::to_string(pivot) + ")");
                Yt(i0, j0) = rhs_small(0, 0) / pivot;
                continue;
            }
            // (I_nb (x) SA_ii + SB_jj (x) I_na) vec(Y_ij) = vec(rhs_small)
            const Index k = na * nb;
            Matrix K = Matrix::Zero(k, k);
            const Matrix SAii = SA.block(i0, i0, na, na);
            for (Index b = 0; b < nb; ++b) {
                K.block(b * na, b * na, na, na) += SAii;
                for (Index c = 0; c < nb; ++c)
                    K.block(b * na, c * na, na, na) += SBjj(b, c) * Matrix::Identity(na, na);
            }
            Eigen::FullPivLU<Matrix> lu(K);
            const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
            if (min_pivot <= pivot_floor_)
                throw SpectralClashError("bartels_stewart: eigenvalues of left and -right "
                                         "coincide (block pivot " + std::to_string(min_pivot) +
                                         ")");
            const Vector y = lu.solve(Eigen::Map<const Vector>(rhs_small.data(), k));
            Yt.block(i0, j0, na, nb) = Eigen::Map<const Matrix>(y.data(), na, nb);
        }
    }
    return left_schur_.Q * Yt * right_schur_.Q.transpose();
}

Matrix bartels_stewart(const SylvesterSystem& sys, const Tolerances& tol) {
    check_sylvester_dims(sys.left, sys.right, sys.rhs);
    return SylvesterSolver(sys.left, sys.right, tol).solve(sys.rhs);
}

Matrix kron_solve(const SylvesterSystem& sys) {
    check_sylvester_dims(sys.left, sys.right, sys.rhs);
    const Index q = sys.left.rows();
    const Index r = sys.right.rows();
    if (q * r > kKronSolveMaxUnknowns)
        throw DimensionError("kron_solve: q*r = " + std::to_string(q * r) + " exceeds " +
                             std::to_string(kKronSolveMaxUnknowns));
    const Index k = q * r;
    Matrix K = Matrix::Zero(k, k);
    for (Index b = 0; b < r; ++b) {
        K.block(b * q, b * q, q, q) += sys.left;
        for (Index c = 0; c < r; ++c)
            K.block(b * q, c * q, q, q).diagonal().array() += sys.right(b, c);
    }
    Eigen::PartialPivLU<Matrix> lu(K);
    const Vector diag = lu.matrixLU().diagonal().cwiseAbs();
    if (k > 0 && diag.minCoeff() <= 1e-14 * std::max(1.0, diag.maxCoeff()))
        throw SingularError("kron_solve: Kronecker matrix is singular");
    const Matrix neg = -sys.rhs;
    const Vector y = lu.solve(Eigen::Map<const Vector>(neg.data(), k));
    return Eigen::Map<const Matrix>(y.data(), q, r);
}

}  // namespace sylkrylov
