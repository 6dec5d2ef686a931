#include "sylkrylov/dense.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <array>
#include <cmath>

namespace sylkrylov {

const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

void require_finite(const Matrix& M, const char* what) {
    if (!M.allFinite())
        throw Error(std::string(what) + ": non-finite entries");
}

void require_square(const Matrix& M, const char* what) {
    if (M.rows() != M.cols())
        throw DimensionError(std::string(what) + ": matrix must be square, got " +
                             std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
}

QrResult qr_reduced(const Matrix& M, double rank_tol, std::optional<double> scale) {
    if (M.rows() < M.cols())
        throw DimensionError("qr_reduced: rows < cols");
    const Index n = M.rows();
    const Index k = M.cols();
    Eigen::HouseholderQR<Matrix> qr(M);
    QrResult out;
    out.Q = qr.householderQ() * Matrix::Identity(n, k);
    out.R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    // Flip signs so that diag(R) >= 0; Q R is unchanged.
    for (Index i = 0; i < k; ++i) {
        if (out.R(i, i) < 0.0) {
            out.R.row(i) *= -1.0;
            out.Q.col(i) *= -1.0;
        }
    }
    const double ref = scale.value_or(M.norm());
    for (Index i = 0; i < k; ++i) {
        if (std::abs(out.R(i, i)) <= rank_tol * ref) {
            out.deficient_column = i;
            break;
        }
    }
    return out;
}

SvdResult svd(const Matrix& M) {
    require_finite(M, "svd");
    SvdResult out;
    if (M.rows() == 0 || M.cols() == 0) {
        out.U = Matrix(M.rows(), 0);
        out.V = Matrix(M.cols(), 0);
        out.sigma = Vector(0);
        return out;
    }
    Eigen::BDCSVD<Matrix> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success)
        throw ConvergenceError("svd: iteration did not converge");
    out.U = dec.matrixU();
    out.sigma = dec.singularValues();
    out.V = dec.matrixV();
    return out;
}

SchurResult real_schur(const Matrix& M, const Tolerances& tol) {
    require_square(M, "real_schur");
    require_finite(M, "real_schur");
    if (M.rows() == 0)
        return {Matrix(0, 0), Matrix(0, 0)};
    Eigen::RealSchur<Matrix> schur(M.rows());
    schur.setMaxIterations(tol.schur_max_iter_per_row * M.rows());
    schur.compute(M, true);
    if (schur.info() != Eigen::Success)
        throw ConvergenceError("real_schur: Francis QR iteration did not converge");
    return {schur.matrixU(), schur.matrixT()};
}

namespace {

// Pade coefficients b_0..b_m for degrees 3, 5, 7, 9, 13.
constexpr std::array<double, 4> kPade3{120., 60., 12., 1.};
constexpr std::array<double, 6> kPade5{30240., 15120., 3360., 420., 30., 1.};
constexpr std::array<double, 8> kPade7{17297280., 8648640., 1995840., 277200.,
                                       25200.,    1512.,    56.,      1.};
constexpr std::array<double, 10> kPade9{17643225600., 8821612800., 2075673600., 302702400.,
                                        30270240.,    2162160.,    110880.,     3960.,
                                        90.,          1.};
constexpr std::array<double, 14> kPade13{
    64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
    129060195264000.,   10559470521600.,    670442572800.,     33522128640.,
    1323241920.,        40840800.,          960960.,           16380.,
    182.,               1.};

// Largest 1-norms for which each degree reaches unit roundoff accuracy.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N>
Matrix pade_low(const Matrix& A, const std::array<double, N>& b) {
    const Index n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    const Matrix A2 = A * A;
    Matrix U = b[1] * I;
    Matrix V = b[0] * I;
    Matrix P = I;
    for (std::size_t k = 2; k + 1 < N; k += 2) {
        P = P * A2;
        V += b[k] * P;
        U += b[k + 1] * P;
    }
    U = A * U;
    return (V - U).partialPivLu().solve(V + U);
}

Matrix pade13(const Matrix& A) {
    const auto& b = kPade13;
    const Index n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    const Matrix A2 = A * A;
    const Matrix A4 = A2 * A2;
    const Matrix A6 = A4 * A2;
    Matrix U = A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2);
    U += b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I;
    U = A * U;
    Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2);
    V += b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
    return (V - U).partialPivLu().solve(V + U);
}

}  // namespace

Matrix expm(const Matrix& M) {
    require_square(M, "expm");
    require_finite(M, "expm");
    if (M.rows() == 0)
        return M;
    const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 <= kTheta3)
        return pade_low(M, kPade3);
    if (norm1 <= kTheta5)
        return pade_low(M, kPade5);
    if (norm1 <= kTheta7)
        return pade_low(M, kPade7);
    if (norm1 <= kTheta9)
        return pade_low(M, kPade9);
    int squarings = 0;
    if (norm1 > kTheta13)
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    Matrix X = pade13(M / std::ldexp(1.0, squarings));
    for (int i = 0; i < squarings; ++i)
        X = X * X;
    return X;
}

Vector symmetric_eigenvalues(const Matrix& S) {
    require_square(S, "symmetric_eigenvalues");
    if (S.rows() == 0)
        return Vector(0);
    const Matrix sym = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw ConvergenceError("symmetric_eigenvalues: did not converge");
    return eig.eigenvalues();
}

double lognorm2(const Matrix& M) {
    require_square(M, "lognorm2");
    return symmetric_eigenvalues(M).maxCoeff();
}

double nu(const Matrix& M) {
    require_square(M, "nu");
    return symmetric_eigenvalues(M).minCoeff();
}

double norm2(const Matrix& M) {
    if (M.rows() == 0 || M.cols() == 0)
        return 0.0;
    // Gram matrix on the short side; fine for the small blocks this is used on.
    const Matrix G = M.rows() <= M.cols() ? Matrix(M * M.transpose())
                                          : Matrix(M.transpose() * M);
    const double lmax = symmetric_eigenvalues(G).maxCoeff();
    if (lmax <= 0.0)
        return 0.0;
    return std::sqrt(lmax);
}

}  // namespace sylkrylov
