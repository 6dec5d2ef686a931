#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace sylkrylov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// An iterative kernel exhausted its iteration budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A linear system or factorization hit a (numerically) zero pivot.
class SingularError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Central tolerance record. Every kernel takes its thresholds from here.
struct Tolerances {
    double rank_tol = 1e-12;          ///< QR / Arnoldi rank-deficiency threshold
    double sylvester_pivot = 1e-13;   ///< relative pivot floor in Bartels-Stewart
    double sparse_pivot = 1e-14;      ///< relative pivot floor in sparse LU
    double lanczos_tol = 1e-8;        ///< extremal Ritz value convergence
    int schur_max_iter_per_row = 40;  ///< Francis QR budget, times matrix order
    int lanczos_max_iter = 600;
};

const Tolerances& default_tolerances();

struct QrResult {
    Matrix Q;
    Matrix R;
    /// First column index whose |R_ii| fell under rank_tol * scale, if any.
    std::optional<Index> deficient_column;
};

/// Thin QR with a nonnegative R diagonal. `scale` defaults to ||M||_F.
QrResult qr_reduced(const Matrix& M, double rank_tol = default_tolerances().rank_tol,
                    std::optional<double> scale = std::nullopt);

struct SvdResult {
    Matrix U;
    Vector sigma;  // descending
    Matrix V;
};

SvdResult svd(const Matrix& M);

struct SchurResult {
    Matrix Q;
    Matrix S;  // quasi upper triangular, M = Q S Q^T
};

SchurResult real_schur(const Matrix& M, const Tolerances& tol = default_tolerances());

/// Matrix exponential by scaling and squaring with a diagonal Pade approximant.
Matrix expm(const Matrix& M);

/// Eigenvalues of a symmetric matrix, ascending.
Vector symmetric_eigenvalues(const Matrix& S);

/// 2-logarithmic norm: largest eigenvalue of (M + M^T) / 2.
double lognorm2(const Matrix& M);

/// Smallest eigenvalue of (M + M^T) / 2.
double nu(const Matrix& M);

/// Spectral norm.
double norm2(const Matrix& M);

void require_finite(const Matrix& M, const char* what);
void require_square(const Matrix& M, const char* what);

}  // namespace sylkrylov
