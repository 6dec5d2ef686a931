#pragma once

#include "sylkrylov/integrators.hpp"

#include <optional>
#include <vector>

namespace sylkrylov {

struct ExtremalEigenvalues {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    int iterations = 0;
};

/// Extremal eigenvalues of a symmetric sparse matrix by Lanczos with full
/// reorthogonalization. Converged when both Ritz residuals fall under
/// lanczos_tol * max|theta|. Throws ConvergenceError past lanczos_max_iter.
ExtremalEigenvalues lanczos_extremal(const SparseMatrix& S,
                                     const Tolerances& tol = default_tolerances());

/// mu_2(A) = lambda_max((A + A^T) / 2).
double lognorm2(const SparseOperator& A, const Tolerances& tol = default_tolerances());
/// nu(A) = lambda_min((A + A^T) / 2).
double nu(const SparseOperator& A, const Tolerances& tol = default_tolerances());

/// alpha_m = max over grid times tau <= t of max(|TnextA Ga(tau)|_2, |TnextB Gb(tau)^T|_2).
double alpha_m(const ProjectedTrajectory& traj, const ProjectedDSE& proj, double t);
/// beta_m = max over grid times tau <= t of max(|Ga(tau)|_2, |Gb(tau)|_2) * (|TnextA|_2 + |TnextB|_2).
/// Ga is the last dA rows of G, Gb the last dB columns.
double beta_m(const ProjectedTrajectory& traj, const ProjectedDSE& proj, double t);

/// E0 e^{s mu} + rate (e^{s mu} - 1) / mu with s = t - t0 and mu = mu2A + mu2B.
/// Throws when mu is zero.
double growth_bound(double E0_norm, double rate, double mu, double elapsed);

double bound_alpha(const ProjectedTrajectory& traj, const ProjectedDSE& proj, double mu2A,
                   double mu2B, double t, double E0_norm);
double bound_beta(const ProjectedTrajectory& traj, const ProjectedDSE& proj, double mu2A,
                  double mu2B, double t, double E0_norm);

/// Weight in the exponential-approximation bound: e^{(u - sigma) nu}. It dominates
/// |e^{(sigma - u) A}|_2 whenever nu <= nu(-A) = -mu_2(A); effective_nu returns that value.
inline double effective_nu(double mu2A) { return -mu2A; }

struct ExpBoundSpec {
    double nu = 0.0;
    /// Replace the weight by 1 (valid when nu >= 0, i.e. mu_2(A) <= 0).
    bool drop_exponential = false;
    QuadratureSpec quadrature{};
};

/// Bound on |e^{sigma A} E - V e^{sigma T} Em|_2 for each elapsed time sigma:
///   |T_next| int_0^sigma e^{(u - sigma) nu} |Ebar^T e^{u T} Em|_2 du,
/// where Ebar^T picks the last block row. E must lie in the span of the basis.
std::vector<double> exp_error_bound(const BlockKrylovDecomposition& decomp, const Matrix& Em,
                                    const std::vector<double>& sigmas, const ExpBoundSpec& spec);

/// True factor error |e^{sigma A} E - V e^{sigma T} Em|_2 with dense exponentials (oracle).
std::vector<double> exp_error_exact(const SparseOperator& A, const Matrix& E,
                                    const BlockKrylovDecomposition& decomp, const Matrix& Em,
                                    const std::vector<double>& sigmas);

/// Dense e^{sigma_i A} E and e^{sigma_i B^T} F at the quadrature nodes of [0, T]; shared
/// by bound_gamma across Krylov sizes. Requires n, p <= 400.
struct ExactFactorTable {
    double span = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<Matrix> ZA;
    std::vector<Matrix> ZB;

    static ExactFactorTable build(const SparseOperator& A, const SparseOperator& B,
                                  const Matrix& E, const Matrix& F, double span,
                                  const QuadratureSpec& q);
};

inline constexpr Index kDenseExpMaxDimension = 400;

/// |F| int_0^T e^{s mu2B} |e_A(s)|_2 ds + |Em| int_0^T e^{s mu2A} |e_B(s)|_2 ds with the true
/// factor errors taken from the table (T = table.span).
double bound_gamma(const ExactFactorTable& table, const BlockKrylovDecomposition& decompA,
                   const BlockKrylovDecomposition& decompB, const ProjectedDSE& proj,
                   const Matrix& F, double mu2A, double mu2B);

/// As bound_gamma with the factor errors replaced by exp_error_bound, computed from small
/// matrices only. nuA, nuB are the weights of the two exponential bounds.
double bound_global(const BlockKrylovDecomposition& decompA,
                    const BlockKrylovDecomposition& decompB, const ProjectedDSE& proj,
                    const Matrix& F, double mu2A, double mu2B, double nuA, double nuB,
                    double span, const QuadratureSpec& q, bool drop_exponential = false);

struct PerturbationResidual {
    double value = 0.0;  // |R + F_A X + X F_B|_F
    double scale = 0.0;  // |A|_F |X|_F + |X|_F |B|_F + |E|_F |F|_F
};

/// Checks R_m = -(F_A X_m + X_m F_B) with F_A = V_{m+1} TnextA V_m^T and
/// F_B = W_m TnextB^T W_{m+1}^T. Dense; requires n * p <= 1e6.
PerturbationResidual perturbation_check(const SparseOperator& A, const SparseOperator& B,
                                        const Matrix& E, const Matrix& F,
                                        const BlockKrylovDecomposition& decompA,
                                        const BlockKrylovDecomposition& decompB,
                                        const ProjectedDSE& proj, const Matrix& G);

struct BoundReport {
    double t = 0.0;
    double mu2A = 0.0;
    double mu2B = 0.0;
    double alpha_m = 0.0;
    double beta_m = 0.0;
    double bound_alpha = 0.0;
    double bound_beta = 0.0;
    std::optional<double> bound_gamma;
    double bound_global = 0.0;
    double E0_norm = 0.0;
};

/// All bound quantities at time t for one Krylov size, with the exponential-bound weights
/// -mu_2. bound_gamma is filled when a dense factor table is supplied.
BoundReport bound_report(const ProjectedTrajectory& traj, const ProjectedDSE& proj,
                         const BlockKrylovDecomposition& decompA,
                         const BlockKrylovDecomposition& decompB, const Matrix& F, double mu2A,
                         double mu2B, double t, double E0_norm, const QuadratureSpec& q,
                         const ExactFactorTable* table = nullptr);

}  // namespace sylkrylov
