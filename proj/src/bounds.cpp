#include "sylkrylov/bounds.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace sylkrylov {

ExtremalEigenvalues lanczos_extremal(const SparseMatrix& S, const Tolerances& tol) {
    const Index n = S.rows();
    if (S.cols() != n)
        throw DimensionError("lanczos_extremal: matrix must be square");
    if (n == 0)
        throw DimensionError("lanczos_extremal: empty matrix");
    const Index kmax = std::min<Index>(n, tol.lanczos_max_iter);

    Vector v(n);
    for (Index i = 0; i < n; ++i)
        v(i) = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3);
    v.normalize();

    Matrix V(n, kmax);
    std::vector<double> alpha, beta;
    ExtremalEigenvalues out;
    for (Index j = 0; j < kmax; ++j) {
        V.col(j) = v;
        Vector w = S * v;
        const double a = v.dot(w);
        w -= a * v;
        if (j > 0)
            w -= beta.back() * V.col(j - 1);
        for (int pass = 0; pass < 2; ++pass)
            w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
        const double b = w.norm();
        alpha.push_back(a);

        const Index k = j + 1;
        Vector diag = Eigen::Map<const Vector>(alpha.data(), k);
        Vector sub(std::max<Index>(k - 1, 0));
        for (Index i = 0; i + 1 < k; ++i)
            sub(i) = beta[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Matrix> eig;
        eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        if (eig.info() != Eigen::Success)
            throw ConvergenceError("lanczos_extremal: tridiagonal eigensolver failed");
        const double lo = eig.eigenvalues()(0);
        const double hi = eig.eigenvalues()(k - 1);
        const double scale = std::max({std::abs(lo), std::abs(hi),
                                       std::numeric_limits<double>::min()});
        const double r_lo = b * std::abs(eig.eigenvectors()(k - 1, 0));
        const double r_hi = b * std::abs(eig.eigenvectors()(k - 1, k - 1));
        out.lambda_min = lo;
        out.lambda_max = hi;
        out.iterations = static_cast<int>(k);
        const bool invariant = b <= 1e-14 * scale;
        if (invariant || k == n || (r_lo <= tol.lanczos_tol * scale &&
                                    r_hi <= tol.lanczos_tol * scale))
            return out;
        beta.push_back(b);
        v = w / b;
    }
    throw ConvergenceError("lanczos_extremal: no convergence in " + std::to_string(kmax) +
                           " iterations");
}

double lognorm2(const SparseOperator& A, const Tolerances& tol) {
    return lanczos_extremal(A.symmetric_part(), tol).lambda_max;
}

double nu(const SparseOperator& A, const Tolerances& tol) {
    return lanczos_extremal(A.symmetric_part(), tol).lambda_min;
}

namespace {

bool within(double tau, double t) { return tau <= t + 1e-12 * std::max(1.0, std::abs(t)); }

}  // namespace

double alpha_m(const ProjectedTrajectory& traj, const ProjectedDSE& proj, double t) {
    double out = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k)
        if (within(traj.times[k], t))
            out = std::max(out, residual_norm(traj.G[k], proj).two);
    return out;
}

double beta_m(const ProjectedTrajectory& traj, const ProjectedDSE& proj, double t) {
    double g = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (!within(traj.times[k], t))
            continue;
        const Matrix& G = traj.G[k];
        g = std::max({g, norm2(G.bottomRows(proj.dA)), norm2(G.rightCols(proj.dB))});
    }
    return g * (norm2(proj.TnextA) + norm2(proj.TnextB));
}

double growth_bound(double E0_norm, double rate, double mu, double elapsed) {
    if (mu == 0.0)
        throw Error("error bound: mu_2(A) + mu_2(B) must be nonzero");
    const double grow = std::exp(elapsed * mu);
    double out = E0_norm * grow;
    if (rate != 0.0)
        out += rate * std::expm1(elapsed * mu) / mu;
    return out;
}

double bound_alpha(const ProjectedTrajectory& traj, const ProjectedDSE& proj, double mu2A,
                   double mu2B, double t, double E0_norm) {
    return growth_bound(E0_norm, alpha_m(traj, proj, t), mu2A + mu2B, t - proj.t0);
}

double bound_beta(const ProjectedTrajectory& traj, const ProjectedDSE& proj, double mu2A,
                  double mu2B, double t, double E0_norm) {
    return growth_bound(E0_norm, beta_m(traj, proj, t), mu2A + mu2B, t - proj.t0);
}

namespace {

// |Ebar^T e^{u T} Em|_2
double last_block_action(const BlockKrylovDecomposition& decomp, const Matrix& Em, double u) {
    const Matrix P = expm(u * decomp.T) * Em;
    return norm2(P.bottomRows(decomp.block_width));
}

// int_0^x e^{r y} dy
double phi(double x, double r) { return r == 0.0 ? x : std::expm1(x * r) / r; }

}  // namespace

std::vector<double> exp_error_bound(const BlockKrylovDecomposition& decomp, const Matrix& Em,
                                    const std::vector<double>& sigmas, const ExpBoundSpec& spec) {
    spec.quadrature.validate();
    if (Em.rows() != decomp.size())
        throw DimensionError("exp_error_bound: Em does not match the decomposition");
    std::vector<double> out;
    out.reserve(sigmas.size());
    const double tnorm = norm2(decomp.T_next);
    const double c = spec.drop_exponential ? 0.0 : -spec.nu;
    for (double sigma : sigmas) {
        if (sigma < 0.0)
            throw Error("exp_error_bound: negative elapsed time");
        if (tnorm == 0.0 || sigma == 0.0) {
            out.push_back(0.0);
            continue;
        }
        const double integral = integrate(
            [&](double u) {
                return std::exp((sigma - u) * c) * last_block_action(decomp, Em, u);
            },
            0.0, sigma, spec.quadrature);
        out.push_back(tnorm * integral);
    }
    return out;
}

std::vector<double> exp_error_exact(const SparseOperator& A, const Matrix& E,
                                    const BlockKrylovDecomposition& decomp, const Matrix& Em,
                                    const std::vector<double>& sigmas) {
    if (A.dimension() > kDenseExpMaxDimension)
        throw DimensionError("exp_error_exact: dimension exceeds the dense limit");
    const Matrix Ad = A.to_dense();
    std::vector<double> out;
    out.reserve(sigmas.size());
    for (double sigma : sigmas) {
        const Matrix diff = expm(sigma * Ad) * E - decomp.basis * (expm(sigma * decomp.T) * Em);
        out.push_back(norm2(diff));
    }
    return out;
}

ExactFactorTable ExactFactorTable::build(const SparseOperator& A, const SparseOperator& B,
                                         const Matrix& E, const Matrix& F, double span,
                                         const QuadratureSpec& q) {
    q.validate();
    if (A.dimension() > kDenseExpMaxDimension || B.dimension() > kDenseExpMaxDimension)
        throw DimensionError("ExactFactorTable: dimension exceeds the dense limit");
    if (!(span > 0.0))
        throw Error("ExactFactorTable: span must be positive");
    ExactFactorTable t;
    t.span = span;
    const Matrix Ad = A.to_dense();
    const Matrix Btd = B.to_dense().transpose();
    const GaussRule& rule = gauss_legendre(q.nodes_per_interval);
    const double width = span / q.substeps;
    for (int piece = 0; piece < q.substeps; ++piece) {
        const double a = piece * width;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double s = a + 0.5 * width * (rule.nodes[i] + 1.0);
            t.nodes.push_back(s);
            t.weights.push_back(0.5 * width * rule.weights[i]);
            t.ZA.push_back(expm(s * Ad) * E);
            t.ZB.push_back(expm(s * Btd) * F);
        }
    }
    return t;
}

double bound_gamma(const ExactFactorTable& table, const BlockKrylovDecomposition& decompA,
                   const BlockKrylovDecomposition& decompB, const ProjectedDSE& proj,
                   const Matrix& F, double mu2A, double mu2B) {
    const double Fn = norm2(F);
    const double Emn = norm2(proj.Em);
    double total = 0.0;
    for (std::size_t i = 0; i < table.nodes.size(); ++i) {
        const double s = table.nodes[i];
        const double eA =
            norm2(table.ZA[i] - decompA.basis * (expm(s * proj.TA) * proj.Em));
        const double eB =
            norm2(table.ZB[i] - decompB.basis * (expm(s * proj.TB) * proj.Fm));
        total += table.weights[i] * (Fn * std::exp(s * mu2B) * eA + Emn * std::exp(s * mu2A) * eB);
    }
    return total;
}

double bound_global(const BlockKrylovDecomposition& decompA,
                    const BlockKrylovDecomposition& decompB, const ProjectedDSE& proj,
                    const Matrix& F, double mu2A, double mu2B, double nuA, double nuB,
                    double span, const QuadratureSpec& q, bool drop_exponential) {
    q.validate();
    const double tA = norm2(proj.TnextA);
    const double tB = norm2(proj.TnextB);
    const double cA = drop_exponential ? 0.0 : -nuA;
    const double cB = drop_exponential ? 0.0 : -nuB;
    // Swapping the order of integration leaves a closed-form inner integral:
    //   int_0^T e^{s mu} int_0^s e^{(s-u) c} L(u) du ds = int_0^T L(u) e^{u mu} phi(T - u, mu + c) du
    double out = 0.0;
    if (tA != 0.0) {
        out += norm2(F) * tA *
               integrate(
                   [&](double u) {
                       return last_block_action(decompA, proj.Em, u) * std::exp(u * mu2B) *
                              phi(span - u, mu2B + cA);
                   },
                   0.0, span, q);
    }
    if (tB != 0.0) {
        out += norm2(proj.Em) * tB *
               integrate(
                   [&](double u) {
                       return last_block_action(decompB, proj.Fm, u) * std::exp(u * mu2A) *
                              phi(span - u, mu2A + cB);
                   },
                   0.0, span, q);
    }
    return out;
}

PerturbationResidual perturbation_check(const SparseOperator& A, const SparseOperator& B,
                                        const Matrix& E, const Matrix& F,
                                        const BlockKrylovDecomposition& decompA,
                                        const BlockKrylovDecomposition& decompB,
                                        const ProjectedDSE& proj, const Matrix& G) {
    const ExplicitResidual R =
        assemble_residual_explicit(A, B, E, F, decompA, decompB, proj, G);
    const Matrix X = decompA.basis * G * decompB.basis.transpose();
    const Matrix VmA = decompA.basis.rightCols(decompA.block_width);
    const Matrix WmB = decompB.basis.rightCols(decompB.block_width);
    // F_A X = V_{m+1} TnextA (V_m^T X),  X F_B = (X W_m) TnextB^T W_{m+1}^T
    const Matrix FAX = decompA.next_block * (proj.TnextA * (VmA.transpose() * X));
    const Matrix XFB = ((X * WmB) * proj.TnextB.transpose()) * decompB.next_block.transpose();
    PerturbationResidual out;
    out.value = (R.matrix + FAX + XFB).norm();
    out.scale = A.frobenius_norm() * X.norm() + X.norm() * B.frobenius_norm() +
                E.norm() * F.norm();
    return out;
}

BoundReport bound_report(const ProjectedTrajectory& traj, const ProjectedDSE& proj,
                         const BlockKrylovDecomposition& decompA,
                         const BlockKrylovDecomposition& decompB, const Matrix& F, double mu2A,
                         double mu2B, double t, double E0_norm, const QuadratureSpec& q,
                         const ExactFactorTable* table) {
    BoundReport r;
    r.t = t;
    r.mu2A = mu2A;
    r.mu2B = mu2B;
    r.E0_norm = E0_norm;
    r.alpha_m = alpha_m(traj, proj, t);
    r.beta_m = beta_m(traj, proj, t);
    r.bound_alpha = growth_bound(E0_norm, r.alpha_m, mu2A + mu2B, t - proj.t0);
    r.bound_beta = growth_bound(E0_norm, r.beta_m, mu2A + mu2B, t - proj.t0);
    r.bound_global = bound_global(decompA, decompB, proj, F, mu2A, mu2B, effective_nu(mu2A),
                                  effective_nu(mu2B), t - proj.t0, q);
    if (table)
        r.bound_gamma = bound_gamma(*table, decompA, decompB, proj, F, mu2A, mu2B);
    return r;
}

}  // namespace sylkrylov
