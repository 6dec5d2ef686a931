#include "sylkrylov/problems.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace sylkrylov {

FDOperatorSpec FDOperatorSpec::LA(Index n0) {
    FDOperatorSpec s;
    s.n0 = n0;
    s.cx = [](double x, double y) { return -(x + 10.0 * y * y); };
    s.cy = [](double x, double y) { return std::sqrt(2.0 * x * x + y * y); };
    s.g = [](double x, double y) { return x * x - y * y; };
    return s;
}

FDOperatorSpec FDOperatorSpec::LB(Index n0) {
    FDOperatorSpec s;
    s.n0 = n0;
    s.cx = [](double x, double y) { return -(x + 2.0 * y); };
    s.cy = [](double x, double y) { return std::exp(y - x); };
    s.g = [](double x, double y) { return y * y - x * x; };
    return s;
}

FDOperatorSpec FDOperatorSpec::laplacian(Index n0) {
    FDOperatorSpec s;
    s.n0 = n0;
    return s;
}

SparseOperator fd_operator(const FDOperatorSpec& spec) {
    const Index n0 = spec.n0;
    if (n0 < 2)
        throw DimensionError("fd_operator: n0 must be at least 2");
    const double h = 1.0 / static_cast<double>(n0 + 1);
    const double ih2 = 1.0 / (h * h);
    const double i2h = 1.0 / (2.0 * h);
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(5 * n0 * n0));
    auto id = [n0](Index i, Index j) { return (j - 1) * n0 + (i - 1); };
    for (Index j = 1; j <= n0; ++j) {
        for (Index i = 1; i <= n0; ++i) {
            const double x = static_cast<double>(i) * h;
            const double y = static_cast<double>(j) * h;
            const double cx = spec.cx ? spec.cx(x, y) : 0.0;
            const double cy = spec.cy ? spec.cy(x, y) : 0.0;
            const double g = spec.g ? spec.g(x, y) : 0.0;
            const Index k = id(i, j);
            t.push_back({k, k, -4.0 * ih2 + g});
            if (i < n0)
                t.push_back({k, id(i + 1, j), ih2 + cx * i2h});
            if (i > 1)
                t.push_back({k, id(i - 1, j), ih2 - cx * i2h});
            if (j < n0)
                t.push_back({k, id(i, j + 1), ih2 + cy * i2h});
            if (j > 1)
                t.push_back({k, id(i, j - 1), ih2 - cy * i2h});
        }
    }
    return SparseOperator(n0 * n0, t);
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double rank_ratio(const Matrix& M) {
    const SvdResult s = svd(M);
    if (s.sigma.size() == 0 || s.sigma(0) == 0.0)
        return 0.0;
    return s.sigma(s.sigma.size() - 1) / s.sigma(0);
}

}  // namespace

double uniform_at(std::uint64_t seed, std::uint64_t k) {
    const std::uint64_t z = mix64(seed + (k + 1) * 0x9E3779B97F4A7C15ULL);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

std::pair<Matrix, Matrix> random_low_rank(Index n, Index p, Index s, std::uint64_t seed) {
    if (s < 1 || s > std::min(n, p))
        throw DimensionError("random_low_rank: need 1 <= s <= min(n, p)");
    for (int attempt = 0; attempt < 64; ++attempt, ++seed) {
        Matrix E(n, s), F(p, s);
        std::uint64_t k = 0;
        for (Index j = 0; j < s; ++j)
            for (Index i = 0; i < n; ++i)
                E(i, j) = uniform_at(seed, k++);
        for (Index j = 0; j < s; ++j)
            for (Index i = 0; i < p; ++i)
                F(i, j) = uniform_at(seed, k++);
        if (rank_ratio(E) > 1e-8 && rank_ratio(F) > 1e-8)
            return {std::move(E), std::move(F)};
    }
    throw Error("random_low_rank: no full-rank draw found");
}

namespace {

// Inner step counts: each grid interval split into ceil(span / h_inner) equal steps.
std::vector<std::pair<Index, double>> inner_steps(const std::vector<double>& times,
                                                  double h_inner) {
    std::vector<std::pair<Index, double>> out;
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double span = times[k] - times[k - 1];
        if (!(span > 0.0))
            throw Error("kronecker_oracle: grid must be increasing");
        const auto steps = static_cast<Index>(std::ceil(span / h_inner - 1e-9));
        out.emplace_back(steps, span / static_cast<double>(steps));
    }
    return out;
}

std::vector<Matrix> kronecker_sparse_lu(const DSEProblem& problem,
                                        const std::vector<double>& times, double h_inner) {
    const Index n = problem.n();
    const Index p = problem.p();
    // K = I (x) A + B^T (x) I acting on column-major vec(X).
    std::vector<Eigen::Triplet<double, int>> kt;
    const SparseMatrix& A = problem.A.matrix();
    const SparseMatrix& B = problem.B.matrix();
    kt.reserve(static_cast<std::size_t>(p * A.nonZeros() + n * B.nonZeros()));
    for (Index j = 0; j < p; ++j)
        for (int c = 0; c < A.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(A, c); it; ++it)
                kt.emplace_back(static_cast<int>(j * n + it.row()), static_cast<int>(j * n + c),
                                it.value());
    for (int c = 0; c < B.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(B, c); it; ++it)  // B(r, c) = B^T(c, r)
            for (Index i = 0; i < n; ++i)
                kt.emplace_back(static_cast<int>(c * n + i), static_cast<int>(it.row() * n + i),
                                it.value());
    SparseMatrix K(n * p, n * p);
    K.setFromTriplets(kt.begin(), kt.end());
    SparseMatrix I(n * p, n * p);
    I.setIdentity();

    const Matrix C = problem.sign * problem.E * problem.F.transpose();
    const Vector b = Eigen::Map<const Vector>(C.data(), n * p);
    const Matrix X0 = problem.initial_value();
    Vector x = Eigen::Map<const Vector>(X0.data(), n * p);

    using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
    std::map<double, std::unique_ptr<LU>> factors;
    auto factor_for = [&](double h) -> LU& {
        auto& slot = factors[h];
        if (!slot) {
            slot = std::make_unique<LU>();
            SparseMatrix M = I - h * K;
            M.makeCompressed();
            slot->compute(M);
            if (slot->info() != Eigen::Success)
                throw SingularError("kronecker_oracle: factorization of I - hK failed");
        }
        return *slot;
    };

    std::vector<Matrix> out;
    out.reserve(times.size());
    out.push_back(X0);
    for (const auto& [steps, h] : inner_steps(times, h_inner)) {
        LU& lu = factor_for(h);
        const Vector hb = h * b;
        for (Index i = 0; i < steps; ++i) {
            Vector rhs = x + hb;
            x = lu.solve(rhs);
        }
        out.push_back(Eigen::Map<const Matrix>(x.data(), n, p));
    }
    return out;
}

using CMatrix = Eigen::MatrixXcd;

struct Diagonalization {
    Eigen::VectorXcd lambda;
    CMatrix V;
    Eigen::PartialPivLU<CMatrix> Vinv;
    double cond = 0.0;
};

std::optional<Diagonalization> diagonalize(const Matrix& M) {
    Eigen::ComplexEigenSolver<CMatrix> es(M.cast<std::complex<double>>());
    if (es.info() != Eigen::Success)
        return std::nullopt;
    Diagonalization d;
    d.lambda = es.eigenvalues();
    d.V = es.eigenvectors();
    Eigen::BDCSVD<CMatrix> sv(d.V);
    const auto& sig = sv.singularValues();
    if (sig(sig.size() - 1) <= 0.0)
        return std::nullopt;
    d.cond = sig(0) / sig(sig.size() - 1);
    d.Vinv.compute(d.V);
    return d;
}

std::optional<std::vector<Matrix>> kronecker_eigenbasis(const DSEProblem& problem,
                                                        const std::vector<double>& times,
                                                        double h_inner) {
    if (problem.n() > kDenseExpMaxDimension || problem.p() > kDenseExpMaxDimension)
        return std::nullopt;
    // A = VA diag(la) VA^{-1}, B^T = VB diag(mu) VB^{-1}; X = VA Xh VB^T turns K into the
    // diagonal (la_i + mu_j).
    auto dA = diagonalize(problem.A.to_dense());
    auto dB = diagonalize(problem.B.to_dense().transpose());
    if (!dA || !dB || dA->cond * dB->cond > 1e6)
        return std::nullopt;
    const auto to_hat = [&](const Matrix& X) -> CMatrix {
        const CMatrix L = dA->Vinv.solve(X.cast<std::complex<double>>());
        return dB->Vinv.solve(L.transpose()).transpose();
    };
    const auto from_hat = [&](const CMatrix& Xh) -> Matrix {
        return (dA->V * Xh * dB->V.transpose()).real();
    };
    const CMatrix Ch = to_hat(problem.sign * problem.E * problem.F.transpose());
    CMatrix Xh = to_hat(problem.initial_value());

    std::vector<Matrix> out;
    out.reserve(times.size());
    out.push_back(problem.initial_value());
    for (const auto& [steps, h] : inner_steps(times, h_inner)) {
        for (Index j = 0; j < Xh.cols(); ++j) {
            for (Index i = 0; i < Xh.rows(); ++i) {
                const std::complex<double> sigma = dA->lambda(i) + dB->lambda(j);
                if (std::abs(h * sigma) < 1e-14) {
                    Xh(i, j) += static_cast<double>(steps) * h * Ch(i, j);
                    continue;
                }
                const std::complex<double> r = 1.0 / (1.0 - h * sigma);
                const std::complex<double> fixed = -Ch(i, j) / sigma;
                Xh(i, j) = fixed + std::pow(r, static_cast<double>(steps)) * (Xh(i, j) - fixed);
            }
        }
        out.push_back(from_hat(Xh));
    }
    return out;
}

}  // namespace

std::vector<Matrix> kronecker_oracle(const DSEProblem& problem, const std::vector<double>& times,
                                     double h_inner, KroneckerEvaluation how) {
    const Index np = problem.n() * problem.p();
    if (np > kKroneckerMaxUnknowns)
        throw DimensionError("kronecker_oracle: n*p = " + std::to_string(np) + " exceeds " +
                             std::to_string(kKroneckerMaxUnknowns));
    if (!(h_inner > 0.0))
        throw Error("kronecker_oracle: h_inner must be positive");
    if (times.empty() || times.front() != problem.t0)
        throw Error("kronecker_oracle: grid must start at t0");
    if (how == KroneckerEvaluation::Auto)
        how = np <= kKroneckerLUMaxUnknowns ? KroneckerEvaluation::SparseLU
                                            : KroneckerEvaluation::Eigenbasis;
    if (how == KroneckerEvaluation::Eigenbasis)
        if (auto out = kronecker_eigenbasis(problem, times, h_inner))
            return std::move(*out);
    return kronecker_sparse_lu(problem, times, h_inner);
}

std::vector<Matrix> integral_reference(const DSEProblem& problem,
                                       const std::vector<double>& times,
                                       const QuadratureSpec& q) {
    if (problem.n() > kDenseExpMaxDimension || problem.p() > kDenseExpMaxDimension)
        throw DimensionError("integral_reference: n and p must not exceed " +
                             std::to_string(kDenseExpMaxDimension));
    if (times.empty() || times.front() != problem.t0)
        throw Error("integral_reference: grid must start at t0");
    const Matrix A = problem.A.to_dense();
    const Matrix B = problem.B.to_dense();
    const Matrix C = problem.sign * problem.E * problem.F.transpose();
    std::map<double, ExponentialStep> steps;
    std::vector<Matrix> out;
    out.reserve(times.size());
    Matrix X = problem.initial_value();
    out.push_back(X);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double dt = times[k] - times[k - 1];
        if (!(dt > 0.0))
            throw Error("integral_reference: grid must be increasing");
        auto it = steps.find(dt);
        if (it == steps.end())
            it = steps.emplace(dt, exponential_step(A, B, C, dt, q)).first;
        const ExponentialStep& st = it->second;
        Matrix next = st.Q;
        next.noalias() += st.PL * X * st.PR;
        X = std::move(next);
        out.push_back(X);
    }
    return out;
}

DSEProblem example1(Index n0, Index p0, Index s, std::uint64_t seed) {
    DSEProblem pr;
    pr.A = fd_operator(FDOperatorSpec::LA(n0));
    pr.B = fd_operator(FDOperatorSpec::LB(p0));
    auto [E, F] = random_low_rank(pr.A.dimension(), pr.B.dimension(), s, seed);
    pr.E = std::move(E);
    pr.F = std::move(F);
    pr.t0 = 0.0;
    pr.Tf = 2.0;
    return pr;
}

DSEProblem example2(const SparseOperator& A, Index s, std::uint64_t seed) {
    DSEProblem pr;
    pr.A = A;
    pr.B = A;
    auto [E, F] = random_low_rank(A.dimension(), A.dimension(), s, seed);
    pr.E = std::move(E);
    pr.F = std::move(F);
    pr.t0 = 0.0;
    pr.Tf = 2.0;
    pr.sign = -1.0;
    return pr;
}

SparseOperator surrogate100_operator() {
    constexpr Index n = 100;
    const double h = 1.0 / static_cast<double>(n + 1);
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i) {
        const double shift = 1.0 + 0.5 * std::sin(0.37 * static_cast<double>(i));
        t.push_back({i, i, -2.0 / (h * h) - shift});
        if (i + 1 < n) {
            t.push_back({i, i + 1, 1.0 / (h * h)});
            t.push_back({i + 1, i, 1.0 / (h * h)});
        }
    }
    return SparseOperator(n, t);
}

DSEProblem surrogate100(Index s, std::uint64_t seed) { return example2(surrogate100_operator(), s, seed); }

std::filesystem::path resolve_data_file(const std::string& name) {
    const std::filesystem::path direct(name);
    if (std::filesystem::exists(direct))
        return direct;
    if (const char* dir = std::getenv("SYLKRYLOV_DATA_DIR")) {
        const std::filesystem::path p = std::filesystem::path(dir) / name;
        if (std::filesystem::exists(p))
            return p;
    }
    throw Error("data file '" + name + "' not found (set SYLKRYLOV_DATA_DIR or pass a path)");
}

}  // namespace sylkrylov
