#include "sylkrylov/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace sylkrylov {

void QuadratureSpec::validate() const {
    if (nodes_per_interval < 2)
        throw Error("quadrature: nodes_per_interval must be >= 2");
    if (substeps < 1)
        throw Error("quadrature: substeps must be >= 1");
}

namespace {

GaussRule compute_gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev-like initial guess for the i-th largest root.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1)
        throw Error("gauss_legendre: n must be positive");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& spec) {
    spec.validate();
    if (b == a)
        return 0.0;
    const GaussRule& rule = gauss_legendre(spec.nodes_per_interval);
    const double width = (b - a) / spec.substeps;
    double total = 0.0;
    for (int piece = 0; piece < spec.substeps; ++piece) {
        const double lo = a + piece * width;
        const double half = 0.5 * width;
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            sum += rule.weights[i] * f(lo + half * (rule.nodes[i] + 1.0));
        total += half * sum;
    }
    return total;
}

namespace {

double norm1(const Matrix& M) {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

ExponentialStep exponential_step(const Matrix& L, const Matrix& R, const Matrix& C, double dt,
                                 const QuadratureSpec& spec) {
    spec.validate();
    require_square(L, "exponential_step");
    require_square(R, "exponential_step");
    if (C.rows() != L.rows() || C.cols() != R.rows())
        throw DimensionError("exponential_step: C does not match L, R");
    if (!(dt > 0.0))
        throw Error("exponential_step: dt must be positive");

    const double scale = std::max(norm1(L), norm1(R));
    long pieces = spec.substeps;
    while (scale * dt / static_cast<double>(pieces) > 1.0 && pieces < (1L << 40))
        pieces *= 2;
    const double width = dt / static_cast<double>(pieces);

    // One piece [0, width].
    const GaussRule& rule = gauss_legendre(spec.nodes_per_interval);
    const double half = 0.5 * width;
    Matrix Q = Matrix::Zero(C.rows(), C.cols());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double u = half * (rule.nodes[i] + 1.0);
        Q.noalias() += (half * rule.weights[i]) * (expm(u * L) * C * expm(u * R));
    }
    const Matrix PL1 = expm(width * L);
    const Matrix PR1 = expm(width * R);

    // sum_{j < pieces} PL1^j Q PR1^j by binary doubling, most significant bit first.
    Matrix S = Q;
    Matrix PLn = PL1;
    Matrix PRn = PR1;
    int top = 63 - __builtin_clzl(static_cast<unsigned long>(pieces));
    for (int bit = top - 1; bit >= 0; --bit) {
        S = S + PLn * S * PRn;
        PLn = PLn * PLn;
        PRn = PRn * PRn;
        if ((pieces >> bit) & 1L) {
            S = Q + PL1 * S * PR1;
            PLn = PLn * PL1;
            PRn = PRn * PR1;
        }
    }
    return {std::move(PLn), std::move(PRn), std::move(S)};
}

Matrix exponential_integral_direct(const Matrix& L, const Matrix& R, const Matrix& C, double t,
                                   const QuadratureSpec& spec) {
    spec.validate();
    const GaussRule& rule = gauss_legendre(spec.nodes_per_interval);
    Matrix out = Matrix::Zero(C.rows(), C.cols());
    if (t == 0.0)
        return out;
    const double width = t / spec.substeps;
    const double half = 0.5 * width;
    for (int piece = 0; piece < spec.substeps; ++piece) {
        const double lo = piece * width;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double lag = t - (lo + half * (rule.nodes[i] + 1.0));
            out.noalias() += (half * rule.weights[i]) * (expm(lag * L) * C * expm(lag * R));
        }
    }
    return out;
}

}  // namespace sylkrylov
