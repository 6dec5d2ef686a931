#pragma once

#include "sylkrylov/driver.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace sylkrylov {

using Field2D = std::function<double(double, double)>;

/// L u = Laplace(u) + cx(x,y) du/dx + cy(x,y) du/dy + g(x,y) u on the unit square, zero
/// Dirichlet data, n0 inner points per direction.
struct FDOperatorSpec {
    Index n0 = 10;
    Field2D cx;  // coefficient of du/dx, empty means 0
    Field2D cy;  // coefficient of du/dy
    Field2D g;   // reaction

    /// Laplace(u) - f1 u_x + f2 u_y + g1 u with f1 = x + 10 y^2, f2 = sqrt(2 x^2 + y^2), g1 = x^2 - y^2.
    static FDOperatorSpec LA(Index n0);
    /// Laplace(u) - f3 u_x + f4 u_y + g2 u with f3 = x + 2 y, f4 = exp(y - x), g2 = y^2 - x^2.
    static FDOperatorSpec LB(Index n0);
    static FDOperatorSpec laplacian(Index n0);
};

/// Centered 5-point discretization, mesh width 1/(n0+1), lexicographic ordering with x
/// running fastest: node (i, j) at (i h, j h) has index (j - 1) n0 + (i - 1).
SparseOperator fd_operator(const FDOperatorSpec& spec);

/// Uniform [0, 1) values from a counter-based SplitMix64 stream:
///   value(k) = (mix64(seed + (k + 1) * 0x9E3779B97F4A7C15) >> 11) * 2^-53.
double uniform_at(std::uint64_t seed, std::uint64_t k);

/// E (n x s) takes counters 0 .. n s - 1 column-major, F (p x s) continues at n s. If either
/// block has sigma_min / sigma_max <= 1e-8 the draw is repeated with seed + 1.
std::pair<Matrix, Matrix> random_low_rank(Index n, Index p, Index s, std::uint64_t seed);

inline constexpr Index kKroneckerMaxUnknowns = 40'000;

enum class KroneckerEvaluation {
    Auto,        ///< SparseLU up to kKroneckerLUMaxUnknowns unknowns, Eigenbasis above
    SparseLU,    ///< one sparse LU of I - hK, one solve per inner step
    Eigenbasis,  ///< same recurrence, diagonalized: x_N = x* + r^N (x_0 - x*) per mode
};

inline constexpr Index kKroneckerLUMaxUnknowns = 2'500;

/// Implicit Euler on vec(X)' = K vec(X) + vec(sign E F^T), K = I (x) A + B^T (x) I, with inner
/// step at most h_inner (each grid interval is split evenly). Dense states at the grid times.
/// The eigenbasis evaluation falls back to SparseLU when A or B^T is not diagonalizable
/// to working accuracy.
std::vector<Matrix> kronecker_oracle(const DSEProblem& problem, const std::vector<double>& times,
                                     double h_inner,
                                     KroneckerEvaluation how = KroneckerEvaluation::Auto);

/// X(t) = e^{(t-t0) A} X0 e^{(t-t0) B} + int_0^{t-t0} e^{uA} sign E F^T e^{uB} du with dense
/// exponentials. Requires n, p <= 400.
std::vector<Matrix> integral_reference(const DSEProblem& problem,
                                       const std::vector<double>& times,
                                       const QuadratureSpec& q);

/// Example 1: A from LA on an n0 x n0 grid, B from LB on p0 x p0, random E, F, interval [0, 2].
DSEProblem example1(Index n0, Index p0, Index s, std::uint64_t seed);

/// Example 2 layout: B = A, constant term -E F^T, interval [0, 2].
DSEProblem example2(const SparseOperator& A, Index s, std::uint64_t seed);

/// 100 x 100 symmetric negative definite matrix built from a 1D Laplacian plus a
/// deterministic diagonal shift; offline stand-in for the file-based example.
SparseOperator surrogate100_operator();
DSEProblem surrogate100(Index s, std::uint64_t seed);

/// Resolves a data file: absolute/existing paths as given, otherwise relative to
/// $SYLKRYLOV_DATA_DIR. Throws if not found.
std::filesystem::path resolve_data_file(const std::string& name);

inline constexpr const char* kRailFileName = "rail_1357_c60.A";

}  // namespace sylkrylov
