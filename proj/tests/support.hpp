#pragma once

#include "sylkrylov/dense.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

namespace sylkrylov::testing {

/// Entries uniform in [lo, hi) from a mt19937_64 stream (raw bits, no distribution object,
/// so the values do not depend on the standard library).
inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double lo = -1.0,
                            double hi = 1.0) {
    std::mt19937_64 gen(seed);
    Matrix M(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            M(i, j) = lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return M;
}

/// Random matrix shifted so that its symmetric part is negative definite.
inline Matrix random_stable(Index n, std::uint64_t seed, double margin = 1.0) {
    Matrix M = random_matrix(n, n, seed);
    const double shift = (M + M.transpose()).eval().jacobiSvd().singularValues()(0) / 2.0;
    M.diagonal().array() -= shift + margin;
    return M;
}

inline double rel_diff(const Matrix& X, const Matrix& Y) {
    const double ref = std::max(Y.norm(), 1e-300);
    return (X - Y).norm() / ref;
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
inline Vector jacobi_eigenvalues(Matrix S) {
    const Index n = S.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Index p = 0; p < n; ++p)
            for (Index q = p + 1; q < n; ++q)
                off += S(p, q) * S(p, q);
        if (off <= 1e-30 * std::max(1.0, S.squaredNorm()))
            break;
        for (Index p = 0; p < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                if (S(p, q) == 0.0)
                    continue;
                const double theta = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (Index k = 0; k < n; ++k) {
                    const double skp = S(k, p), skq = S(k, q);
                    S(k, p) = c * skp - s * skq;
                    S(k, q) = s * skp + c * skq;
                }
                for (Index k = 0; k < n; ++k) {
                    const double spk = S(p, k), sqk = S(q, k);
                    S(p, k) = c * spk - s * sqk;
                    S(q, k) = s * spk + c * sqk;
                }
            }
        }
    }
    Vector d = S.diagonal();
    std::sort(d.data(), d.data() + n);
    return d;
}

}  // namespace sylkrylov::testing
