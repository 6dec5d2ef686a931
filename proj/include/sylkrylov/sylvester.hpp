#pragma once

#include "sylkrylov/dense.hpp"

#include <optional>

namespace sylkrylov {

/// left * Y + Y * right^T + rhs = 0, with left q x q, right r x r, rhs q x r.
struct SylvesterSystem {
    Matrix left;
    Matrix right;
    Matrix rhs;

    /// rhs given as the product E * F^T; the factors are multiplied out.
    static SylvesterSystem from_factors(Matrix left, Matrix right, const Matrix& E,
                                        const Matrix& F);
};

/// Raised when left and -right share (numerically) an eigenvalue.
class SpectralClashError : public SingularError {
public:
    using SingularError::SingularError;
};

/// Bartels-Stewart solver with both real Schur forms cached, for repeated solves against
/// the same coefficient pair (the per-step systems of the time integrators).
class SylvesterSolver {
public:
    /// Pivots below tol.sylvester_pivot * scale count as a spectral clash. `scale`
    /// defaults to |left|_F + |right|_F; callers that form left and right as a difference
    /// of terms pass the size of the terms, since cancellation can make the difference tiny.
    SylvesterSolver(const Matrix& left, const Matrix& right,
                    const Tolerances& tol = default_tolerances(),
                    std::optional<double> scale = std::nullopt);

    Matrix solve(const Matrix& rhs) const;

    Index left_size() const { return left_schur_.S.rows(); }
    Index right_size() const { return right_schur_.S.rows(); }

private:
    SchurResult left_schur_;
    SchurResult right_schur_;
    double pivot_floor_;
};

Matrix bartels_stewart(const SylvesterSystem& sys, const Tolerances& tol = default_tolerances());

/// Dense Kronecker-form solve (I (x) left + right (x) I) vec(Y) = -vec(rhs). Requires q*r <= 2500.
Matrix kron_solve(const SylvesterSystem& sys);

inline constexpr Index kKronSolveMaxUnknowns = 2500;

}  // namespace sylkrylov
