#pragma once

#include "sylkrylov/dense.hpp"

#include <functional>
#include <vector>

namespace sylkrylov {

/// Composite Gauss-Legendre rule: `substeps` equal pieces with `nodes_per_interval` nodes each.
struct QuadratureSpec {
    int nodes_per_interval = 12;
    int substeps = 8;

    void validate() const;
};

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights by Newton iteration on P_n.
const GaussRule& gauss_legendre(int n);

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& spec);

/// Step data of the affine recurrence X(t + dt) = PL X(t) PR + Q, where
///   PL = e^{dt L},  PR = e^{dt R},  Q = int_0^dt e^{u L} C e^{u R} du.
struct ExponentialStep {
    Matrix PL;
    Matrix PR;
    Matrix Q;
};

/// Evaluates the integral with a composite Gauss-Legendre rule whose piece width is refined
/// (by powers of two beyond spec.substeps) until width * max(|L|_1, |R|_1) <= 1, then sums
/// the shifted pieces through the semigroup property.
ExponentialStep exponential_step(const Matrix& L, const Matrix& R, const Matrix& C, double dt,
                                 const QuadratureSpec& spec);

/// Same integral over [0, t] evaluated node by node: sum_i w_i e^{(t - x_i) L} C e^{(t - x_i) R}.
/// Quadratic in the node count; used as a cross-check.
Matrix exponential_integral_direct(const Matrix& L, const Matrix& R, const Matrix& C, double t,
                                   const QuadratureSpec& spec);

}  // namespace sylkrylov
