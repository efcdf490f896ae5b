#pragma once

#include <cstdint>
#include <vector>

namespace phonon::special {

/// ln(n!) with a small cached table for the common range.
double log_factorial(int n);

/// Associated Laguerre polynomial L_k^{(a)}(x) by the three-term recurrence.
/// Valid for integer a >= 0.
double assoc_laguerre(int k, int a, double x);

/// Evaluates L_k^{(a)}(x) together with d/dx L_k^{(a)}(x) = -L_{k-1}^{(a+1)}(x).
struct LaguerrePair {
    double value;
    double derivative;
};
LaguerrePair assoc_laguerre_with_derivative(int k, int a, double x);

/// Sum_{n} w_n * (-1)^n * L_n(x) for plain Laguerre polynomials, accumulated
/// in one pass of the recurrence. Used for radial Wigner profiles.
double alternating_laguerre_sum(const std::vector<double>& weights, double x);

/// Gauss-Laguerre rule for integrals of exp(-x) f(x) on [0, inf).
/// Nodes and weights via the Golub-Welsch eigenvalue method; results are
/// cached per order.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const QuadratureRule& gauss_laguerre(int order);

}  // namespace phonon::special
