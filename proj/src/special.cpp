#include "phonon/special.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace phonon::special {

double log_factorial(int n) {
    if (n < 0) throw std::invalid_argument("log_factorial: negative argument");
    static const auto table = [] {
        std::vector<double> t(256);
        t[0] = 0.0;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(double(i));
        return t;
    }();
    if (n < int(table.size())) return table[n];
    return std::lgamma(double(n) + 1.0);
}

double assoc_laguerre(int k, int a, double x) {
    return assoc_laguerre_with_derivative(k, a, x).value;
}

LaguerrePair assoc_laguerre_with_derivative(int k, int a, double x) {
    if (k < 0 || a < 0) throw std::invalid_argument("assoc_laguerre: negative index");
    if (k == 0) return {1.0, 0.0};
    // L recurrence for the value; the derivative is -L_{k-1}^{(a+1)}.
    auto run = [x](int kk, int aa) {
        if (kk == 0) return 1.0;
        double lm1 = 1.0;
        double l = 1.0 + aa - x;
        for (int j = 1; j < kk; ++j) {
            double lp1 = ((2.0 * j + 1.0 + aa - x) * l - (j + aa) * lm1) / (j + 1.0);
            lm1 = l;
            l = lp1;
        }
        return l;
    };
    double value = run(k, a);
    double derivative = -run(k - 1, a + 1);
    return {value, derivative};
}

double alternating_laguerre_sum(const std::vector<double>& weights, double x) {
    if (weights.empty()) return 0.0;
    double acc = weights[0];
    double lm1 = 1.0;      // L_0
    double l = 1.0 - x;    // L_1
    double sign = -1.0;
    for (std::size_t n = 1; n < weights.size(); ++n) {
        acc += sign * weights[n] * l;
        double lp1 = ((2.0 * n + 1.0 - x) * l - double(n) * lm1) / double(n + 1);
        lm1 = l;
        l = lp1;
        sign = -sign;
    }
    return acc;
}

namespace {

QuadratureRule compute_gauss_laguerre(int order) {
    // Jacobi matrix of the Laguerre weight: diag 2i+1, offdiag i+1.
    Eigen::VectorXd diag(order), sub(order - 1);
    for (int i = 0; i < order; ++i) diag[i] = 2.0 * i + 1.0;
    for (int i = 0; i + 1 < order; ++i) sub[i] = double(i + 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("gauss_laguerre: eigen decomposition failed");

    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = solver.eigenvalues()[i];
        double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;  // total weight integral of exp(-x) is 1
    }
    return rule;
}

}  // namespace

const QuadratureRule& gauss_laguerre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_laguerre: order must be positive");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_laguerre(order)).first;
    return it->second;
}

}  // namespace phonon::special
