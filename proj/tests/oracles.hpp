// Test-side oracles, independent of the library's evaluation paths: direct
// matrix exponentials of the generators, analytic reference distributions,
// finite-difference Fisher information and moment-integral channel entries.
#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <vector>

#include "phonon/distribution.hpp"
#include "phonon/sensing.hpp"

namespace oracles {

inline Eigen::MatrixXcd ladder(int dim) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (int k = 0; k + 1 < dim; ++k) a(k, k + 1) = std::sqrt(double(k + 1));
    return a;
}

// exp(alpha a† - alpha* a), dense Padé on the full generator
inline Eigen::MatrixXcd expm_displacement(phonon::complexd alpha, int dim) {
    Eigen::MatrixXcd a = ladder(dim);
    Eigen::MatrixXcd gen = alpha * a.adjoint() - std::conj(alpha) * a;
    return gen.exp();
}

// exp(r a†² - r* a²)
inline Eigen::MatrixXcd expm_squeeze(phonon::complexd r, int dim) {
    Eigen::MatrixXcd a = ladder(dim);
    Eigen::MatrixXcd a2 = a * a;
    Eigen::MatrixXcd gen = r * a2.adjoint() - std::conj(r) * a2;
    return gen.exp();
}

inline double poisson_p(double mean, int n) {
    return std::exp(-mean + n * std::log(mean) - std::lgamma(double(n) + 1.0));
}

inline double bose_einstein_p(double nbar, int n) {
    return std::pow(nbar / (1.0 + nbar), double(n)) / (1.0 + nbar);
}

// Central-difference Fisher information of the displaced distribution.
inline double fd_fisher(const phonon::PhononDistribution& dist, double u) {
    double h = 1e-7 * std::max(u, 1e-4);
    auto up = phonon::sensing::displaced_diag_dist(dist, u + h);
    auto down = phonon::sensing::displaced_diag_dist(dist, u - h);
    auto mid = phonon::sensing::displaced_diag_dist(dist, u);
    double f = 0.0;
    int top = std::max({up.truncation(), down.truncation(), mid.truncation()});
    for (int k = 0; k <= top; ++k) {
        double p = mid.p(k);
        if (p < 1e-12) continue;
        double dp = (up.p(k) - down.p(k)) / (2.0 * h);
        f += dp * dp / p;
    }
    return f;
}

// Coefficients of the polynomial part of |<n|D(sqrt u)|m>|² = e^{-u} q(u).
inline std::vector<double> delta_poly(int n, int m) {
    int lo = std::min(n, m), hi = std::max(n, m), d = hi - lo;
    std::vector<double> lag(std::size_t(lo) + 1, 0.0);
    for (int k = 0; k <= lo; ++k) {
        double binom = std::exp(std::lgamma(double(lo + d) + 1.0) -
                                std::lgamma(double(lo - k) + 1.0) -
                                std::lgamma(double(d + k) + 1.0));
        lag[std::size_t(k)] = (k % 2 ? -1.0 : 1.0) * binom / std::tgamma(double(k) + 1.0);
    }
    std::vector<double> square(2 * std::size_t(lo) + 1, 0.0);
    for (std::size_t i = 0; i < lag.size(); ++i)
        for (std::size_t j = 0; j < lag.size(); ++j) square[i + j] += lag[i] * lag[j];
    double pref = std::exp(std::lgamma(double(lo) + 1.0) - std::lgamma(double(hi) + 1.0));
    std::vector<double> poly(square.size() + std::size_t(d), 0.0);
    for (std::size_t j = 0; j < square.size(); ++j) poly[j + std::size_t(d)] = pref * square[j];
    return poly;
}

// Exact Gaussian-additive channel entry by termwise exponential moments:
// integral (1/nbar) e^{-u/nbar} e^{-u} u^j du = j! nbar^j / (1+nbar)^{j+1}.
inline double channel_entry_moment(int n, int m, double nbar) {
    auto poly = delta_poly(n, m);
    double total = 0.0;
    for (std::size_t j = 0; j < poly.size(); ++j) {
        double moment = std::exp(std::lgamma(double(j) + 1.0) + double(j) * std::log(nbar) -
                                 (double(j) + 1.0) * std::log1p(nbar)) /
                        (1.0 + nbar);
        total += poly[j] * moment;
    }
    return total;
}

inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    double uniform() { return double((state = mix(state)) >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) { return lo + int(uniform() * double(hi - lo + 1)); }
};

inline phonon::PhononDistribution random_distribution(Rng& rng, int truncation) {
    std::vector<double> p(std::size_t(truncation) + 1, 0.0);
    double sum = 0.0;
    for (auto& v : p) {
        v = rng.uniform();
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return phonon::PhononDistribution::from_probs(std::move(p));
}

}  // namespace oracles
