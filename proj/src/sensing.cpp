#include "phonon/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phonon/fock.hpp"

namespace phonon::sensing {

PhononDistribution displaced_diag_dist(const PhononDistribution& dist, double u) {
    if (u < 0.0) throw std::invalid_argument("displaced_diag_dist: negative energy");
    if (u == 0.0) return dist;
    const auto& p = dist.probs();
    int out_size = dist.truncation() + 1;
    for (int attempt = 0; attempt < 10; ++attempt) {
        out_size += int(std::ceil(u + 10.0 * std::sqrt(u * double(dist.truncation() + 1)) + 16.0));
        std::vector<double> masses(std::size_t(out_size), 0.0);
        for (std::size_t m = 0; m < p.size(); ++m) {
            if (p[m] == 0.0) continue;
            for (int n = 0; n < out_size; ++n)
                masses[std::size_t(n)] += p[m] * displaced_fock_prob(n, int(m), u);
        }
        double mass = 0.0;
        for (double v : masses) mass += v;
        if (mass >= 1.0 - 1e-10) {
            auto out = PhononDistribution::from_unnormalized(std::move(masses), 1.0 - 1e-10);
            out.meta = dist.meta;
            return out;
        }
    }
    throw DomainError("displaced_diag_dist: unable to capture the displaced mass");
}

namespace {

struct FisherTerms {
    double value = 0.0;
    double tail_estimate = 0.0;
    int terms = 0;
};

// Accumulates sum_n (dP_n)²/P_n with P and dP assembled from the analytic
// closed form. Stops either at the fixed truncation or adaptively.
FisherTerms fisher_sum(const PhononDistribution& dist, double u, int trunc_limit, bool adaptive) {
    const auto& rho = dist.probs();
    FisherTerms out;
    double last = 0.0;
    int quiet = 0;
    int n = 0;
    for (; n <= trunc_limit; ++n) {
        double p = 0.0, dp = 0.0;
        for (std::size_t m = 0; m < rho.size(); ++m) {
            if (rho[m] == 0.0) continue;
            p += rho[m] * displaced_fock_prob(n, int(m), u);
            dp += rho[m] * displaced_fock_prob_du(n, int(m), u);
        }
        double contribution = 0.0;
        if (p >= 1e-300) {
            contribution = dp * dp / p;
            out.value += contribution;
        }
        ++out.terms;
        last = contribution;
        if (adaptive && n > dist.truncation()) {
            bool negligible = p < 1e-14 && contribution <= 1e-9 * std::max(out.value, 1e-300);
            quiet = negligible ? quiet + 1 : 0;
            if (quiet >= 3 && double(n) > dist.mean() + u + 10.0 * std::sqrt(u + 1.0)) break;
        }
    }
    out.tail_estimate = 3.0 * last;
    return out;
}

}  // namespace

double fisher(const PhononDistribution& dist, double u) {
    if (u <= 0.0) throw std::invalid_argument("fisher: u must be positive");
    auto sum = fisher_sum(dist, u, 100000, true);
    return sum.value;
}

double fisher(const PhononDistribution& dist, double u, int trunc) {
    if (u <= 0.0) throw std::invalid_argument("fisher: u must be positive");
    if (trunc < dist.truncation())
        throw std::invalid_argument("fisher: trunc below the distribution truncation");
    auto sum = fisher_sum(dist, u, trunc, false);
    if (sum.tail_estimate > 1e-6 * std::max(sum.value, 1e-300))
        throw DomainError("fisher: truncation tail bound above 1e-6 of F; increase trunc");
    return sum.value;
}

double sigma(const PhononDistribution& dist, double u, long shots) {
    if (shots < 1) throw std::invalid_argument("sigma: shots must be at least 1");
    double f = fisher(dist, u);
    if (f <= 0.0) throw DomainError("sigma: uninformative point (F = 0)");
    return 1.0 / std::sqrt(double(shots) * f);
}

double metrological_ratio(const PhononDistribution& dist, double u, long shots) {
    double s = sigma(dist, u, shots);
    double s0 = sigma(PhononDistribution::vacuum(), u, shots);
    return s / s0;
}

double ideal_ratio(int n) {
    if (n < 0) throw std::invalid_argument("ideal_ratio: negative index");
    return 1.0 / std::sqrt(2.0 * double(n) + 1.0);
}

double approx_sigma(int n, double p_n, double p_e, double u, long shots) {
    if (n < 0) throw std::invalid_argument("approx_sigma: negative index");
    if (p_n <= 0.0) throw DomainError("approx_sigma: P_n must be positive");
    if (p_n + p_e > 1.0 + 1e-9)
        throw std::invalid_argument("approx_sigma: P_n + P_e exceeds one");
    if (u < 0.0 || shots < 1) throw std::invalid_argument("approx_sigma: bad u or shots");
    double weight = 2.0 * double(n) + 1.0;
    double variance = u / (weight * p_n * double(shots)) +
                      p_e / (weight * weight * double(shots) * p_n * p_n);
    return std::sqrt(variance);
}

std::vector<double> default_u_grid() {
    std::vector<double> grid(60);
    double lo = std::log(1e-6), hi = std::log(1.0);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = std::exp(lo + (hi - lo) * double(i) / double(grid.size() - 1));
    return grid;
}

SensingReport sensing_report(const PhononDistribution& dist, const std::vector<double>& u_grid,
                             long shots) {
    SensingReport report;
    report.u_grid = u_grid;
    report.shots = shots;
    for (double u : u_grid) {
        double f = fisher(dist, u);
        report.fisher.push_back(f);
        double s = 1.0 / std::sqrt(double(shots) * f);
        report.sigma.push_back(s);
        report.ratio.push_back(s / sigma(PhononDistribution::vacuum(), u, shots));
    }
    return report;
}

PhononDistribution noisy_fock_model(int n, double p_n) {
    if (n < 1) throw std::invalid_argument("noisy_fock_model: n must be positive");
    if (p_n < 0.0 || p_n > 1.0)
        throw std::invalid_argument("noisy_fock_model: P_n must lie in [0, 1]");
    std::vector<double> probs(std::size_t(n) + 2, 0.0);
    double rest = 1.0 - p_n;
    probs[std::size_t(n)] = p_n;
    probs[std::size_t(n - 1)] = rest * double(n) / (2.0 * double(n) + 1.0);
    probs[std::size_t(n + 1)] = rest * double(n + 1) / (2.0 * double(n) + 1.0);
    return PhononDistribution::from_probs(std::move(probs));
}

double advantage_threshold(int n, double p_tol) {
    if (n < 1) throw std::invalid_argument("advantage_threshold: n must be positive");
    // The model ratio uses the coarse-grained small-u deviation (the same
    // expansion as approx_sigma, with P_e = 1 - P_n). The exact Fisher of the
    // three-level model is dominated by its empty phonon slots (1/u-type
    // information at any P_n) and yields no finite threshold.
    const auto grid = default_u_grid();
    auto beats = [&](double p) {
        double pe = 1.0 - p;
        double weight = 2.0 * double(n) + 1.0;
        for (double u : grid) {
            double s2 = u / (weight * p) + pe / (weight * weight * p * p);
            if (s2 < u / (2.0 * double(n) - 1.0)) return true;
        }
        return false;
    };
    if (!beats(1.0 - 1e-12))
        throw DomainError("advantage_threshold: model never beats the lower ideal Fock state");

    double lo = 1e-9, hi = 1.0 - 1e-12;
    if (beats(lo)) return lo;
    while (hi - lo > p_tol) {
        double mid = 0.5 * (lo + hi);
        (beats(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace phonon::sensing
