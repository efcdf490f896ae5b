#pragma once

#include <cstdint>
#include <vector>

#include "phonon/distribution.hpp"

namespace phonon::rabi {

/// Calibration of the blue-sideband interaction. All rates are angular
/// frequencies in rad/s; the decay exponent x sets gamma_n = (n+1)^x gamma_0.
struct RabiConfig {
    double omega_c = 2.0 * 3.14159265358979323846 * 69.7e3;  // carrier Rabi frequency
    double eta = 0.0632;                                     // Lamb-Dicke parameter
    double gamma0 = 2.0 * 3.14159265358979323846 * 0.054e3;  // base decay rate
    double x = 0.7;                                          // decay exponent
    int shots = 100;                                         // measurements per time point

    void validate() const;
};

struct RabiTrace {
    std::vector<double> times;  // seconds, strictly increasing
    std::vector<double> p_g;    // ground-state probabilities
    int shots = 100;

    void validate() const;
};

/// Sideband Rabi frequency Omega_n = sqrt(n+1) Omega_c eta.
double omega_n(int n, const RabiConfig& cfg);

/// p_g(t) = (1 - sum_n P_n cos(Omega_n t) exp(-gamma_n t)) / 2.
std::vector<double> rabi_signal(const PhononDistribution& dist, const std::vector<double>& times,
                                const RabiConfig& cfg);

/// Uniform grid with >= 32 samples per period of Omega_{n_target+2}, spanning
/// >= 6 periods of the slowest component Omega_0.
std::vector<double> sampling_plan(int n_target, const RabiConfig& cfg);

/// Fit truncation rule used throughout: states 0..N+2 for target |N>.
int fit_nmax_for_target(int n_target);

struct FitResult {
    PhononDistribution populations;
    double ssr = 0.0;  // sum of squared residuals in p_g
};

/// Nonnegative least squares of the oscillation model over P_0..P_{n_max}
/// with the calibration held fixed, renormalized to unit sum.
FitResult fit_populations(const RabiTrace& trace, const RabiConfig& cfg, int n_max);

struct McUncertainty {
    std::vector<double> sigma;  // per-index standard deviation of P_n
    int failed_draws = 0;
};

/// Projection-noise Monte Carlo: rebinomialize every point of the trace,
/// refit, and report the per-index standard deviation over draws.
McUncertainty mc_uncertainty(const RabiTrace& trace, const RabiConfig& cfg, int n_max, int draws,
                             std::uint64_t seed = 0xB0075EEDull);

/// Lawson-Hanson nonnegative least squares: minimizes |A x - b| with x >= 0.
std::vector<double> nnls(const std::vector<std::vector<double>>& columns,
                         const std::vector<double>& rhs, double tol = 1e-12);

}  // namespace phonon::rabi
