#pragma once

#include <functional>
#include <string>
#include <vector>

#include "phonon/distribution.hpp"

namespace phonon::thermal {

/// Damping (A) and excitation (B) rates of the birth-death phonon dynamics.
/// A steady state exists only for A > B; it is Bose-Einstein with mean
/// B / (A - B).
struct DopplerRates {
    double damping = 0.0;     // A, 1/s
    double excitation = 0.0;  // B, 1/s

    void validate() const;
    bool has_steady_state() const { return damping > excitation; }
    double steady_state_mean() const;  // throws unless A > B
};

enum class DepthCriterion { genuine, basic, wigner_negativity };

std::string to_string(DepthCriterion c);

struct DepthReport {
    int n = 0;
    DepthCriterion criterion = DepthCriterion::genuine;
    double depth_nbar = 0.0;
    double bisection_tolerance = 1e-4;
};

class QuadratureError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Phase-averaged Gaussian displacement channel with exponential energy
/// weight: P'_n = sum_m P_m \int_0^inf (1/nbar) e^{-u/nbar} |<n|D(sqrt u)|m>|² du,
/// by Gauss-Laguerre quadrature with order escalation. Trace preserving;
/// vacuum maps to the Bose-Einstein state of mean nbar.
PhononDistribution gaussian_additive(const PhononDistribution& dist, double nbar);

/// First-order diagonal expansion of the channel:
/// P'_n = P_n + eps [(n+1) P_{n+1} + n P_{n-1} - (2n+1) P_n], clamped and
/// renormalized.
PhononDistribution lindblad_first_order(const PhononDistribution& dist, double eps);

/// Integrates dP_n/dt = A(n+1)P_{n+1} + B n P_{n-1} - [A n + B(n+1)] P_n with
/// an adaptive Dormand-Prince step and automatic truncation growth.
PhononDistribution doppler_evolve(const PhononDistribution& dist, const DopplerRates& rates,
                                  double t, int truncation_cap = 4096);

/// Short-time series coefficients mu_{n,k} of P_n(t) = sum_k mu_{n,k} t^k for
/// the initial state |m>, obtained by matching powers of t in the rate
/// equation.
struct DopplerTaylor {
    int initial_state = 0;
    int order = 0;
    std::vector<std::vector<double>> mu;  // mu[n][k]

    double evaluate(int n, double t) const;
};
DopplerTaylor doppler_taylor(int m, const DopplerRates& rates, int order);

/// Maximal nbar of gaussian_additive under which the criterion still holds,
/// by bisection to tolerance 1e-4 mean phonons. The criterion must hold for
/// the unthermalized distribution.
using CriterionPredicate = std::function<bool(const PhononDistribution&)>;
DepthReport thermal_depth(const PhononDistribution& dist, int n, DepthCriterion label,
                          const CriterionPredicate& criterion, double tolerance = 1e-4);

/// Recoil-pulse calibration nbar = rate * tau; default 115e3 phonons/s.
double pulse_to_nbar(double tau_seconds, double recoil_rate = 115e3);

}  // namespace phonon::thermal
