#include "phonon/prep.hpp"

#include <cmath>
#include <stdexcept>

#include "phonon/thermal.hpp"

namespace phonon::prep {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void PrepConfig::validate() const {
    rabi.validate();
    if (n_target < 0) throw std::invalid_argument("PrepConfig: negative target");
    if (p0_init < 0.0 || p0_init > 1.0)
        throw std::invalid_argument("PrepConfig: p0_init must lie in [0, 1]");
    if (pulse_efficiency < 0.0 || pulse_efficiency > 1.0)
        throw std::invalid_argument("PrepConfig: pulse_efficiency must lie in [0, 1]");
    if (heating_rate < 0.0) throw std::invalid_argument("PrepConfig: negative heating rate");
}

double sequence_duration(const PrepConfig& cfg) {
    cfg.validate();
    double total = 0.0;
    for (int k = 1; k <= cfg.n_target; ++k)
        total += kPi / (std::sqrt(double(k)) * cfg.rabi.omega_c * cfg.rabi.eta);
    return total;
}

PhononDistribution ladder_prepare(const PrepConfig& cfg) {
    cfg.validate();
    std::vector<double> probs(std::size_t(cfg.n_target) + 2, 0.0);
    probs[0] = cfg.p0_init;
    probs[1] = 1.0 - cfg.p0_init;
    auto state = PhononDistribution::from_probs(std::move(probs));

    for (int k = 1; k <= cfg.n_target; ++k) {
        auto p = state.probs();
        double moved = cfg.pulse_efficiency * p[std::size_t(k - 1)];
        p[std::size_t(k - 1)] -= moved;
        p[std::size_t(k)] += moved;
        state = PhononDistribution::from_probs(std::move(p));
        if (cfg.heat_per_pulse && cfg.heating_rate > 0.0) {
            double tau = kPi / (std::sqrt(double(k)) * cfg.rabi.omega_c * cfg.rabi.eta);
            state = thermal::gaussian_additive(state, cfg.heating_rate * tau);
        }
    }
    if (!cfg.heat_per_pulse && cfg.heating_rate > 0.0)
        state = thermal::gaussian_additive(state, cfg.heating_rate * sequence_duration(cfg));
    return state;
}

}  // namespace phonon::prep
