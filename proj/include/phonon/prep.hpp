#pragma once

#include "phonon/distribution.hpp"
#include "phonon/rabi.hpp"

namespace phonon::prep {

/// Configuration of the pi-pulse ladder that climbs |0> -> |n_target> with
/// continuous heating between pulses.
struct PrepConfig {
    int n_target = 0;
    rabi::RabiConfig rabi;
    double heating_rate = 0.0;      // phonons per second
    double p0_init = 1.0;           // ground-state preparation fidelity
    double pulse_efficiency = 1.0;  // population transferred per pi-pulse
    bool heat_per_pulse = true;     // false: apply all heating after the ladder

    void validate() const;
};

/// Total ladder duration sum_k pi / (sqrt(k) Omega_c eta); pulse k drives the
/// n = k-1 -> k transfer.
double sequence_duration(const PrepConfig& cfg);

/// Simulates the ladder: each pulse moves pulse_efficiency of the resonant
/// population one rung up, then the heating channel acts for the pulse
/// duration. Populations away from the addressed rung are untouched.
PhononDistribution ladder_prepare(const PrepConfig& cfg);

}  // namespace phonon::prep
