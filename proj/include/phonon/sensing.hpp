#pragma once

#include <vector>

#include "phonon/distribution.hpp"

namespace phonon::sensing {

/// Fisher information, Cramér-Rao deviation and metrological ratio over a
/// grid of displacement energies u = |alpha|².
struct SensingReport {
    std::vector<double> u_grid;
    std::vector<double> fisher;
    std::vector<double> sigma;
    std::vector<double> ratio;
    long shots = 1;
};

/// Phonon distribution after a phase-averaged displacement of energy u:
/// P_n(u) = sum_m P_m |<n|D(sqrt u)|m>|².
PhononDistribution displaced_diag_dist(const PhononDistribution& dist, double u);

/// Exact Fisher information F = sum_n [dP_n(u)/du]² / P_n(u) with the
/// derivative taken analytically; terms with negligible probability are
/// skipped and the truncation tail is bounded.
double fisher(const PhononDistribution& dist, double u);
double fisher(const PhononDistribution& dist, double u, int trunc);

/// Cramér-Rao standard deviation sigma = 1/sqrt(N F) of the u estimate.
double sigma(const PhononDistribution& dist, double u, long shots);

/// R = sigma(dist) / sigma(vacuum) at equal u and shot count.
double metrological_ratio(const PhononDistribution& dist, double u, long shots);

/// 1/sqrt(2n+1), the flat ratio of the ideal Fock probe.
double ideal_ratio(int n);

/// Small-u approximation sigma² = u/((2n+1) P_n N) + P_e/((2n+1)² N P_n²).
double approx_sigma(int n, double p_n, double p_e, double u, long shots);

/// Default grid of Fig.-3 style sweeps: 60 log-spaced points in [1e-6, 1].
std::vector<double> default_u_grid();

SensingReport sensing_report(const PhononDistribution& dist, const std::vector<double>& u_grid,
                             long shots);

/// The three-level noisy Fock model: P_n free, the complement split n : n+1
/// between the neighbours.
PhononDistribution noisy_fock_model(int n, double p_n);

/// Minimal P_n of the noisy Fock model whose small-u estimation error beats
/// the ideal Fock state |n-1> somewhere on the default u grid.
double advantage_threshold(int n, double p_tol = 1e-6);

}  // namespace phonon::sensing
