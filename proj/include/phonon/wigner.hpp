#pragma once

#include <vector>

#include "phonon/distribution.hpp"
#include "phonon/thermal.hpp"

namespace phonon::wigner {

/// Radial section of the rotationally symmetric Wigner function of a
/// Fock-diagonal state, W(s) with s = sqrt(x² + p²). Convention:
/// W_n(s) = ((-1)^n / pi) e^{-s²} L_n(2 s²), so the full function integrates
/// to one and the vacuum peaks at 1/pi.
struct RadialWigner {
    std::vector<double> radii;
    std::vector<double> values;
};

RadialWigner wigner_radial(const PhononDistribution& dist, const std::vector<double>& radii);

/// 2000 uniform samples on [0, sqrt(2n) + 5].
std::vector<double> default_radial_grid(int n, int samples = 2000);

/// 2 pi \int W(s) s ds on the sampled grid (composite Simpson).
double radial_norm(const RadialWigner& w);

/// Number of nodal rings bounding the alternating negative annuli of the
/// radial profile (certified sign crossings outside a +-eps dead band); a
/// pure Fock |n> yields exactly n. Requires the grid to separate adjacent
/// crossings by at least three samples.
int count_negative_annuli(const RadialWigner& w, double eps = 1e-12);

/// Maximal nbar of the Gaussian additive channel on |n> under which every
/// negative peak of the unthermalized profile retains at least `retain` of
/// its magnitude. Peaks are matched to their nbar = 0 ancestors by nearest
/// radius.
thermal::DepthReport negativity_depth(int n, double retain = 0.05, double tolerance = 1e-4);

}  // namespace phonon::wigner
