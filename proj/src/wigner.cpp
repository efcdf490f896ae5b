#include "phonon/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phonon/special.hpp"

namespace phonon::wigner {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

RadialWigner wigner_radial(const PhononDistribution& dist, const std::vector<double>& radii) {
    RadialWigner w;
    w.radii = radii;
    w.values.resize(radii.size());
    const auto& p = dist.probs();
    for (std::size_t i = 0; i < radii.size(); ++i) {
        double s2 = radii[i] * radii[i];
        w.values[i] = special::alternating_laguerre_sum(p, 2.0 * s2) * std::exp(-s2) / kPi;
    }
    return w;
}

std::vector<double> default_radial_grid(int n, int samples) {
    if (n < 0 || samples < 2) throw std::invalid_argument("default_radial_grid: bad arguments");
    double s_max = std::sqrt(2.0 * double(n)) + 5.0;
    std::vector<double> grid(std::size_t(samples), 0.0);
    for (int i = 0; i < samples; ++i)
        grid[std::size_t(i)] = s_max * double(i) / double(samples - 1);
    return grid;
}

double radial_norm(const RadialWigner& w) {
    const auto& s = w.radii;
    if (s.size() < 3) throw std::invalid_argument("radial_norm: grid too small");
    // composite Simpson on f(s) = 2 pi s W(s); odd tail handled by a trapezoid
    auto f = [&](std::size_t i) { return 2.0 * kPi * s[i] * w.values[i]; };
    double acc = 0.0;
    std::size_t i = 0;
    for (; i + 2 < s.size(); i += 2) {
        double h1 = s[i + 1] - s[i], h2 = s[i + 2] - s[i + 1];
        // uniform grids expected; Simpson coefficients for equal spacing
        acc += (h1 + h2) / 6.0 * (f(i) + 4.0 * f(i + 1) + f(i + 2));
    }
    if (i + 1 < s.size()) acc += 0.5 * (s[i + 1] - s[i]) * (f(i) + f(i + 1));
    return acc;
}

int count_negative_annuli(const RadialWigner& w, double eps) {
    if (w.values.size() < 4) throw std::invalid_argument("count_negative_annuli: grid too small");
    // Count certified sign crossings of the radial profile (the nodal rings
    // bounding the alternating negative annuli); a pure Fock |n> has exactly
    // n of them. Samples inside the +-eps dead band do not certify a sign.
    int crossings = 0;
    int current = 0;  // certified sign of the running region
    std::size_t last_change = 0;
    for (std::size_t i = 0; i < w.values.size(); ++i) {
        int sign = w.values[i] > eps ? 1 : (w.values[i] < -eps ? -1 : 0);
        if (sign == 0 || sign == current) continue;
        if (current != 0) {
            if (i - last_change < 3)
                throw DomainError("count_negative_annuli: sign changes closer than three "
                                  "samples; refine the grid");
            ++crossings;
        }
        current = sign;
        last_change = i;
    }
    return crossings;
}

namespace {

struct Peak {
    double radius;
    double value;  // most negative value inside the annulus
};

std::vector<Peak> negative_peaks(const RadialWigner& w, double eps = 1e-12) {
    std::vector<Peak> peaks;
    bool inside = false;
    Peak current{0.0, 0.0};
    for (std::size_t i = 0; i < w.values.size(); ++i) {
        bool negative = w.values[i] < -eps;
        if (negative && !inside) {
            inside = true;
            current = {w.radii[i], w.values[i]};
        } else if (negative && inside) {
            if (w.values[i] < current.value) current = {w.radii[i], w.values[i]};
        } else if (!negative && inside) {
            inside = false;
            peaks.push_back(current);
        }
    }
    if (inside) peaks.push_back(current);
    return peaks;
}

}  // namespace

thermal::DepthReport negativity_depth(int n, double retain, double tolerance) {
    if (n < 1) throw std::invalid_argument("negativity_depth: n must be positive");
    if (retain <= 0.0 || retain > 1.0)
        throw std::invalid_argument("negativity_depth: retain must lie in (0, 1]");

    auto grid = default_radial_grid(n);
    auto reference = negative_peaks(wigner_radial(PhononDistribution::fock(n), grid));
    // |n> carries one negative peak per negative annulus, (n+1)/2 of them
    if (int(reference.size()) != (n + 1) / 2)
        throw DomainError("negativity_depth: unexpected unthermalized annulus count");

    auto holds = [&](const PhononDistribution& dist) {
        auto peaks = negative_peaks(wigner_radial(dist, grid));
        for (const auto& ref : reference) {
            double best_distance = std::numeric_limits<double>::infinity();
            double matched_value = 0.0;
            for (const auto& peak : peaks) {
                double d = std::abs(peak.radius - ref.radius);
                if (d < best_distance) {
                    best_distance = d;
                    matched_value = peak.value;
                }
            }
            if (peaks.empty() || matched_value > retain * ref.value) return false;
        }
        return true;
    };

    auto report = thermal::thermal_depth(PhononDistribution::fock(n), n,
                                         thermal::DepthCriterion::wigner_negativity, holds,
                                         tolerance);
    return report;
}

}  // namespace phonon::wigner
