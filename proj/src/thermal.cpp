#include "phonon/thermal.hpp"

#include <algorithm>
#include <cmath>

#include "phonon/fock.hpp"
#include "phonon/special.hpp"

namespace phonon::thermal {

void DopplerRates::validate() const {
    if (damping < 0.0 || excitation < 0.0)
        throw std::invalid_argument("DopplerRates: rates must be nonnegative");
}

double DopplerRates::steady_state_mean() const {
    if (!has_steady_state())
        throw DomainError("DopplerRates: no steady state unless damping exceeds excitation");
    return excitation / (damping - excitation);
}

std::string to_string(DepthCriterion c) {
    switch (c) {
        case DepthCriterion::genuine: return "genuine";
        case DepthCriterion::basic: return "basic";
        case DepthCriterion::wigner_negativity: return "wigner-negativity";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Gaussian additive channel.
// ---------------------------------------------------------------------------

namespace {

// One Gauss-Laguerre pass: masses[n] = sum_m P_m sum_i w_i delta(n, m, nbar x_i).
std::vector<double> channel_masses(const std::vector<double>& input, double nbar, int out_size,
                                   int order) {
    const auto& rule = special::gauss_laguerre(order);
    std::vector<double> masses(std::size_t(out_size), 0.0);
    for (std::size_t m = 0; m < input.size(); ++m) {
        if (input[m] == 0.0) continue;
        for (int i = 0; i < order; ++i) {
            double weight = input[m] * rule.weights[std::size_t(i)];
            if (weight < 1e-300) continue;
            double u = nbar * rule.nodes[std::size_t(i)];
            for (int n = 0; n < out_size; ++n)
                masses[std::size_t(n)] += weight * displaced_fock_prob(n, int(m), u);
        }
    }
    return masses;
}

double max_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace

PhononDistribution gaussian_additive(const PhononDistribution& dist, double nbar) {
    if (nbar < 0.0) throw std::invalid_argument("gaussian_additive: negative nbar");
    if (nbar == 0.0) return dist;

    int out_size = dist.truncation() + 1;
    for (int attempt = 0; attempt < 12; ++attempt) {
        // enough room for the added thermal tail
        double scale = dist.mean() + nbar + 1.0;
        out_size = std::max(out_size, dist.truncation() + 1 +
                                          int(std::ceil(14.0 * nbar + 10.0 * std::sqrt(nbar * scale) + 10.0)));

        std::vector<double> previous;
        int order = 64;
        for (; order <= 4096; order *= 2) {
            auto masses = channel_masses(dist.probs(), nbar, out_size, order);
            if (!previous.empty() && max_norm_diff(masses, previous) < 1e-10) {
                previous = std::move(masses);
                break;
            }
            previous = std::move(masses);
        }
        if (order > 4096)
            throw QuadratureError("gaussian_additive: quadrature order escalation exhausted");

        double mass = 0.0;
        for (double v : previous) mass += v;
        if (mass >= 1.0 - 1e-8) {
            auto out = PhononDistribution::from_unnormalized(std::move(previous));
            out.meta = dist.meta;
            return out;
        }
        out_size = int(std::lround(out_size * 1.5)) + 8;
    }
    throw QuadratureError("gaussian_additive: unable to capture the output mass");
}

PhononDistribution lindblad_first_order(const PhononDistribution& dist, double eps) {
    if (eps < 0.0) throw std::invalid_argument("lindblad_first_order: negative coefficient");
    if (eps == 0.0) return dist;
    const auto& p = dist.probs();
    std::vector<double> out(p.size() + 1, 0.0);
    for (std::size_t n = 0; n < out.size(); ++n) {
        double pn = n < p.size() ? p[n] : 0.0;
        double up = n + 1 < p.size() ? p[n + 1] : 0.0;
        double down = n >= 1 ? p[n - 1] : 0.0;
        out[n] = pn + eps * ((double(n) + 1.0) * up + double(n) * down -
                             (2.0 * double(n) + 1.0) * pn);
    }
    for (double& v : out) v = std::max(v, 0.0);
    auto result = PhononDistribution::from_unnormalized(std::move(out), 0.5);
    result.meta = dist.meta;
    return result;
}

// ---------------------------------------------------------------------------
// Doppler rate equations.
// ---------------------------------------------------------------------------

namespace {

void doppler_rhs(const DopplerRates& rates, const std::vector<double>& p,
                 std::vector<double>& dp) {
    const double A = rates.damping, B = rates.excitation;
    const std::size_t size = p.size();
    dp.assign(size, 0.0);
    for (std::size_t n = 0; n < size; ++n) {
        double gain = 0.0;
        if (n + 1 < size) gain += A * double(n + 1) * p[n + 1];
        if (n >= 1) gain += B * double(n) * p[n - 1];
        dp[n] = gain - (A * double(n) + B * double(n + 1)) * p[n];
    }
}

// Dormand-Prince 5(4) pair with absolute per-component error control.
void rk45_integrate(const DopplerRates& rates, std::vector<double>& p, double t_end,
                    double abs_tol) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2; (void)c3; (void)c4; (void)c5;

    const std::size_t size = p.size();
    double rate_scale = std::max({rates.damping, rates.excitation, 1e-12});
    double h = std::min(t_end, 0.01 / (rate_scale * double(size)));
    double t = 0.0;
    std::vector<double> k1(size), k2(size), k3(size), k4(size), k5(size), k6(size), k7(size),
        y(size), y5(size);

    auto axpy = [&](const std::vector<double>& base, std::vector<double>& out,
                    std::initializer_list<std::pair<double, const std::vector<double>*>> terms,
                    double step) {
        out = base;
        for (auto& [coef, vec] : terms)
            for (std::size_t i = 0; i < size; ++i) out[i] += step * coef * (*vec)[i];
    };

    doppler_rhs(rates, p, k1);
    int guard = 0;
    while (t < t_end) {
        if (++guard > 20'000'000)
            throw DomainError("doppler_evolve: step count exceeded");
        h = std::min(h, t_end - t);
        axpy(p, y, {{a21, &k1}}, h);
        doppler_rhs(rates, y, k2);
        axpy(p, y, {{a31, &k1}, {a32, &k2}}, h);
        doppler_rhs(rates, y, k3);
        axpy(p, y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, h);
        doppler_rhs(rates, y, k4);
        axpy(p, y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h);
        doppler_rhs(rates, y, k5);
        axpy(p, y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h);
        doppler_rhs(rates, y, k6);
        axpy(p, y5, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, h);
        doppler_rhs(rates, y5, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
            err = std::max(err, std::abs(e) / abs_tol);
        }
        if (err <= 1.0) {
            t += h;
            p = y5;
            k1 = k7;  // FSAL
        } else {
            doppler_rhs(rates, p, k1);
        }
        double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        if (h <= 0.0 || !std::isfinite(h))
            throw DomainError("doppler_evolve: step size collapsed");
    }
}

}  // namespace

PhononDistribution doppler_evolve(const PhononDistribution& dist, const DopplerRates& rates,
                                  double t, int truncation_cap) {
    rates.validate();
    if (t < 0.0) throw std::invalid_argument("doppler_evolve: negative time");
    if (t == 0.0) return dist;

    std::vector<double> p = dist.probs();
    p.resize(p.size() + 16, 0.0);

    double rate_scale = std::max({rates.damping, rates.excitation, 1e-12});
    double chunk = 0.05 / rate_scale;
    double advanced = 0.0;
    while (advanced < t) {
        double step = std::min(chunk, t - advanced);
        rk45_integrate(rates, p, step, 1e-12);
        advanced += step;
        // grow the truncation before the top state accumulates mass
        while (p.back() > 1e-10 || *(p.end() - 2) > 1e-10) {
            if (int(p.size()) + 16 > truncation_cap) {
                double top = p.back();
                throw TruncationError("doppler_evolve: truncation cap reached, top-state mass " +
                                      std::to_string(top));
            }
            p.resize(p.size() + 16, 0.0);
        }
    }
    auto result = PhononDistribution::from_unnormalized(std::move(p), 1.0 - 1e-7);
    result.meta = dist.meta;
    return result;
}

DopplerTaylor doppler_taylor(int m, const DopplerRates& rates, int order) {
    rates.validate();
    if (m < 0) throw std::invalid_argument("doppler_taylor: negative initial state");
    if (order < 0 || order > 8)
        throw std::invalid_argument("doppler_taylor: order must lie in 0..8");

    const double A = rates.damping, B = rates.excitation;
    // mu_{n,k} is exact only when the table extends past n + k rows; keep one
    // extra order of headroom above the reachable band m + order
    const int rows = m + 2 * order + 1;
    DopplerTaylor table;
    table.initial_state = m;
    table.order = order;
    table.mu.assign(std::size_t(rows), std::vector<double>(std::size_t(order) + 1, 0.0));
    table.mu[std::size_t(m)][0] = 1.0;

    for (int k = 0; k < order; ++k) {
        for (int n = 0; n < rows; ++n) {
            double up = n + 1 < rows ? table.mu[std::size_t(n + 1)][std::size_t(k)] : 0.0;
            double down = n >= 1 ? table.mu[std::size_t(n - 1)][std::size_t(k)] : 0.0;
            double self = table.mu[std::size_t(n)][std::size_t(k)];
            table.mu[std::size_t(n)][std::size_t(k + 1)] =
                (A * double(n + 1) * up + B * double(n) * down -
                 (A * double(n) + B * double(n + 1)) * self) /
                double(k + 1);
        }
    }
    return table;
}

double DopplerTaylor::evaluate(int n, double t) const {
    if (n < 0 || n >= int(mu.size())) return 0.0;
    const auto& row = mu[std::size_t(n)];
    double acc = 0.0;
    for (int k = int(row.size()) - 1; k >= 0; --k) acc = acc * t + row[std::size_t(k)];
    return acc;
}

DepthReport thermal_depth(const PhononDistribution& dist, int n, DepthCriterion label,
                          const CriterionPredicate& criterion, double tolerance) {
    if (!criterion(dist))
        throw DomainError("thermal_depth: criterion already fails at nbar = 0 (no depth)");

    double lo = 0.0, hi = 0.01;
    while (criterion(gaussian_additive(dist, hi))) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1024.0)
            throw DomainError("thermal_depth: criterion still holds at nbar = 1024");
    }
    while (hi - lo > tolerance) {
        double mid = 0.5 * (lo + hi);
        (criterion(gaussian_additive(dist, mid)) ? lo : hi) = mid;
    }
    DepthReport report;
    report.n = n;
    report.criterion = label;
    report.depth_nbar = 0.5 * (lo + hi);
    report.bisection_tolerance = tolerance;
    return report;
}

double pulse_to_nbar(double tau_seconds, double recoil_rate) {
    if (tau_seconds < 0.0) throw std::invalid_argument("pulse_to_nbar: negative duration");
    return recoil_rate * tau_seconds;
}

}  // namespace phonon::thermal
