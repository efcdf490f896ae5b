#include "phonon/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace phonon::optim {

NelderMeadResult nelder_mead_maximize(const Objective& f, std::vector<double> start,
                                      const NelderMeadOptions& opts) {
    const std::size_t n = start.size();
    if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");

    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return -f(x);  // minimize the negation
    };

    std::vector<std::vector<double>> simplex(n + 1, start);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        double step = opts.initial_step * std::max(1.0, std::abs(start[i]));
        simplex[i + 1][i] += step;
    }
    for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

    auto order = [&] {
        std::vector<std::size_t> idx(n + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> v2;
        for (auto i : idx) {
            s2.push_back(simplex[i]);
            v2.push_back(values[i]);
        }
        simplex = std::move(s2);
        values = std::move(v2);
    };

    NelderMeadResult result;
    while (evals < opts.max_evaluations) {
        order();
        double spread = std::abs(values[n] - values[0]);
        double diameter = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            diameter = std::max(diameter, std::abs(simplex[n][i] - simplex[0][i]));
        if (spread < opts.f_tol && diameter < opts.x_tol) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / double(n);

        auto blend = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + t * (simplex[n][j] - centroid[j]);
            return x;
        };

        auto reflected = blend(-1.0);
        double fr = eval(reflected);
        if (fr < values[0]) {
            auto expanded = blend(-2.0);
            double fe = eval(expanded);
            if (fe < fr) {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if (fr < values[n - 1]) {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            auto contracted = blend(fr < values[n] ? -0.5 : 0.5);
            double fc = eval(contracted);
            if (fc < std::min(fr, values[n])) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {  // shrink toward the best
                    for (std::size_t j = 0; j < n; ++j)
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    values[i] = eval(simplex[i]);
                }
            }
        }
    }
    order();
    result.x = simplex[0];
    result.value = -values[0];
    result.evaluations = evals;
    return result;
}

double golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                               double x_tol) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > x_tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

RootResult safeguarded_newton_root(const std::function<double(double)>& g, double x0, double lo,
                                   double hi, double residual_tol, int max_iter) {
    RootResult result;
    double x = std::clamp(x0, lo, hi);
    double gx = g(x);
    if (std::abs(gx) < residual_tol) return {x, gx, true, 0};

    // Expand a sign-change bracket around x.
    double a = x, b = x, ga = gx, gb = gx;
    double step = std::max(1e-4, 1e-3 * (hi - lo));
    while (ga * gb > 0.0) {
        bool moved = false;
        if (a > lo) {
            a = std::max(lo, a - step);
            ga = g(a);
            moved = true;
        }
        if (ga * gb <= 0.0) break;
        if (b < hi) {
            b = std::min(hi, b + step);
            gb = g(b);
            moved = true;
        }
        step *= 2.0;
        if (!moved) break;
    }
    bool have_bracket = ga * gb <= 0.0;
    if (!have_bracket) {
        // No sign change in range: report the smaller-residual endpoint.
        result.x = std::abs(ga) < std::abs(gb) ? a : b;
        result.residual = std::abs(ga) < std::abs(gb) ? ga : gb;
        result.converged = std::abs(result.residual) < residual_tol;
        return result;
    }

    for (int it = 0; it < max_iter; ++it) {
        // Finite-difference slope for the Newton step.
        double h = std::max(1e-7, 1e-7 * std::abs(x));
        double slope = (g(std::min(x + h, hi)) - g(std::max(x - h, lo))) /
                       (std::min(x + h, hi) - std::max(x - h, lo));
        double next;
        if (slope != 0.0 && std::isfinite(slope)) {
            next = x - gx / slope;
        } else {
            next = 0.5 * (a + b);
        }
        if (next <= a || next >= b) next = 0.5 * (a + b);
        x = next;
        gx = g(x);
        if (gx * ga <= 0.0) {
            b = x;
            gb = gx;
        } else {
            a = x;
            ga = gx;
        }
        result.iterations = it + 1;
        if (std::abs(gx) < residual_tol || b - a < 1e-15) {
            result.x = x;
            result.residual = gx;
            result.converged = std::abs(gx) < residual_tol || b - a < 1e-15;
            return result;
        }
    }
    result.x = x;
    result.residual = gx;
    result.converged = false;
    return result;
}

std::uint64_t Uniform::next_raw() {
    // splitmix64; stable across standard libraries.
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double Uniform::next() { return double(next_raw() >> 11) * 0x1.0p-53; }

double Uniform::next(double lo, double hi) { return lo + (hi - lo) * next(); }

}  // namespace phonon::optim
