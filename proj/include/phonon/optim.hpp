#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace phonon::optim {

using Objective = std::function<double(const std::vector<double>&)>;

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct NelderMeadOptions {
    double initial_step = 0.25;
    double f_tol = 1e-11;     // spread of simplex values
    double x_tol = 1e-9;      // simplex diameter
    int max_evaluations = 20000;
};

/// Derivative-free simplex maximization.
NelderMeadResult nelder_mead_maximize(const Objective& f, std::vector<double> start,
                                      const NelderMeadOptions& opts = {});

/// Golden-section maximization of a unimodal 1-D function on [a, b].
double golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                               double x_tol = 1e-10);

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Safeguarded Newton iteration for g(x) = 0 inside [lo, hi]: Newton steps on
/// a finite-difference slope, falling back to bisection of a sign-change
/// bracket whenever the step leaves the current bracket. The bracket is found
/// by expanding around x0 first.
RootResult safeguarded_newton_root(const std::function<double(double)>& g, double x0, double lo,
                                   double hi, double residual_tol = 1e-10, int max_iter = 200);

/// Deterministic xorshift-free uniform helpers on top of std::mt19937_64 raw
/// output, so draws do not depend on library distribution internals.
class Uniform {
  public:
    explicit Uniform(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ull) {}
    double next();                      // [0, 1)
    double next(double lo, double hi);  // [lo, hi)
    std::uint64_t next_raw();

  private:
    std::uint64_t state_;
};

}  // namespace phonon::optim
