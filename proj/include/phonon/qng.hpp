#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "phonon/distribution.hpp"
#include "phonon/fock.hpp"

namespace phonon::qng {

enum class Method { staged, multistart_oracle };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Result of a threshold maximization: the value p̄_n together with the
/// maximizing Gaussian parameters and convergence metadata.
struct ThresholdRecord {
    int n = 0;
    double p_bar = 0.0;
    GaussianParams argmax;
    Method method = Method::staged;
    double residual_norm = 0.0;
    int dim_used = 0;
};

struct CertificationResult {
    int n = 0;
    double P_n = 0.0;
    double p_bar_genuine = 0.0;
    double p_bar_basic = 0.0;
    bool genuine = false;
    bool basic = false;
    double margin_genuine = 0.0;
    double margin_basic = 0.0;
};

class NonConvergenceError : public std::runtime_error {
  public:
    NonConvergenceError(const std::string& msg, ThresholdRecord best)
        : std::runtime_error(msg), best_iterate(std::move(best)) {}
    ThresholdRecord best_iterate;
};

/// The n+1 partial derivatives d/d_alpha, d/d_r, d/d_c_{n-1}, ..., d/d_c_1 of
/// the overlap |<n|D S sum c_m|m>|², with c_0² = 1 - sum_{k>=1} c_k²
/// substituted, by central finite differences of core_overlap. Requires real
/// parameters and a normalized core.
std::vector<double> stationarity_residuals(int n, const GaussianParams& params, int dim,
                                           double fd_step = 1e-5);
double stationarity_residual_norm(int n, const GaussianParams& params, int dim,
                                  double fd_step = 1e-5);

struct StagedOptions {
    int min_passes = 2;         // total passes of the staged sweep; the
                                // procedure continues past this only while the
                                // joint residual is still above residual_tol
    int max_passes = 60;
    double residual_tol = 1e-8;
    double solve_tol = 1e-10;   // per-equation target inside each stage
    double fd_step = 1e-5;
};

/// Genuine n-phonon threshold p̄_n by the staged stationarity procedure:
/// solve the (alpha, r) equations with c_{n-1} = 1, correct c_{n-1} down to
/// c_1 sequentially, then repeat the whole sweep with the updated core until
/// the joint residual norm is met.
ThresholdRecord threshold_genuine(int n, const StagedOptions& opts = {});

/// Basic (lowest) QNG threshold: max over alpha, r of |<n|D S|0>|² by
/// multistart local optimization with a Newton polish.
ThresholdRecord threshold_basic(int n, int restarts = 24, std::uint64_t seed = 0x51CADE5u);

struct OracleResult {
    ThresholdRecord record;
    double top_decile_dispersion = 0.0;
    std::vector<double> restart_values;  // sorted descending
};

/// Independent verification oracle: direct maximization of the overlap over
/// real (alpha, r, c_1..c_{n-1}) with `restarts` random Nelder-Mead starts.
/// With complex_params the search doubles the Gaussian parameters into real
/// and imaginary parts.
OracleResult threshold_oracle_detailed(int n, int restarts, std::uint64_t seed = 0x0A11CEu,
                                       bool complex_params = false);
ThresholdRecord threshold_oracle(int n, int restarts, std::uint64_t seed = 0x0A11CEu);

/// Cached thresholds keyed by n; computes on demand. Single writer, shared
/// readers.
class ThresholdTable {
  public:
    const ThresholdRecord& genuine(int n);
    const ThresholdRecord& basic(int n);
    void put(const ThresholdRecord& record, bool is_genuine);
    std::optional<ThresholdRecord> find(int n, bool is_genuine) const;
    std::vector<std::pair<ThresholdRecord, bool>> records() const;  // (record, is_genuine)

  private:
    mutable std::mutex mutex_;
    std::map<int, ThresholdRecord> genuine_;
    std::map<int, ThresholdRecord> basic_;
};

/// Compares P_n against the genuine and basic thresholds; strict inequality
/// is required for a positive verdict, ties report false with zero margin.
CertificationResult certify(const PhononDistribution& dist, int n, ThresholdTable& table);

namespace detail {

/// Fast overlap evaluation for real parameters through cached spectral
/// factorizations of the displacement and squeeze generators. Returns 0 for
/// parameter values whose truncated evaluation would leak past the top band
/// (those lie far below every threshold, so maximizations may discard them).
class FastOverlap {
  public:
    FastOverlap(int n, int dim, double alpha_max = 4.2, double r_max = 0.8);
    double operator()(double alpha, double r, const std::vector<double>& core) const;
    int dim() const { return dim_; }

  private:
    int n_;
    int dim_;
    double alpha_max_;
    double r_max_;
};

}  // namespace detail

}  // namespace phonon::qng
