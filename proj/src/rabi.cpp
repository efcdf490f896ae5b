#include "phonon/rabi.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "phonon/optim.hpp"

namespace phonon::rabi {

void RabiConfig::validate() const {
    if (omega_c <= 0.0) throw std::invalid_argument("RabiConfig: omega_c must be positive");
    if (eta <= 0.0 || eta >= 1.0) throw std::invalid_argument("RabiConfig: eta must lie in (0, 1)");
    if (gamma0 < 0.0) throw std::invalid_argument("RabiConfig: gamma0 must be nonnegative");
    if (x < 0.0 || x > 2.0) throw std::invalid_argument("RabiConfig: x must lie in [0, 2]");
    if (shots < 1) throw std::invalid_argument("RabiConfig: shots must be positive");
}

void RabiTrace::validate() const {
    if (times.empty() || times.size() != p_g.size())
        throw std::invalid_argument("RabiTrace: times and p_g must be nonempty and equal length");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0 && !(times[i] > times[i - 1]))
            throw std::invalid_argument("RabiTrace: times must be strictly increasing");
        if (p_g[i] < 0.0 || p_g[i] > 1.0)
            throw std::invalid_argument("RabiTrace: p_g outside [0, 1]");
    }
    if (shots < 1) throw std::invalid_argument("RabiTrace: shots must be positive");
}

double omega_n(int n, const RabiConfig& cfg) {
    if (n < 0) throw std::invalid_argument("omega_n: negative index");
    return std::sqrt(double(n) + 1.0) * cfg.omega_c * cfg.eta;
}

namespace {

double gamma_n(int n, const RabiConfig& cfg) {
    return std::pow(double(n) + 1.0, cfg.x) * cfg.gamma0;
}

// cos(Omega_n t) exp(-gamma_n t) basis column for state n.
std::vector<double> basis_column(int n, const std::vector<double>& times, const RabiConfig& cfg) {
    std::vector<double> column(times.size());
    double omega = omega_n(n, cfg), gamma = gamma_n(n, cfg);
    for (std::size_t i = 0; i < times.size(); ++i)
        column[i] = std::cos(omega * times[i]) * std::exp(-gamma * times[i]);
    return column;
}

}  // namespace

std::vector<double> rabi_signal(const PhononDistribution& dist, const std::vector<double>& times,
                                const RabiConfig& cfg) {
    cfg.validate();
    std::vector<double> signal(times.size(), 0.0);
    for (int n = 0; n <= dist.truncation(); ++n) {
        double p = dist.p(n);
        if (p == 0.0) continue;
        auto column = basis_column(n, times, cfg);
        for (std::size_t i = 0; i < times.size(); ++i) signal[i] += p * column[i];
    }
    for (double& s : signal) s = std::clamp(0.5 * (1.0 - s), 0.0, 1.0);
    return signal;
}

std::vector<double> sampling_plan(int n_target, const RabiConfig& cfg) {
    cfg.validate();
    if (n_target < 0) throw std::invalid_argument("sampling_plan: negative target");
    const double two_pi = 2.0 * 3.14159265358979323846;
    double dt = (two_pi / omega_n(n_target + 2, cfg)) / 32.0;
    double span = 6.0 * (two_pi / omega_n(0, cfg));
    int points = int(std::ceil(span / dt)) + 1;
    std::vector<double> times(std::size_t(points), 0.0);
    for (int i = 0; i < points; ++i) times[std::size_t(i)] = double(i) * dt;
    return times;
}

int fit_nmax_for_target(int n_target) { return n_target + 2; }

std::vector<double> nnls(const std::vector<std::vector<double>>& columns,
                         const std::vector<double>& rhs, double tol) {
    const int cols = int(columns.size());
    const int rows = int(rhs.size());
    Eigen::MatrixXd a(rows, cols);
    for (int j = 0; j < cols; ++j) {
        if (int(columns[std::size_t(j)].size()) != rows)
            throw std::invalid_argument("nnls: ragged column");
        for (int i = 0; i < rows; ++i) a(i, j) = columns[std::size_t(j)][std::size_t(i)];
    }
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), rows);

    std::vector<bool> passive(std::size_t(cols), false);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cols);
    Eigen::VectorXd w = a.transpose() * (b - a * x);

    auto solve_passive = [&](const std::vector<bool>& set) {
        std::vector<int> idx;
        for (int j = 0; j < cols; ++j)
            if (set[std::size_t(j)]) idx.push_back(j);
        Eigen::MatrixXd ap(rows, int(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) ap.col(Eigen::Index(k)) = a.col(idx[k]);
        Eigen::VectorXd z = ap.colPivHouseholderQr().solve(b);
        Eigen::VectorXd full = Eigen::VectorXd::Zero(cols);
        for (std::size_t k = 0; k < idx.size(); ++k) full[idx[k]] = z[Eigen::Index(k)];
        return full;
    };

    for (int outer = 0; outer < 3 * cols + 30; ++outer) {
        int candidate = -1;
        double best = tol;
        for (int j = 0; j < cols; ++j)
            if (!passive[std::size_t(j)] && w[j] > best) {
                best = w[j];
                candidate = j;
            }
        if (candidate < 0) break;
        passive[std::size_t(candidate)] = true;

        Eigen::VectorXd z = solve_passive(passive);
        int guard = 0;
        while (true) {
            double min_passive = 0.0;
            for (int j = 0; j < cols; ++j)
                if (passive[std::size_t(j)]) min_passive = std::min(min_passive, z[j]);
            if (min_passive > 0.0 || ++guard > cols + 5) break;
            double step = 1.0;
            for (int j = 0; j < cols; ++j)
                if (passive[std::size_t(j)] && z[j] <= 0.0 && x[j] != z[j])
                    step = std::min(step, x[j] / (x[j] - z[j]));
            x += step * (z - x);
            for (int j = 0; j < cols; ++j)
                if (passive[std::size_t(j)] && x[j] <= tol) {
                    passive[std::size_t(j)] = false;
                    x[j] = 0.0;
                }
            z = solve_passive(passive);
        }
        x = z;
        w = a.transpose() * (b - a * x);
    }
    std::vector<double> out(std::size_t(cols), 0.0);
    for (int j = 0; j < cols; ++j) out[std::size_t(j)] = std::max(x[j], 0.0);
    return out;
}

FitResult fit_populations(const RabiTrace& trace, const RabiConfig& cfg, int n_max) {
    cfg.validate();
    trace.validate();
    if (n_max < 1) throw std::invalid_argument("fit_populations: n_max must be at least 1");

    std::vector<std::vector<double>> columns;
    for (int n = 0; n <= n_max; ++n) columns.push_back(basis_column(n, trace.times, cfg));

    // Rank guard: the plan must distinguish the basis components.
    Eigen::MatrixXd a(int(trace.times.size()), n_max + 1);
    for (int j = 0; j <= n_max; ++j)
        for (std::size_t i = 0; i < trace.times.size(); ++i)
            a(Eigen::Index(i), j) = columns[std::size_t(j)][i];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < n_max + 1)
        throw DomainError("fit_populations: sampling grid cannot distinguish the components; "
                          "use a denser plan");

    std::vector<double> rhs(trace.p_g.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = 1.0 - 2.0 * trace.p_g[i];

    auto raw = nnls(columns, rhs);
    double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    if (total <= 0.0) throw DomainError("fit_populations: all populations fitted to zero");

    double ssr = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        double model = 0.0;
        for (int n = 0; n <= n_max; ++n) model += raw[std::size_t(n)] * columns[std::size_t(n)][i];
        double res = 0.5 * (rhs[i] - model);  // back in p_g units
        ssr += res * res;
    }

    for (double& v : raw) v /= total;
    FitResult result{PhononDistribution::from_probs(std::move(raw)), ssr};
    return result;
}

McUncertainty mc_uncertainty(const RabiTrace& trace, const RabiConfig& cfg, int n_max, int draws,
                             std::uint64_t seed) {
    if (draws < 100) throw std::invalid_argument("mc_uncertainty: at least 100 draws required");
    trace.validate();

    std::vector<std::vector<double>> samples;  // per successful draw: fitted P
    int failed = 0;
    for (int d = 0; d < draws; ++d) {
        optim::Uniform rng(seed + 0x9E3779B97F4A7C15ull * std::uint64_t(d + 1));
        RabiTrace resampled = trace;
        for (double& p : resampled.p_g) {
            int hits = 0;
            for (int s = 0; s < trace.shots; ++s)
                if (rng.next() < p) ++hits;
            p = double(hits) / double(trace.shots);
        }
        try {
            samples.push_back(fit_populations(resampled, cfg, n_max).populations.probs());
        } catch (const std::exception&) {
            ++failed;
        }
    }
    if (samples.empty()) throw DomainError("mc_uncertainty: every draw failed to fit");

    McUncertainty result;
    result.failed_draws = failed;
    std::size_t len = samples.front().size();
    result.sigma.assign(len, 0.0);
    for (std::size_t j = 0; j < len; ++j) {
        double mean = 0.0;
        for (const auto& s : samples) mean += s[j];
        mean /= double(samples.size());
        double var = 0.0;
        for (const auto& s : samples) var += (s[j] - mean) * (s[j] - mean);
        result.sigma[j] = std::sqrt(var / double(std::max<std::size_t>(samples.size() - 1, 1)));
    }
    return result;
}

}  // namespace phonon::rabi
