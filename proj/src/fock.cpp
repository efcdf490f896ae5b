#include "phonon/fock.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <map>
#include <memory>
#include <tuple>

#include "phonon/special.hpp"

namespace phonon {

using special::log_factorial;

void GaussianParams::validate() const {
    double sum = 0.0;
    for (double c : core) sum += c * c;
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("GaussianParams: core coefficients not normalized");
}

double OperatorMatrix::column_deficit(int k) const {
    return 1.0 - entries.col(k).squaredNorm();
}

double OperatorMatrix::max_column_deficit(int upto) const {
    double worst = 0.0;
    for (int k = 0; k <= upto && k < dim; ++k) worst = std::max(worst, column_deficit(k));
    return worst;
}

double OperatorMatrix::top_band_mass(int k, int band) const {
    return entries.col(k).tail(band).squaredNorm();
}

namespace {

// <j|D(alpha)|k> in closed form; u = |alpha|^2, log_a = ln|alpha|.
complexd displacement_entry(int j, int k, complexd alpha, double u, double log_a) {
    int lo = std::min(j, k), hi = std::max(j, k), d = hi - lo;
    double laguerre = special::assoc_laguerre(lo, d, u);
    double log_mag = 0.5 * (log_factorial(lo) - log_factorial(hi)) + d * log_a - 0.5 * u;
    complexd phase(1.0, 0.0);
    if (d > 0) {
        complexd unit = alpha / std::abs(alpha);
        if (j >= k) {
            phase = std::pow(unit, d);
        } else {
            phase = std::pow(-std::conj(unit), d);
        }
    }
    return phase * (laguerre * std::exp(log_mag));
}

// Generator block of r a†² - r* a² restricted to one parity chain.
Eigen::MatrixXcd squeeze_block(complexd r, int start, int count) {
    Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(count, count);
    for (int i = 0; i + 1 < count; ++i) {
        int n = start + 2 * i;  // a†² maps |n> to |n+2>
        double coupling = std::sqrt(double(n + 1) * double(n + 2));
        gen(i + 1, i) = r * coupling;
        gen(i, i + 1) = -std::conj(r) * coupling;
    }
    return gen.exp();
}

struct OperatorKey {
    double re, im;
    int dim;
    bool operator<(const OperatorKey& o) const {
        return std::tie(re, im, dim) < std::tie(o.re, o.im, o.dim);
    }
};

using OperatorCache = std::map<OperatorKey, std::shared_ptr<const OperatorMatrix>>;

std::shared_ptr<const OperatorMatrix> cached(OperatorCache& cache, complexd param, int dim,
                                             const auto& build) {
    OperatorKey key{param.real(), param.imag(), dim};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (cache.size() >= 32) cache.clear();
    auto op = std::make_shared<OperatorMatrix>(build());
    cache.emplace(key, op);
    return op;
}

OperatorMatrix build_displacement(complexd alpha, int dim) {
    OperatorMatrix op;
    op.dim = dim;
    op.kind = OperatorKind::displacement;
    if (alpha == complexd(0.0, 0.0)) {
        op.entries = Eigen::MatrixXcd::Identity(dim, dim);
        return op;
    }
    double u = std::norm(alpha);
    double log_a = std::log(std::abs(alpha));
    op.entries.resize(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k) op.entries(j, k) = displacement_entry(j, k, alpha, u, log_a);
    return op;
}

OperatorMatrix build_squeeze(complexd r, int dim) {
    OperatorMatrix op;
    op.dim = dim;
    op.kind = OperatorKind::squeeze;
    op.entries = Eigen::MatrixXcd::Zero(dim, dim);
    if (r == complexd(0.0, 0.0)) {
        op.entries = Eigen::MatrixXcd::Identity(dim, dim);
        return op;
    }
    for (int parity = 0; parity < 2; ++parity) {
        int count = (dim - parity + 1) / 2;
        if (count <= 0) continue;
        Eigen::MatrixXcd block = squeeze_block(r, parity, count);
        for (int i = 0; i < count; ++i)
            for (int j = 0; j < count; ++j)
                op.entries(parity + 2 * i, parity + 2 * j) = block(i, j);
    }
    return op;
}

// Only the lowest columns are certified by the constructors; callers with
// wider support rely on the state-level leak checks in core_overlap.
int checked_columns(int dim) { return std::min(2, dim - 1); }

}  // namespace

OperatorMatrix displacement_matrix(complexd alpha, int dim, double leak_tol) {
    if (dim < 2) throw std::invalid_argument("displacement_matrix: dim must be at least 2");
    OperatorMatrix op = build_displacement(alpha, dim);
    double worst = op.max_column_deficit(checked_columns(dim));
    if (worst > leak_tol)
        throw TruncationError("displacement_matrix: leakage " + std::to_string(worst) +
                              " above tolerance; increase dim for |alpha|^2 = " +
                              std::to_string(std::norm(alpha)));
    return op;
}

OperatorMatrix squeeze_matrix(complexd r, int dim, double leak_tol) {
    if (dim < 2) throw std::invalid_argument("squeeze_matrix: dim must be at least 2");
    OperatorMatrix op = build_squeeze(r, dim);
    int band = std::max(4, dim / 8);
    double worst = 0.0;
    for (int k = 0; k <= checked_columns(dim); ++k)
        worst = std::max(worst, op.top_band_mass(k, band));
    if (worst > leak_tol)
        throw TruncationError("squeeze_matrix: top-band mass " + std::to_string(worst) +
                              " above tolerance; increase dim for |r| = " +
                              std::to_string(std::abs(r)));
    return op;
}

double displaced_fock_prob(int n, int m, double u) {
    if (n < 0 || m < 0) throw std::invalid_argument("displaced_fock_prob: negative index");
    if (u < 0.0) throw std::invalid_argument("displaced_fock_prob: negative energy");
    int lo = std::min(n, m), hi = std::max(n, m), d = hi - lo;
    if (u == 0.0) return d == 0 ? 1.0 : 0.0;
    double laguerre = special::assoc_laguerre(lo, d, u);
    double log_term = log_factorial(lo) - log_factorial(hi) + d * std::log(u) - u;
    return std::exp(log_term) * laguerre * laguerre;
}

double displaced_fock_prob_du(int n, int m, double u) {
    if (n < 0 || m < 0) throw std::invalid_argument("displaced_fock_prob_du: negative index");
    if (u < 0.0) throw std::invalid_argument("displaced_fock_prob_du: negative energy");
    int lo = std::min(n, m), hi = std::max(n, m), d = hi - lo;
    if (u == 0.0) {
        // delta = pref * u^d e^{-u} L², so the slope at zero is -1 for d = 0,
        // pref * L(0)² for d = 1, and 0 for d >= 2.
        if (d == 0) return -1.0;
        if (d == 1) {
            double l0 = double(lo + 1);  // L_lo^{(1)}(0) = lo + 1
            return std::exp(log_factorial(lo) - log_factorial(hi)) * l0 * l0;
        }
        return 0.0;
    }
    auto [lag, dlag] = special::assoc_laguerre_with_derivative(lo, d, u);
    double pref = std::exp(log_factorial(lo) - log_factorial(hi) + d * std::log(u) - u);
    return pref * ((d / u - 1.0) * lag * lag + 2.0 * lag * dlag);
}

int default_overlap_dim(int n) { return 4 * n + 20; }

namespace {

// Shared cached application of D(alpha) S(r) to a core vector with the
// truncation-leak checks.
Eigen::VectorXcd displaced_squeezed(complexd alpha, complexd squeeze,
                                    const Eigen::VectorXcd& c, int dim, double leak_tol) {
    thread_local OperatorCache squeeze_cache;
    thread_local OperatorCache displacement_cache;
    auto S = cached(squeeze_cache, squeeze, dim, [&] { return build_squeeze(squeeze, dim); });
    auto D = cached(displacement_cache, alpha, dim,
                    [&] { return build_displacement(alpha, dim); });

    Eigen::VectorXcd s = S->entries * c;
    int band = std::max(4, dim / 8);
    double squeezed_tail = s.tail(band).squaredNorm();
    if (squeezed_tail > leak_tol)
        throw TruncationError("core_overlap: squeezed core leaks " + std::to_string(squeezed_tail) +
                              " into the top band; increase dim");

    Eigen::VectorXcd w = D->entries * s;
    double lost = std::abs(c.squaredNorm() - w.squaredNorm());
    if (lost > leak_tol)
        throw TruncationError("core_overlap: " + std::to_string(lost) +
                              " of the state lost to truncation; increase dim");
    return w;
}

}  // namespace

double core_overlap(int n, const GaussianParams& params, int dim, double leak_tol) {
    if (n < 0) throw std::invalid_argument("core_overlap: negative order");
    if (int(params.core.size()) != std::max(n, 1))
        throw std::invalid_argument("core_overlap: core must hold coefficients c_0..c_{n-1}");
    if (dim <= n || dim < int(params.core.size()))
        throw std::invalid_argument("core_overlap: dim too small for the requested order");
    params.validate();

    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(dim);
    for (std::size_t m = 0; m < params.core.size(); ++m) c[Eigen::Index(m)] = params.core[m];
    Eigen::VectorXcd w = displaced_squeezed(params.alpha, params.squeeze, c, dim, leak_tol);
    return std::norm(w[n]);
}

std::vector<complexd> overlap_amplitudes(int n, complexd alpha, complexd r, int dim,
                                         double leak_tol) {
    if (n < 1) throw std::invalid_argument("overlap_amplitudes: n must be positive");
    if (dim <= n) throw std::invalid_argument("overlap_amplitudes: dim too small");
    std::vector<complexd> amplitudes(std::size_t(n), complexd(0.0, 0.0));
    for (int m = 0; m < n; ++m) {
        Eigen::VectorXcd c = Eigen::VectorXcd::Zero(dim);
        c[m] = 1.0;
        Eigen::VectorXcd w = displaced_squeezed(alpha, r, c, dim, leak_tol);
        // <n|D S|m> appears as the n-th component of the transformed |m>
        amplitudes[std::size_t(m)] = w[n];
    }
    return amplitudes;
}

}  // namespace phonon
