#include "phonon/distribution.hpp"

#include <cmath>
#include <numeric>

namespace phonon {

namespace {

void check_entries(const std::vector<double>& probs) {
    if (probs.empty()) throw std::invalid_argument("PhononDistribution: empty probability vector");
    for (double p : probs) {
        if (!std::isfinite(p)) throw std::invalid_argument("PhononDistribution: non-finite entry");
        if (p < -1e-12 || p > 1.0 + 1e-9)
            throw std::invalid_argument("PhononDistribution: entry outside [0, 1]");
    }
}

std::vector<double> clamp_and_scale(std::vector<double> probs) {
    for (double& p : probs) p = std::max(p, 0.0);
    double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& p : probs) p /= sum;
    return probs;
}

}  // namespace

PhononDistribution PhononDistribution::from_probs(std::vector<double> probs, double tol) {
    check_entries(probs);
    double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (std::abs(sum - 1.0) > tol)
        throw std::invalid_argument("PhononDistribution: probabilities sum to " + std::to_string(sum));
    return PhononDistribution(clamp_and_scale(std::move(probs)));
}

PhononDistribution PhononDistribution::from_unnormalized(std::vector<double> masses,
                                                         double min_mass) {
    check_entries(masses);
    double sum = std::accumulate(masses.begin(), masses.end(), 0.0);
    if (sum < min_mass)
        throw DomainError("PhononDistribution: captured mass " + std::to_string(sum) +
                          " below required " + std::to_string(min_mass) +
                          "; enlarge the truncation");
    return PhononDistribution(clamp_and_scale(std::move(masses)));
}

PhononDistribution PhononDistribution::fock(int n, int truncation) {
    if (n < 0) throw std::invalid_argument("fock: negative index");
    if (truncation < 0) truncation = n;
    if (truncation < n) throw std::invalid_argument("fock: truncation below the Fock index");
    std::vector<double> probs(std::size_t(truncation) + 1, 0.0);
    probs[std::size_t(n)] = 1.0;
    return PhononDistribution(std::move(probs));
}

PhononDistribution PhononDistribution::bose_einstein(double nbar, int truncation) {
    if (nbar < 0.0) throw std::invalid_argument("bose_einstein: negative mean");
    if (truncation < 0) throw std::invalid_argument("bose_einstein: negative truncation");
    std::vector<double> probs(std::size_t(truncation) + 1);
    double ratio = nbar / (1.0 + nbar);
    double value = 1.0 / (1.0 + nbar);
    for (auto& p : probs) {
        p = value;
        value *= ratio;
    }
    return PhononDistribution(clamp_and_scale(std::move(probs)));
}

double PhononDistribution::mean() const {
    double m = 0.0;
    for (std::size_t n = 1; n < probs_.size(); ++n) m += double(n) * probs_[n];
    return m;
}

PhononDistribution PhononDistribution::with_truncation(int truncation, double tail_tol) const {
    if (truncation < 0) throw std::invalid_argument("with_truncation: negative truncation");
    std::vector<double> probs(std::size_t(truncation) + 1, 0.0);
    double kept = 0.0;
    for (std::size_t n = 0; n < probs_.size() && n <= std::size_t(truncation); ++n) {
        probs[n] = probs_[n];
        kept += probs_[n];
    }
    if (1.0 - kept > tail_tol)
        throw DomainError("with_truncation: removed tail mass exceeds tolerance");
    auto result = PhononDistribution(clamp_and_scale(std::move(probs)));
    result.meta = meta;
    return result;
}

}  // namespace phonon
