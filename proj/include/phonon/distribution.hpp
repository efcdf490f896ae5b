#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace phonon {

class DomainError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Truncated phonon-number distribution. Entries are probabilities indexed by
/// the Fock number n starting at zero; the vector always sums to one after
/// construction. All states handled by the pipeline are diagonal in the Fock
/// basis, so this is the universal state object.
class PhononDistribution {
  public:
    /// Builds from probabilities that are expected to already be normalized
    /// (|sum - 1| <= tol). Tiny negative entries from roundoff are clamped.
    static PhononDistribution from_probs(std::vector<double> probs, double tol = 1e-6);

    /// Builds from nonnegative masses whose sum may fall short of one by up to
    /// 1 - min_mass (truncated channel outputs); the result is renormalized.
    static PhononDistribution from_unnormalized(std::vector<double> masses,
                                                double min_mass = 1.0 - 1e-8);

    static PhononDistribution fock(int n, int truncation = -1);
    static PhononDistribution vacuum() { return fock(0); }
    static PhononDistribution bose_einstein(double nbar, int truncation);

    const std::vector<double>& probs() const { return probs_; }
    int truncation() const { return int(probs_.size()) - 1; }
    double p(int n) const { return (n >= 0 && n < int(probs_.size())) ? probs_[std::size_t(n)] : 0.0; }
    double mean() const;

    /// Returns a copy extended (with zeros) or cut to the new truncation;
    /// cutting renormalizes and requires the removed tail to be below tol.
    PhononDistribution with_truncation(int truncation, double tail_tol = 1e-8) const;

    std::map<std::string, std::string> meta;

  private:
    explicit PhononDistribution(std::vector<double> probs) : probs_(std::move(probs)) {}
    std::vector<double> probs_;
};

}  // namespace phonon
