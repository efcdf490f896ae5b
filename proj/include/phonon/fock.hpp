#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

#include "phonon/distribution.hpp"

namespace phonon {

using complexd = std::complex<double>;

class TruncationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Parameters of a displaced-squeezed core state D(alpha) S(r) sum_m c_m |m>.
/// The squeeze convention is S(r) = exp(r a†² - r* a²), the displacement
/// D(alpha) = exp(alpha a† - alpha* a).
struct GaussianParams {
    complexd alpha{0.0, 0.0};
    complexd squeeze{0.0, 0.0};
    std::vector<double> core;  // c_0..c_{n-1}, sum of squares = 1

    bool is_real() const { return alpha.imag() == 0.0 && squeeze.imag() == 0.0; }
    /// Throws std::invalid_argument unless sum c_m² = 1 within 1e-12.
    void validate() const;
};

enum class OperatorKind { displacement, squeeze, product };

/// Dense truncated Fock-basis operator. Columns are sub-normalized; the
/// constructor functions below verify the truncation leakage of the low
/// columns against a tolerance and throw TruncationError when the requested
/// dimension cannot hold the operator's support.
struct OperatorMatrix {
    Eigen::MatrixXcd entries;
    int dim = 0;
    OperatorKind kind = OperatorKind::product;

    double column_deficit(int k) const;          // 1 - |column k|²
    double max_column_deficit(int upto) const;   // over columns 0..upto
    double top_band_mass(int k, int band) const; // mass of column k in the top rows
};

/// <j|D(alpha)|k> from the associated-Laguerre closed form with log-domain
/// factorial ratios. The low columns (k <= dim/8) must leak less than
/// leak_tol, otherwise the dimension is rejected.
OperatorMatrix displacement_matrix(complexd alpha, int dim, double leak_tol = 1e-10);

/// <j|S(r)|k> by Padé scaling-and-squaring of the truncated generator
/// r a†² - r* a², evaluated per parity block so entries with j+k odd are
/// exact zeros. Leakage is judged by the mass the low columns push into the
/// top band of the truncated space.
OperatorMatrix squeeze_matrix(complexd r, int dim, double leak_tol = 1e-10);

/// |<n|D(sqrt(u))|m>|² for the displacement energy u = |alpha|². Symmetric in
/// (n, m); evaluated in the log domain so large indices do not overflow.
double displaced_fock_prob(int n, int m, double u);

/// d/du of displaced_fock_prob, from the polynomial-times-exponential
/// structure of the closed form (no finite differences).
double displaced_fock_prob_du(int n, int m, double u);

/// |<n| D(alpha) S(r) sum_m c_m |m>|² via operator matrix products at the
/// given truncation. Requires params.core.size() == n. Throws
/// TruncationError when more than leak_tol of the state leaks past dim.
double core_overlap(int n, const GaussianParams& params, int dim, double leak_tol = 1e-9);

/// The overlap amplitudes <n|D(alpha) S(r)|m> for m = 0..n-1 (real whenever
/// alpha and r are real). Same truncation-leak policy as core_overlap.
std::vector<complexd> overlap_amplitudes(int n, complexd alpha, complexd r, int dim,
                                         double leak_tol = 1e-9);

/// Default truncation for core_overlap at order n: 4n + 20.
int default_overlap_dim(int n);

}  // namespace phonon
