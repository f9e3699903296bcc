#pragma once

// Rational approximation of frequency vectors alpha = (1, alpha~) and the
// lower bound on resonant modes of the approximating rational frequency.

#include <span>
#include <string>
#include <vector>

namespace kam {

struct FrequencyVector {
  std::vector<double> alpha_tilde;  // length n-1, entries in [-1, 1]
  double tau = 0.0;
  double gamma = 0.0;      // linear constant, 0 < gamma <= 1
  double gamma_bar = 0.0;  // simultaneous constant, > 0

  int dim() const noexcept { return static_cast<int>(alpha_tilde.size()) + 1; }
  /// The full vector (1, alpha~).
  std::vector<double> alpha() const;
  /// Checks ranges of alpha~, tau, gamma, gamma_bar; throws ParameterError.
  void validate() const;
};

/// omega = (1, p/q) with q alpha~ - p small.
struct RationalApprox {
  long long q = 1;
  std::vector<long long> p;
  double Q = 1.0;
  /// |q alpha~ - p|_inf, computed with one rounding per entry.
  double residual = 0.0;
  /// alpha - omega, length n (first entry 0).
  std::vector<double> varpi;

  int dim() const noexcept { return static_cast<int>(p.size()) + 1; }
  std::vector<double> omega() const;
  /// q (k . omega) = q k_0 + k~ . p, an integer; zero exactly on resonant modes.
  long long resonance_numerator(std::span<const int> k) const;
  bool is_resonant(std::span<const int> k) const { return resonance_numerator(k) == 0; }
};

struct ResonanceBound {
  double gamma_star = 0.0;
  double a = 1.0;
  double Q = 1.0;
  double cutoff = 0.0;  // gamma_star * Q^(1/a)
};

/// Smallest q in [1, floor(Q^(n-1))] with |q alpha~ - p|_inf <= 1/Q, p the
/// nearest integers (ties to even). n = 2 goes through continued fractions.
RationalApprox dirichlet_approx(const FrequencyVector& alpha, double Q);

/// Plain search over q. Same contract as dirichlet_approx for any n.
RationalApprox dirichlet_approx_brute_force(std::span<const double> alpha_tilde, double Q);

/// n = 2 fast path: walks the convergents of x.
RationalApprox dirichlet_approx_continued_fraction(double x, double Q);

struct PsiResult {
  double value = 0.0;
  std::vector<long long> argmax;  // k attaining the maximum, length n
};

/// max |k . alpha|^{-1} over 0 < |k|_inf <= floor(Q).
PsiResult psi(const FrequencyVector& alpha, double Q);

struct DiophantineEstimate {
  double gamma = 0.0;
  double gamma_bar = 0.0;
  std::vector<long long> gamma_witness;  // k~ attaining gamma (before clamping)
  long long gamma_bar_witness = 0;       // q attaining gamma_bar
  std::string warning;
};

/// Finite-range minima defining gamma (clamped to <= 1) and gamma_bar.
/// These are estimates over the searched ranges, not certificates.
DiophantineEstimate estimate_constants(std::span<const double> alpha_tilde, double tau, int k_range,
                                       long long q_range);

/// gamma*, a = 1 + (n-1) tau and cutoff = gamma* Q^(1/a). Every nonzero k with
/// k . omega = 0 for omega = dirichlet_approx(alpha, Q) has |k|_inf >= cutoff.
ResonanceBound resonance_bound(const FrequencyVector& alpha, double Q);

/// (gamma_bar Q)^((n-1)/(1+(n-1) tau)); throws ConstantsInconsistencyError if
/// approx.q falls below it.
double lower_denominator_bound(const FrequencyVector& alpha, const RationalApprox& approx);

/// Distance to the nearest integer.
double dist_to_int(double y);

}  // namespace kam
