#pragma once

// One quasi-periodic averaging step along a periodic approximation X_omega
// of X_alpha: the homological equation [V, X_omega] = P - [P]_omega is solved
// exactly (no small divisors, |k . omega| >= 1/q on nonresonant modes), and
// the time-1 map of V pulls X_alpha + S + P back to X_alpha + S + [P] + P^+.

#include <array>
#include <span>
#include <vector>

#include "kam/diophantine.hpp"
#include "kam/embedding.hpp"
#include "kam/kam_constants.hpp"
#include "kam/spectral_field.hpp"

namespace kam {

/// Keeps exactly the modes with q k_0 + k~ . p = 0; the time average of P
/// along the closed orbits of X_{q omega}.
FourierField omega_average(const FourierField& p, const RationalApprox& approx);

/// Mode-0 coefficient.
std::vector<double> space_average(const FourierField& p);

struct HomologicalSolution {
  FourierField V;
  RationalApprox omega;
  /// max_k |[V, X_omega]_k - (P - [P]_omega)_k| / max_k |P_k|, via an actual bracket.
  double residual = 0.0;
};

/// V_k = P_k / (2 pi i k . omega) off the resonant modes, zero on them.
HomologicalSolution solve_homological(const FourierField& p, const RationalApprox& approx);

/// Remainder and truncation bookkeeping for a series evaluation.
struct SeriesLedger {
  int terms = 0;
  double remainder_bound = 0.0;   // majorized tail of the series, at the target width
  double truncated_norm = 0.0;    // modes dropped by the kmax cap, at the target width
};

/// (V^1)^* Y = sum_m ad_V^m Y / m!, ad_V F = [F, V]; evaluated until the
/// majorized remainder at width s - sigma is below tol. Requires
/// 2 |V|_s / sigma < 1. kmax_cap < 0 keeps exact support; modes whose
/// weighted size falls below prune_abs are dropped (both go to the ledger).
FourierField lie_pullback(const FourierField& y, const FourierField& v, double s, double sigma, double tol,
                          SeriesLedger* ledger = nullptr, int kmax_cap = -1, double prune_abs = 0.0);

/// Displacement u of the time-1 map, V^1 = Id + u, from
/// u = sum_{j>=1} L_V^{j-1} V / j!, L_V F = DF . V. Valid on width s - sigma
/// when |V|_s < sigma.
FourierField flow_displacement(const FourierField& v, double s, double sigma, double tol,
                               SeriesLedger* ledger = nullptr, int kmax_cap = -1, double prune_abs = 0.0);

/// |u|_{s-sigma} <= nv / (1 - nv/sigma) for the series above.
double flow_displacement_bound(double sigma, double nv);

struct StepBudget {
  double eps = 0.0;            // |P|_s used by the step
  double q_eps = 0.0;          // q eps
  double tail_term = 0.0;      // bound on |[P]_omega - [P]|_{s-sigma}: exp(-2 pi sigma cutoff) eps
  double bracket_term = 0.0;   // bound on |P~|_{s-sigma}: kappa (d+3)/(pi e) eps/(Q sigma)
  double plus_bound = 0.0;     // tail_term + bracket_term, compared against eps / b
  double tail_measured = 0.0;  // |[P]_omega - [P]|_{s-sigma}
  double bracket_measured = 0.0;
  std::array<bool, 3> conditions_ok{};
  std::array<double, 3> condition_lhs{};  // Q^n eps, mid/(Q sigma), Q sigma exp(-2 pi gamma* Q^(1/a) sigma)
  SeriesLedger pullback;
  SeriesLedger flow;
};

struct StepResult {
  RationalApprox approx;
  FourierField V;
  FourierField phi1_displacement;  // Phi_1 - Id on width s - sigma
  FourierField P_plus;             // on width s - sigma
  std::vector<double> P_avg;       // [P]
  double norm_V = 0.0;
  double norm_phi1 = 0.0;
  double norm_P_plus = 0.0;
  StepBudget budget;
};

struct AveragingOptions {
  /// Truncation radius for every field produced by the step (< 0: exact support).
  int kmax_cap = 32;
  /// Series are summed until the majorized remainder is below series_tol * eps.
  double series_tol = 1e-18;
  /// Modes with weighted size below prune_tol * eps are dropped and ledgered.
  double prune_tol = 1e-22;
  /// Scheduled eps; must dominate |P|_s. <= 0 uses the measured norm.
  double eps = 0.0;
  /// Assert the step estimates (|Phi_1 - Id| <= Q^{n-1} eps, |P^+| <= eps/b).
  bool check_estimates = true;
  /// Refuse steps whose three conditions fail. Cleared only by forced runs.
  bool check_conditions = true;
};

/// Relative slack on the step conditions. Q_m^n eps_m is constant along the
/// schedule only up to rounding, and at eps = eps_* it sits exactly on 1.
inline constexpr double kConditionSlack = 1e-12;

/// Evaluates the three step conditions for (Q, sigma, eps).
std::array<double, 3> step_condition_lhs(const KamConstants& consts, double Q, double sigma, double eps);

/// Pulls X_alpha + S + P back by the time-1 map of the homological solution.
/// S is a constant field with |S|_s <= d eps.
StepResult averaging_step(const FrequencyVector& alpha, const FourierField& S, const FourierField& P, double Q,
                          double sigma, const KamConstants& consts, const AveragingOptions& opts = {});

/// P^+ assembled from its integral form
///   P~ = int_0^1 (V^t)^* [X_varpi + S + P_t, V] dt,  P_t = t P + (1-t)[P]_omega,
///   P^+ = P~ + [P]_omega - [P],
/// with Gauss-Legendre nodes in t. Used to cross-check averaging_step.
FourierField p_plus_integral_form(const FourierField& S, const FourierField& P, const RationalApprox& approx,
                                  const FourierField& V, double sigma, int nodes, double tol, int kmax_cap = -1);

struct CounterTermResult {
  std::vector<double> phi1;  // phi_1(x) = x - [P]
  StepResult step;
};

/// Frequency-shifted step: with phi_1(x) = x - [P] and S = X_{phi_1(x) - alpha},
/// Phi_1^*(X_{phi_1(x)} + P) = X_x + P^+. Requires |x - alpha| <= c eps.
CounterTermResult counter_term_step(const FrequencyVector& alpha, const FourierField& P, std::span<const double> x,
                                    double Q, double sigma, const KamConstants& consts,
                                    const AveragingOptions& opts = {});

}  // namespace kam
