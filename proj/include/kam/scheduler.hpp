#pragma once

// The full iteration: schedules, feasibility of the step conditions, the
// threshold eps_*, and the loop accumulating Phi and beta.

#include <array>
#include <string>
#include <vector>

#include "kam/averaging.hpp"
#include "kam/diophantine.hpp"
#include "kam/embedding.hpp"
#include "kam/kam_constants.hpp"
#include "kam/spectral_field.hpp"

namespace kam {

/// eps_m = b^-m eps, Q_m = 4^(a m) Q, sigma_m = 2^(-m-2) s, s_m = s/2 + s 2^(-m-1).
struct Schedule {
  KamConstants consts;
  double eps = 0.0;
  double Q = 1.0;
  double s = 1.0;

  double eps_m(int m) const;
  double Q_m(int m) const;
  double sigma_m(int m) const;
  double s_m(int m) const;
};

struct ConditionReport {
  bool ok = false;
  std::array<bool, 3> pass{};
  std::array<double, 3> lhs{};
  /// M_{m+1} / M_m for M_m = Q_m sigma_m exp(-2 pi gamma* Q_m^(1/a) sigma_m).
  double ratio = 0.0;
};

ConditionReport check_conditions(const Schedule& schedule, int m);

struct Threshold {
  double Q0 = 0.0;
  double eps_star = 0.0;
};

/// Smallest Q0 = 2^j (Q0 <= q_cap) for which the middle and last conditions
/// hold at m = 0 and M_1/M_0 <= 1; eps_* = Q0^-n. `gamma_star` overrides
/// consts.gamma_star.
Threshold select_Q(const KamConstants& consts, double s, double gamma_star, double q_cap = 0x1p60);

struct StepTrace {
  int m = 0;
  long long q = 0;
  std::vector<long long> p;
  double Q = 0.0;
  double sigma = 0.0;
  double s = 0.0;
  double eps = 0.0;
  double norm_P = 0.0;        // |P_m|_{s_m}
  std::vector<double> P_avg;  // [P_m]
  std::vector<double> delta;  // frequency shift added at this step
  double norm_V = 0.0;
  double norm_phi = 0.0;      // |Phi_{m+1} - Id|_{s_{m+1}}
  double norm_P_next = 0.0;   // |P_{m+1}|_{s_{m+1}}
  double ratio = 0.0;         // norm_P_next / eps_m
  StepBudget budget;
  ConditionReport conditions;
};

struct RunOptions {
  /// Stop once |P_m|_{s_m} <= tol. Negative selects 1e-14 eps; 0 runs to max_steps.
  double tol = -1.0;
  int max_steps = 64;
  /// Proceed above eps_* (conditions and estimates are then reported, not enforced).
  bool force = false;
  int kmax_cap = 32;
  double series_tol = 1e-18;
  double prune_tol = 1e-22;
};

struct RunResult {
  NearIdentityEmbedding phi;
  std::vector<double> beta;
  std::vector<StepTrace> trace;
  Schedule schedule;
  Threshold threshold;
  FourierField P_final;       // P_m on width s_m at exit
  double displacement_sum = 0.0;
  double displacement_bound = 0.0;
  double beta_tail_bound = 0.0;  // |beta - beta_m| <= eps_m b/(b-1)
  std::vector<std::string> warnings;
};

/// Finds beta and Phi with Phi^*(X_alpha + P + X_beta) = X_alpha on width s/2.
RunResult run(const FrequencyVector& alpha, const FourierField& P, double s, const RunOptions& opts = {});

/// Fourier coefficients (|k|_inf <= kmax) of Phi - Id from a (4 kmax)^n grid;
/// the grid is doubled once and the two results must agree to 1e-10.
FourierField materialize(const NearIdentityEmbedding& phi, int kmax, double width);

}  // namespace kam
