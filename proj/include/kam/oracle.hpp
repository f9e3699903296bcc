#pragma once

// Brute-force references. Nothing here calls the averaging or scheduler
// code; fields are only evaluated pointwise.

#include <span>
#include <vector>

#include "kam/diophantine.hpp"
#include "kam/embedding.hpp"
#include "kam/spectral_field.hpp"

namespace kam {

/// int_0^1 P(theta + t (q, p)) dt by the periodic trapezoid rule.
class TimeAverageSampler {
 public:
  /// `nodes` is raised to exceed the largest frequency k . (q, p) present in P.
  TimeAverageSampler(FourierField P, long long q, std::vector<long long> p, int nodes);
  std::vector<double> operator()(std::span<const double> theta) const;
  long long nodes() const noexcept { return nodes_; }

 private:
  FourierField P_;
  std::vector<long long> step_;  // (q, p)
  long long nodes_;
  std::vector<std::vector<int>> modes_;
  std::vector<std::size_t> mode_idx_;
};

/// Samples the time average of P along the closed orbits of X_{q omega}.
TimeAverageSampler quadrature_time_average(const FourierField& P, const RationalApprox& approx, int nodes = 256);

/// theta(t) for theta' = V(theta), classical RK4 with `steps` steps, doubled
/// until two successive results agree to 1e-12. Returns the lift (no mod 1).
std::vector<double> ode_flow(const FourierField& V, std::span<const double> theta0, double t, int steps = 16);

struct FlowWithJacobian {
  std::vector<double> point;     // flow of theta0 at time t
  std::vector<double> jacobian;  // row-major n x n
  int steps = 0;
};

/// Flow plus its Jacobian from the variational equation J' = DV(theta) J.
FlowWithJacobian ode_flow_variational(const FourierField& V, std::span<const double> theta0, double t,
                                      int steps = 16);

enum class JacobianMode { Variational, FiniteDifference };

struct PullbackSample {
  std::vector<double> value;     // (D Phi)^-1 Y(Phi(theta))
  double jacobian_det = 0.0;
  double jacobian_error = 0.0;   // Richardson error estimate (finite differences only)
};

/// Pullback of Y by the time-1 map of V at each point.
std::vector<PullbackSample> grid_pullback_oracle(const FourierField& Y, const FourierField& V,
                                                 const std::vector<std::vector<double>>& points,
                                                 JacobianMode mode = JacobianMode::Variational, double h = 1e-5);

struct ResidualReport {
  double sup_residual = 0.0;
  double jacobian_min_det = 0.0;
  int grid = 0;
};

/// sup over a grid^n lattice of |(D Phi)^-1 (X_alpha + P + X_beta)(Phi) - alpha|.
ResidualReport conjugacy_residual(const FrequencyVector& alpha, const FourierField& P,
                                  const NearIdentityEmbedding& phi, std::span<const double> beta, int grid);

/// Integrates X_alpha + P + X_beta from Phi(theta0) and compares with
/// Phi(theta0 + t alpha) at `samples` equally spaced times in (0, T].
/// Uses the starting points theta0 = (i / starts) (1, ..., 1), i < starts.
double orbit_shadowing_check(const FrequencyVector& alpha, const FourierField& P, const NearIdentityEmbedding& phi,
                             std::span<const double> beta, double T, int samples, int starts = 3);

}  // namespace kam
