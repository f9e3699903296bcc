#include "kam/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "kam/errors.hpp"

namespace kam {

namespace {

using Rhs = std::function<std::vector<double>(std::span<const double>)>;

constexpr double kFlowTol = 1e-12;
constexpr int kMaxDoublings = 14;

std::vector<double> rk4(const Rhs& f, std::span<const double> x0, double t, int steps) {
  const std::size_t d = x0.size();
  std::vector<double> x(x0.begin(), x0.end()), tmp(d);
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const auto k1 = f(x);
    for (std::size_t l = 0; l < d; ++l) tmp[l] = x[l] + 0.5 * h * k1[l];
    const auto k2 = f(tmp);
    for (std::size_t l = 0; l < d; ++l) tmp[l] = x[l] + 0.5 * h * k2[l];
    const auto k3 = f(tmp);
    for (std::size_t l = 0; l < d; ++l) tmp[l] = x[l] + h * k3[l];
    const auto k4 = f(tmp);
    for (std::size_t l = 0; l < d; ++l) x[l] += h / 6.0 * (k1[l] + 2.0 * k2[l] + 2.0 * k3[l] + k4[l]);
  }
  return x;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Doubles the step count until two results agree; returns the finer one.
std::vector<double> rk4_converged(const Rhs& f, std::span<const double> x0, double t, int steps, int* used) {
  if (steps < 1) throw ParameterError("ode_flow: steps must be >= 1");
  auto prev = rk4(f, x0, t, steps);
  for (int i = 0; i < kMaxDoublings; ++i) {
    steps *= 2;
    auto next = rk4(f, x0, t, steps);
    if (max_diff(prev, next) <= kFlowTol) {
      if (used) *used = steps;
      return next;
    }
    prev = std::move(next);
  }
  throw StiffnessError("ode_flow: no convergence after step doubling; the field is too large for the horizon");
}

Rhs field_rhs(const FourierField& V) {
  return [&V](std::span<const double> x) { return eval(V, x); };
}

Rhs variational_rhs(const FourierField& V) {
  const int n = V.dim();
  return [&V, n](std::span<const double> x) {
    std::vector<double> out(n + n * n, 0.0);
    const auto v = eval(V, x.first(n));
    const auto dv = eval_jacobian(V, x.first(n));
    for (int i = 0; i < n; ++i) out[i] = v[i];
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += dv[i * n + l] * x[n + l * n + c];
        out[n + i * n + c] = acc;
      }
    return out;
  };
}

// Solves M x = b by Gaussian elimination with partial pivoting; returns det(M).
double solve_with_det(std::vector<double> M, std::vector<double>& b) {
  const int n = static_cast<int>(b.size());
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(M[r * n + c]) > std::abs(M[piv * n + c])) piv = r;
    if (piv != c) {
      for (int l = 0; l < n; ++l) std::swap(M[c * n + l], M[piv * n + l]);
      std::swap(b[c], b[piv]);
      det = -det;
    }
    det *= M[c * n + c];
    if (M[c * n + c] == 0.0) return 0.0;
    for (int r = c + 1; r < n; ++r) {
      const double f = M[r * n + c] / M[c * n + c];
      for (int l = c; l < n; ++l) M[r * n + l] -= f * M[c * n + l];
      b[r] -= f * b[c];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int l = r + 1; l < n; ++l) acc -= M[r * n + l] * b[l];
    b[r] = acc / M[r * n + r];
  }
  return det;
}

constexpr double kSingular = 1e-12;

// Phi(theta) - theta and D(Phi) - I through the layers, innermost first.
void compose_with_jacobian(const NearIdentityEmbedding& phi, std::span<const double> theta, std::vector<double>& disp,
                           std::vector<double>& dmat) {
  const int n = static_cast<int>(theta.size());
  disp.assign(n, 0.0);
  dmat.assign(n * n, 0.0);
  std::vector<double> point(theta.begin(), theta.end()), next(n * n);
  const auto& layers = phi.layers();
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    const auto u = eval(it->displacement, std::span<const double>(point));
    const auto A = eval_jacobian(it->displacement, std::span<const double>(point));
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c) {
        double acc = dmat[i * n + c] + A[i * n + c];
        for (int l = 0; l < n; ++l) acc += A[i * n + l] * dmat[l * n + c];
        next[i * n + c] = acc;
      }
    dmat.swap(next);
    for (int j = 0; j < n; ++j) {
      disp[j] += u[j];
      point[j] = theta[j] + disp[j];
    }
  }
}

}  // namespace

TimeAverageSampler::TimeAverageSampler(FourierField P, long long q, std::vector<long long> p, int nodes)
    : P_(std::move(P)), nodes_(nodes) {
  if (nodes < 16) throw ParameterError("quadrature_time_average: nodes must be >= 16");
  const int n = P_.dim();
  if (static_cast<int>(p.size()) != n - 1) throw DimensionError("quadrature_time_average: p has wrong length");
  step_.push_back(q);
  step_.insert(step_.end(), p.begin(), p.end());
  std::vector<int> k(n);
  long long top = 0;
  for (std::size_t idx = 0; idx < P_.mode_count(); ++idx) {
    bool nz = false;
    for (int j = 0; j < n; ++j) nz = nz || P_.data()[idx * n + j] != Complex{};
    if (!nz) continue;
    P_.mode_at(idx, k);
    long long f = 0;
    for (int j = 0; j < n; ++j) f += k[j] * step_[j];
    top = std::max(top, std::abs(f));
  }
  nodes_ = std::max<long long>(nodes_, top + 1);
}

std::vector<double> TimeAverageSampler::operator()(std::span<const double> theta) const {
  const int n = P_.dim();
  if (static_cast<int>(theta.size()) != n) throw DimensionError("time average: point has wrong dimension");
  std::vector<double> acc(n, 0.0), x(n);
  for (long long i = 0; i < nodes_; ++i) {
    for (int j = 0; j < n; ++j) {
      const long long r = ((i * step_[j]) % nodes_ + nodes_) % nodes_;
      x[j] = theta[j] + static_cast<double>(r) / static_cast<double>(nodes_);
    }
    const auto v = eval(P_, std::span<const double>(x));
    for (int j = 0; j < n; ++j) acc[j] += v[j];
  }
  for (double& a : acc) a /= static_cast<double>(nodes_);
  return acc;
}

TimeAverageSampler quadrature_time_average(const FourierField& P, const RationalApprox& approx, int nodes) {
  return TimeAverageSampler(P, approx.q, approx.p, nodes);
}

std::vector<double> ode_flow(const FourierField& V, std::span<const double> theta0, double t, int steps) {
  if (static_cast<int>(theta0.size()) != V.dim()) throw DimensionError("ode_flow: point has wrong dimension");
  return rk4_converged(field_rhs(V), theta0, t, steps, nullptr);
}

FlowWithJacobian ode_flow_variational(const FourierField& V, std::span<const double> theta0, double t, int steps) {
  const int n = V.dim();
  if (static_cast<int>(theta0.size()) != n) throw DimensionError("ode_flow: point has wrong dimension");
  std::vector<double> x0(n + n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    x0[i] = theta0[i];
    x0[n + i * n + i] = 1.0;
  }
  FlowWithJacobian out;
  const auto x = rk4_converged(variational_rhs(V), x0, t, steps, &out.steps);
  out.point.assign(x.begin(), x.begin() + n);
  out.jacobian.assign(x.begin() + n, x.end());
  return out;
}

std::vector<PullbackSample> grid_pullback_oracle(const FourierField& Y, const FourierField& V,
                                                 const std::vector<std::vector<double>>& points, JacobianMode mode,
                                                 double h) {
  const int n = V.dim();
  if (Y.dim() != n) throw DimensionError("grid_pullback_oracle: dimension mismatch");
  std::vector<PullbackSample> out;
  out.reserve(points.size());
  const Rhs f = field_rhs(V);
  for (const auto& theta : points) {
    if (static_cast<int>(theta.size()) != n) throw DimensionError("grid_pullback_oracle: point has wrong dimension");
    PullbackSample smp;
    std::vector<double> image, jac(n * n);
    if (mode == JacobianMode::Variational) {
      auto fj = ode_flow_variational(V, theta, 1.0);
      image = std::move(fj.point);
      jac = std::move(fj.jacobian);
    } else {
      int steps = 0;
      image = rk4_converged(f, theta, 1.0, 16, &steps);
      // One step count for every stencil point keeps the discrete map smooth in theta.
      auto column = [&](int l, double step) {
        std::vector<double> a(theta), b(theta);
        a[l] += step;
        b[l] -= step;
        const auto fa = rk4(f, a, 1.0, steps);
        const auto fb = rk4(f, b, 1.0, steps);
        std::vector<double> c(n);
        for (int i = 0; i < n; ++i) c[i] = (fa[i] - fb[i]) / (2.0 * step);
        return c;
      };
      for (int l = 0; l < n; ++l) {
        const auto c1 = column(l, h);
        const auto c2 = column(l, 0.5 * h);
        for (int i = 0; i < n; ++i) {
          jac[i * n + l] = (4.0 * c2[i] - c1[i]) / 3.0;
          smp.jacobian_error = std::max(smp.jacobian_error, std::abs(c2[i] - c1[i]) / 3.0);
        }
      }
    }
    smp.value = eval(Y, std::span<const double>(image));
    smp.jacobian_det = solve_with_det(jac, smp.value);
    if (std::abs(smp.jacobian_det) < kSingular) throw EmbeddingError("grid_pullback_oracle: singular Jacobian");
    out.push_back(std::move(smp));
  }
  return out;
}

ResidualReport conjugacy_residual(const FrequencyVector& alpha, const FourierField& P,
                                  const NearIdentityEmbedding& phi, std::span<const double> beta, int grid) {
  const int n = alpha.dim();
  if (P.dim() != n || static_cast<int>(beta.size()) != n) throw DimensionError("conjugacy_residual: dimension mismatch");
  if (!phi.is_identity() && phi.dim() != n) throw DimensionError("conjugacy_residual: embedding dimension mismatch");
  if (grid < 1) throw ParameterError("conjugacy_residual: grid must be >= 1");
  const auto a = alpha.alpha();
  ResidualReport rep;
  rep.grid = grid;
  rep.jacobian_min_det = INFINITY;
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= grid;
  std::vector<int> digit(n, 0);
  std::vector<double> theta(n), disp, dmat, img(n);
  for (std::size_t pt = 0; pt < total; ++pt) {
    for (int i = 0; i < n; ++i) theta[i] = static_cast<double>(digit[i]) / grid;
    compose_with_jacobian(phi, theta, disp, dmat);
    for (int i = 0; i < n; ++i) img[i] = theta[i] + disp[i];
    const auto pv = eval(P, std::span<const double>(img));
    // (I + D)^-1 (alpha + beta + P) - alpha = (I + D)^-1 (beta + P - D alpha).
    std::vector<double> rhs(n), M(n * n);
    for (int i = 0; i < n; ++i) {
      double da = 0.0;
      for (int l = 0; l < n; ++l) da += dmat[i * n + l] * a[l];
      rhs[i] = beta[i] + pv[i] - da;
      for (int l = 0; l < n; ++l) M[i * n + l] = dmat[i * n + l] + (i == l ? 1.0 : 0.0);
    }
    const double det = solve_with_det(M, rhs);
    rep.jacobian_min_det = std::min(rep.jacobian_min_det, std::abs(det));
    if (std::abs(det) < kSingular) throw EmbeddingError("conjugacy_residual: singular Jacobian");
    for (int i = 0; i < n; ++i) rep.sup_residual = std::max(rep.sup_residual, std::abs(rhs[i]));
    for (int i = 0; i < n; ++i) {
      if (++digit[i] < grid) break;
      digit[i] = 0;
    }
  }
  return rep;
}

double orbit_shadowing_check(const FrequencyVector& alpha, const FourierField& P, const NearIdentityEmbedding& phi,
                             std::span<const double> beta, double T, int samples, int starts) {
  const int n = alpha.dim();
  if (P.dim() != n || static_cast<int>(beta.size()) != n) throw DimensionError("orbit_shadowing_check: dimension mismatch");
  if (!(T > 0.0) || samples < 1 || starts < 1) throw ParameterError("orbit_shadowing_check: need T > 0, samples >= 1");
  const auto a = alpha.alpha();
  const Rhs f = [&](std::span<const double> x) {
    auto v = eval(P, x);
    for (int i = 0; i < n; ++i) v[i] += a[i] + beta[i];
    return v;
  };
  auto apply = [&](std::span<const double> th) {
    std::vector<double> disp, dmat;
    compose_with_jacobian(phi, th, disp, dmat);
    for (int i = 0; i < n; ++i) disp[i] += th[i];
    return disp;
  };
  const double dt = T / samples;
  const int seg_steps = std::max(4, static_cast<int>(std::ceil(4.0 * dt)));
  double worst = 0.0;
  std::vector<double> theta0(n), th(n);
  for (int s = 0; s < starts; ++s) {
    for (int i = 0; i < n; ++i) theta0[i] = static_cast<double>(s) / starts;
    auto x = apply(theta0);
    for (int k = 1; k <= samples; ++k) {
      x = rk4_converged(f, x, dt, seg_steps, nullptr);
      const double t = k * dt;
      for (int i = 0; i < n; ++i) th[i] = theta0[i] + t * a[i];
      const auto y = apply(th);
      worst = std::max(worst, max_diff(x, y));
    }
  }
  return worst;
}

}  // namespace kam
