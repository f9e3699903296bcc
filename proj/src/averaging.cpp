#include "kam/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kam/errors.hpp"

namespace kam {

namespace {

constexpr int kMaxSeriesTerms = 400;

void cap(FourierField& f, int kmax_cap, double prune_abs, double ledger_width, SeriesLedger* ledger) {
  double dropped = 0.0;
  if (kmax_cap >= 0) dropped += truncate_in_place(f, kmax_cap, ledger_width);
  dropped += prune_in_place(f, prune_abs, ledger_width);
  if (ledger) ledger->truncated_norm += dropped;
}

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) {
        p1 = z;
        p0 = 1.0;
      }
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

FourierField constant_field(std::span<const double> c, double width) {
  return FourierField::constant(c, width);
}

}  // namespace

FourierField omega_average(const FourierField& p, const RationalApprox& approx) {
  if (approx.dim() != p.dim()) throw DimensionError("omega_average: dimension mismatch");
  FourierField out = p;
  const int n = p.dim();
  std::vector<int> k(n);
  auto data = out.data();
  for (std::size_t idx = 0; idx < p.mode_count(); ++idx) {
    p.mode_at(idx, k);
    if (approx.is_resonant(k)) continue;
    for (int j = 0; j < n; ++j) data[idx * n + j] = Complex{};
  }
  return out;
}

std::vector<double> space_average(const FourierField& p) {
  return p.mean();
}

HomologicalSolution solve_homological(const FourierField& p, const RationalApprox& approx) {
  if (approx.dim() != p.dim()) throw DimensionError("solve_homological: dimension mismatch");
  const int n = p.dim();
  HomologicalSolution sol{FourierField(n, p.width(), p.kmax()), approx, 0.0};
  std::vector<int> k(n);
  const auto pd = p.data();
  auto vd = sol.V.data();
  const double q = static_cast<double>(approx.q);
  for (std::size_t idx = 0; idx < p.mode_count(); ++idx) {
    p.mode_at(idx, k);
    const long long num = approx.resonance_numerator(k);
    if (num == 0) continue;
    // 2 pi i (k . omega) = 2 pi i num / q, and |num| >= 1.
    const Complex inv_divisor = q / Complex(0.0, kTwoPi * static_cast<double>(num));
    for (int j = 0; j < n; ++j) vd[idx * n + j] = pd[idx * n + j] * inv_divisor;
  }

  const double scale = p.max_abs();
  if (scale > 0.0) {
    const auto omega = approx.omega();
    const FourierField bracket = lie_bracket(sol.V, constant_field(omega, p.width()));
    FourierField defect = bracket - (p - omega_average(p, approx));
    sol.residual = defect.max_abs() / scale;
  }

  const double nv = norm(sol.V, p.width());
  const double ng = norm(p - omega_average(p, approx), p.width());
  if (nv > q * ng * (1.0 + 1e-12)) throw InternalError("solve_homological: divisor floor |k . omega| >= 1/q violated");
  return sol;
}

FourierField lie_pullback(const FourierField& y, const FourierField& v, double s, double sigma, double tol,
                          SeriesLedger* ledger, int kmax_cap, double prune_abs) {
  if (y.dim() != v.dim()) throw DimensionError("lie_pullback: dimension mismatch");
  if (!(sigma > 0.0) || !(sigma < s)) throw ParameterError("lie_pullback: need 0 < sigma < s");
  if (s > y.width() || s > v.width()) throw ParameterError("lie_pullback: fields are not defined on width s");
  if (!(tol > 0.0)) throw ParameterError("lie_pullback: tol must be > 0");
  const double target = s - sigma;
  const double nv = norm(v, s);
  const double ratio = kBracketConstant * std::numbers::e * nv / sigma;
  if (!(ratio < 1.0)) {
    std::ostringstream msg;
    msg << "lie_pullback: series ratio 2|V|_s/sigma = " << ratio
        << " is not below 1; use a larger Q or a smaller eps";
    throw StepSizeError(msg.str());
  }
  SeriesLedger local;
  SeriesLedger& led = ledger ? *ledger : local;
  FourierField result = y;
  cap(result, kmax_cap, prune_abs, target, &led);
  if (nv == 0.0) {
    result.set_width(target);
    return result;
  }
  const double ny = norm(y, s);
  FourierField term = result;
  double r_pow = ratio;  // ratio^m
  int m = 1;
  for (; m <= kMaxSeriesTerms; ++m) {
    term = lie_bracket(term, v);
    term *= 1.0 / m;
    cap(term, kmax_cap, prune_abs, target, &led);
    result += term;
    r_pow *= ratio;
    const double remainder = ny * r_pow / (1.0 - ratio);
    led.remainder_bound = remainder;
    if (remainder <= tol || term.is_zero()) {
      if (term.is_zero()) led.remainder_bound = 0.0;
      break;
    }
  }
  led.terms = m;
  result.set_width(target);
  return result;
}

double flow_displacement_bound(double sigma, double nv) {
  if (!(nv < sigma)) throw StepSizeError("flow displacement: need |V|_s < sigma");
  return nv / (1.0 - nv / sigma);
}

FourierField flow_displacement(const FourierField& v, double s, double sigma, double tol, SeriesLedger* ledger,
                               int kmax_cap, double prune_abs) {
  if (!(sigma > 0.0) || !(sigma < s)) throw ParameterError("flow_displacement: need 0 < sigma < s");
  if (s > v.width()) throw ParameterError("flow_displacement: field is not defined on width s");
  if (!(tol > 0.0)) throw ParameterError("flow_displacement: tol must be > 0");
  const double target = s - sigma;
  const double nv = norm(v, s);
  const double rho = nv / sigma;
  if (!(rho < 1.0)) throw StepSizeError("flow_displacement: |V|_s must be below sigma");
  SeriesLedger local;
  SeriesLedger& led = ledger ? *ledger : local;
  FourierField u = v;
  cap(u, kmax_cap, prune_abs, target, &led);
  if (nv == 0.0) {
    u.set_width(target);
    return u;
  }
  FourierField term = u;
  double r_pow = rho;
  int j = 1;
  for (; j <= kMaxSeriesTerms; ++j) {
    term = directional_derivative(term, v);
    term *= 1.0 / (j + 1);
    cap(term, kmax_cap, prune_abs, target, &led);
    u += term;
    r_pow *= rho;
    const double remainder = nv * r_pow / (1.0 - rho);
    led.remainder_bound = remainder;
    if (remainder <= tol || term.is_zero()) {
      if (term.is_zero()) led.remainder_bound = 0.0;
      break;
    }
  }
  led.terms = j;
  u.set_width(target);
  return u;
}

std::array<double, 3> step_condition_lhs(const KamConstants& consts, double Q, double sigma, double eps) {
  const double qs = Q * sigma;
  return {std::pow(Q, consts.n) * eps, consts.mid_constant / qs,
          qs * std::exp(-kTwoPi * consts.gamma_star * std::pow(Q, 1.0 / consts.a) * sigma)};
}

StepResult averaging_step(const FrequencyVector& alpha, const FourierField& S, const FourierField& P, double Q,
                          double sigma, const KamConstants& consts, const AveragingOptions& opts) {
  const int n = P.dim();
  if (alpha.dim() != n || S.dim() != n || consts.n != n) throw DimensionError("averaging_step: dimension mismatch");
  const double s = P.width();
  if (!(sigma > 0.0) || !(sigma < s)) throw ParameterError("averaging_step: need 0 < sigma < s");
  if (S.width() < s) throw ParameterError("averaging_step: S must be defined on the width of P");
  if (!(Q >= 1.0)) throw ParameterError("averaging_step: Q must be >= 1");
  const double target = s - sigma;

  const double measured = norm(P, s);
  double eps = measured;
  if (opts.eps > 0.0) {
    if (measured > opts.eps * (1.0 + 1e-12))
      throw ParameterError("averaging_step: scheduled eps is smaller than |P|_s");
    eps = opts.eps;
  }

  StepResult res;
  StepBudget& budget = res.budget;
  budget.eps = eps;
  res.P_avg = space_average(P);

  if (!S.shrunk().is_zero() && S.shrunk().kmax() != 0)
    throw ParameterError("averaging_step: S must be a constant field");
  const double ns = norm(S, s);
  if (ns > consts.d * eps * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "averaging_step: |S|_s = " << ns << " exceeds d eps = " << consts.d * eps;
    throw StepConditionError(msg.str());
  }

  budget.condition_lhs = step_condition_lhs(consts, Q, sigma, eps);
  std::string failed;
  for (int i = 0; i < 3; ++i) {
    budget.conditions_ok[i] = budget.condition_lhs[i] <= 1.0 + kConditionSlack;
    if (!budget.conditions_ok[i]) {
      static const char* names[3] = {"Q^n eps <= 1", "mid/(Q sigma) <= 1", "Q sigma exp(-2 pi gamma* Q^(1/a) sigma) <= 1"};
      std::ostringstream part;
      part << (failed.empty() ? "" : "; ") << names[i] << " (lhs " << budget.condition_lhs[i] << ")";
      failed += part.str();
    }
  }
  if (!failed.empty() && opts.check_conditions) throw StepConditionError("averaging_step: step conditions violated: " + failed);

  if (P.is_zero()) {
    res.V = FourierField(n, s, 0);
    res.phi1_displacement = FourierField(n, target, 0);
    res.P_plus = FourierField(n, target, 0);
    return res;
  }

  res.approx = dirichlet_approx(alpha, Q);
  const RationalApprox& approx = res.approx;
  const double q = static_cast<double>(approx.q);
  budget.q_eps = q * eps;

  const FourierField p_omega = omega_average(P, approx);
  HomologicalSolution hs = solve_homological(P, approx);
  res.V = std::move(hs.V);
  res.norm_V = norm(res.V, s);

  // R = X_varpi + S + P, and ad_V Y = ([P]_omega - P) + [R, V] since [X_omega, V] = [P]_omega - P.
  FourierField R = P + S;
  R.add_constant(approx.varpi);
  const FourierField RV = lie_bracket(R, res.V);
  FourierField w1 = (p_omega - P) + RV;
  const double tol = opts.series_tol * eps;
  const double prune = opts.prune_tol * eps;
  cap(w1, opts.kmax_cap, prune, target, &budget.pullback);

  // sum_{j>=1} ad^j W1 / (j+1)!, pulled from width s - sigma/2 down to s - sigma.
  const double ratio = 4.0 * res.norm_V / sigma;
  if (!(ratio < 1.0)) throw StepSizeError("averaging_step: 4|V|_s/sigma >= 1; use a larger Q or a smaller eps");
  const double w1_norm = norm(w1.with_width(s - 0.5 * sigma), s - 0.5 * sigma);
  FourierField higher(n, target, 0);
  FourierField term = w1;
  double r_pow = 1.0;
  int j = 1;
  for (; j <= kMaxSeriesTerms; ++j) {
    term = lie_bracket(term, res.V);
    term *= 1.0 / (j + 1);
    cap(term, opts.kmax_cap, prune, target, &budget.pullback);
    higher += term;
    r_pow *= ratio;
    const double remainder = w1_norm * r_pow * ratio / (1.0 - ratio);
    budget.pullback.remainder_bound = remainder;
    if (remainder <= tol || term.is_zero()) {
      if (term.is_zero()) budget.pullback.remainder_bound = 0.0;
      break;
    }
  }
  budget.pullback.terms = j + 1;

  FourierField tail = p_omega;
  {
    std::vector<double> neg(n);
    for (int i = 0; i < n; ++i) neg[i] = -res.P_avg[i];
    tail.add_constant(neg);
  }
  res.P_plus = tail + RV + higher;
  cap(res.P_plus, opts.kmax_cap, prune, target, &budget.pullback);
  res.P_plus.set_width(target);
  tail.set_width(target);

  res.phi1_displacement = flow_displacement(res.V, s, sigma, tol, &budget.flow, opts.kmax_cap, prune);
  res.norm_phi1 = norm(res.phi1_displacement, target);
  res.norm_P_plus = norm(res.P_plus, target);

  const double cutoff = consts.gamma_star * std::pow(Q, 1.0 / consts.a);
  budget.tail_term = tail_bound(n, sigma, std::max(cutoff, 1.0)) * eps;
  budget.bracket_term =
      consts.kappa * (consts.d + 3.0) / (std::numbers::pi * std::numbers::e) * eps / (Q * sigma);
  budget.plus_bound = budget.tail_term + budget.bracket_term;
  budget.tail_measured = tail.is_zero() ? 0.0 : norm(tail, target);
  {
    FourierField rest = res.P_plus - tail;
    rest.set_width(target);
    budget.bracket_measured = norm(rest, target);
  }

  if (opts.check_estimates) {
    const double phi_bound = std::pow(Q, n - 1) * eps;
    if (res.norm_phi1 > phi_bound) {
      std::ostringstream msg;
      msg << "averaging_step: |Phi_1 - Id| = " << res.norm_phi1 << " exceeds Q^(n-1) eps = " << phi_bound;
      throw ContractionError(msg.str(), res.norm_phi1 / phi_bound);
    }
    const double plus_bound = eps / consts.b;
    if (res.norm_P_plus > plus_bound) {
      std::ostringstream msg;
      msg << "averaging_step: contraction failed, |P^+|/eps = " << res.norm_P_plus / eps << " > 1/b = " << 1.0 / consts.b;
      throw ContractionError(msg.str(), res.norm_P_plus / eps);
    }
  }
  return res;
}

FourierField p_plus_integral_form(const FourierField& S, const FourierField& P, const RationalApprox& approx,
                                  const FourierField& V, double sigma, int nodes, double tol, int kmax_cap) {
  const int n = P.dim();
  const double s = P.width();
  const double half = s - 0.5 * sigma;
  const FourierField p_omega = omega_average(P, approx);
  std::vector<double> t, w;
  gauss_legendre(nodes, t, w);
  FourierField p_tilde(n, s - sigma, 0);
  for (int i = 0; i < nodes; ++i) {
    FourierField pt = t[i] * P + (1.0 - t[i]) * p_omega;
    FourierField inner = pt + S;
    inner.add_constant(approx.varpi);
    FourierField u = lie_bracket(inner, V);
    u.set_width(s);
    FourierField vt = t[i] * V;
    FourierField pulled = lie_pullback(u, vt, half, 0.5 * sigma, tol, nullptr, kmax_cap);
    p_tilde += w[i] * pulled;
  }
  FourierField out = p_tilde + p_omega;
  std::vector<double> neg = P.mean();
  for (double& x : neg) x = -x;
  out.add_constant(neg);
  out.set_width(s - sigma);
  return out;
}

CounterTermResult counter_term_step(const FrequencyVector& alpha, const FourierField& P, std::span<const double> x,
                                    double Q, double sigma, const KamConstants& consts,
                                    const AveragingOptions& opts) {
  const int n = P.dim();
  if (static_cast<int>(x.size()) != n) throw DimensionError("counter_term_step: x has wrong dimension");
  const double s = P.width();
  const double eps = opts.eps > 0.0 ? opts.eps : norm(P, s);
  const auto a = alpha.alpha();
  double dist = 0.0;
  for (int j = 0; j < n; ++j) dist = std::max(dist, std::abs(x[j] - a[j]));
  if (dist > consts.c * eps * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "counter_term_step: |x - alpha| = " << dist << " is outside B_{c eps}(alpha), c eps = " << consts.c * eps;
    throw DomainError(msg.str());
  }
  CounterTermResult out;
  const auto avg = P.mean();
  out.phi1.resize(n);
  std::vector<double> shift(n);
  for (int j = 0; j < n; ++j) {
    out.phi1[j] = x[j] - avg[j];
    shift[j] = (x[j] - a[j]) - avg[j];
  }
  const FourierField S = FourierField::constant(shift, s);
  out.step = averaging_step(alpha, S, P, Q, sigma, consts, opts);
  return out;
}

}  // namespace kam
