#include "kam/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kam/errors.hpp"

namespace kam {

namespace {

// Brute-force search beyond this many candidates is refused.
constexpr double kMaxSearch = 2.0e10;

long long search_limit(double Q, int n) {
  const double lim = std::floor(std::pow(Q, n - 1) * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()));
  if (lim > kMaxSearch) throw ParameterError("dirichlet_approx: search range Q^(n-1) exceeds the brute-force cap");
  return std::max(1LL, static_cast<long long>(lim));
}

// |q x - p| rounded once.
double residual(long long q, double x, long long p) {
  return std::abs(std::fma(static_cast<double>(q), x, -static_cast<double>(p)));
}

long long nearest(long long q, double x) {
  return static_cast<long long>(std::nearbyint(static_cast<double>(q) * x));
}

RationalApprox make_approx(std::span<const double> at, long long q, double Q) {
  RationalApprox r;
  r.q = q;
  r.Q = Q;
  r.p.resize(at.size());
  r.varpi.assign(at.size() + 1, 0.0);
  for (std::size_t j = 0; j < at.size(); ++j) {
    r.p[j] = nearest(q, at[j]);
    const double d = std::fma(static_cast<double>(q), at[j], -static_cast<double>(r.p[j]));
    r.residual = std::max(r.residual, std::abs(d));
    r.varpi[j + 1] = d / static_cast<double>(q);
  }
  return r;
}

bool fits(std::span<const double> at, long long q, double inv_Q) {
  for (double x : at) {
    if (residual(q, x, nearest(q, x)) > inv_Q) return false;
  }
  return true;
}

void check_Q(double Q) {
  if (!(Q >= 1.0) || !std::isfinite(Q)) throw ParameterError("dirichlet_approx: Q must be >= 1");
}

}  // namespace

std::vector<double> FrequencyVector::alpha() const {
  std::vector<double> a;
  a.reserve(alpha_tilde.size() + 1);
  a.push_back(1.0);
  a.insert(a.end(), alpha_tilde.begin(), alpha_tilde.end());
  return a;
}

void FrequencyVector::validate() const {
  if (alpha_tilde.empty()) throw ParameterError("frequency: need n >= 2");
  for (double x : alpha_tilde) {
    if (!(x >= -1.0 && x <= 1.0)) throw ParameterError("frequency: alpha~ entries must lie in [-1, 1]");
  }
  if (!(tau >= 0.0)) throw ParameterError("frequency: tau must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("frequency: gamma must lie in (0, 1]");
  if (!(gamma_bar > 0.0)) throw ParameterError("frequency: gamma_bar must be > 0");
}

std::vector<double> RationalApprox::omega() const {
  std::vector<double> w;
  w.reserve(p.size() + 1);
  w.push_back(1.0);
  for (long long pj : p) w.push_back(static_cast<double>(pj) / static_cast<double>(q));
  return w;
}

long long RationalApprox::resonance_numerator(std::span<const int> k) const {
  long long s = q * k[0];
  for (std::size_t j = 0; j < p.size(); ++j) s += static_cast<long long>(k[j + 1]) * p[j];
  return s;
}

double dist_to_int(double y) {
  return std::abs(y - std::nearbyint(y));
}

RationalApprox dirichlet_approx_brute_force(std::span<const double> alpha_tilde, double Q) {
  check_Q(Q);
  const int n = static_cast<int>(alpha_tilde.size()) + 1;
  const long long limit = search_limit(Q, n);
  const double inv_Q = 1.0 / Q;
  for (long long q = 1; q <= limit; ++q) {
    if (fits(alpha_tilde, q, inv_Q)) return make_approx(alpha_tilde, q, Q);
  }
  throw InternalError("dirichlet_approx: no denominator found; floating-point inconsistency");
}

RationalApprox dirichlet_approx_continued_fraction(double x, double Q) {
  check_Q(Q);
  const double at[1] = {x};
  const double inv_Q = 1.0 / Q;
  const long long limit = static_cast<long long>(std::floor(Q * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())));
  if (fits(at, 1, inv_Q)) return make_approx(at, 1, Q);

  // Convergents h_j = (q_j, p_j) with signed residuals r_j = q_j x - p_j,
  // |r_{j+1}| < |r_j| and alternating signs.
  long long q_prev = 0, p_prev = 1;
  long long q_cur = 1, p_cur = static_cast<long long>(std::floor(x));
  double r_prev = -1.0;
  double r_cur = std::fma(1.0, x, -static_cast<double>(p_cur));
  while (r_cur != 0.0) {
    long long a = static_cast<long long>(std::floor(std::abs(r_prev) / std::abs(r_cur)));
    a = std::max(1LL, a);
    auto step = [&](long long aa, long long& qn, long long& pn, double& rn) {
      qn = aa * q_cur + q_prev;
      pn = aa * p_cur + p_prev;
      rn = std::fma(static_cast<double>(qn), x, -static_cast<double>(pn));
    };
    long long qn, pn;
    double rn;
    step(a, qn, pn, rn);
    // Repair the partial quotient if the ratio was rounded across an integer.
    while (a > 1 && (std::signbit(rn) == std::signbit(r_cur) && rn != 0.0)) {
      --a;
      step(a, qn, pn, rn);
    }
    while (std::abs(rn) >= std::abs(r_cur)) {
      ++a;
      step(a, qn, pn, rn);
    }
    if (qn > limit) break;
    q_prev = q_cur;
    p_prev = p_cur;
    r_prev = r_cur;
    q_cur = qn;
    p_cur = pn;
    r_cur = rn;
    if (fits(at, q_cur, inv_Q)) return make_approx(at, q_cur, Q);
  }
  // Exact rationals and boundary cases fall back to the plain search.
  return dirichlet_approx_brute_force(at, Q);
}

RationalApprox dirichlet_approx(const FrequencyVector& alpha, double Q) {
  check_Q(Q);
  if (alpha.alpha_tilde.empty()) throw ParameterError("dirichlet_approx: need n >= 2");
  if (alpha.alpha_tilde.size() == 1) return dirichlet_approx_continued_fraction(alpha.alpha_tilde[0], Q);
  return dirichlet_approx_brute_force(alpha.alpha_tilde, Q);
}

PsiResult psi(const FrequencyVector& alpha, double Q) {
  if (!(Q >= 1.0)) throw ParameterError("psi: Q must be >= 1");
  const int n = alpha.dim();
  const auto a = alpha.alpha();
  const long long K = static_cast<long long>(std::floor(Q));
  PsiResult best;
  best.argmax.assign(n, 0);
  std::vector<long long> k(n, -K);
  // Odometer over the box; k and -k give the same value, so only the half
  // with first nonzero entry positive is scored.
  while (true) {
    bool nonzero = false;
    bool positive = false;
    for (int j = 0; j < n; ++j) {
      if (k[j] != 0) {
        nonzero = true;
        positive = k[j] > 0;
        break;
      }
    }
    if (nonzero && positive) {
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot = std::fma(static_cast<double>(k[j]), a[j], dot);
      if (dot == 0.0) throw ResonanceError("psi: exact resonance k . alpha = 0", k);
      const double v = 1.0 / std::abs(dot);
      if (v > best.value) {
        best.value = v;
        best.argmax = k;
      }
    }
    int j = 0;
    while (j < n && k[j] == K) {
      k[j] = -K;
      ++j;
    }
    if (j == n) break;
    ++k[j];
  }
  return best;
}

DiophantineEstimate estimate_constants(std::span<const double> alpha_tilde, double tau, int k_range,
                                       long long q_range) {
  if (k_range < 1 || q_range < 1) throw ParameterError("estimate_constants: ranges must be >= 1");
  if (!(tau >= 0.0)) throw ParameterError("estimate_constants: tau must be >= 0");
  const int m = static_cast<int>(alpha_tilde.size());  // n - 1
  if (m < 1) throw ParameterError("estimate_constants: need n >= 2");
  DiophantineEstimate est;
  est.gamma = std::numeric_limits<double>::infinity();
  est.gamma_bar = std::numeric_limits<double>::infinity();

  const double lin_exp = (1.0 + tau) * m;
  std::vector<long long> k(m, -k_range);
  while (true) {
    bool nonzero = false;
    bool positive = false;
    for (int j = 0; j < m; ++j) {
      if (k[j] != 0) {
        nonzero = true;
        positive = k[j] > 0;
        break;
      }
    }
    if (nonzero && positive) {
      double dot = 0.0;
      long long sup = 0;
      for (int j = 0; j < m; ++j) {
        dot = std::fma(static_cast<double>(k[j]), alpha_tilde[j], dot);
        sup = std::max(sup, std::abs(k[j]));
      }
      const double d = dist_to_int(dot);
      if (d == 0.0) throw ResonanceError("estimate_constants: k . alpha~ is an integer", k);
      const double v = d * std::pow(static_cast<double>(sup), lin_exp);
      if (v < est.gamma) {
        est.gamma = v;
        est.gamma_witness = k;
      }
    }
    int j = 0;
    while (j < m && k[j] == k_range) {
      k[j] = -k_range;
      ++j;
    }
    if (j == m) break;
    ++k[j];
  }
  est.gamma = std::min(est.gamma, 1.0);

  const double sim_exp = (1.0 + m * tau) / m;
  for (long long q = 1; q <= q_range; ++q) {
    double d = 0.0;
    for (double x : alpha_tilde) {
      d = std::max(d, std::abs(std::fma(static_cast<double>(q), x, -std::nearbyint(static_cast<double>(q) * x))));
    }
    if (d == 0.0) {
      std::vector<long long> w{q};
      throw ResonanceError("estimate_constants: q alpha~ is an integer vector", w);
    }
    const double v = d * std::pow(static_cast<double>(q), sim_exp);
    if (v < est.gamma_bar) {
      est.gamma_bar = v;
      est.gamma_bar_witness = q;
    }
  }
  est.warning =
      "gamma and gamma_bar are minima over finite search ranges; they are estimates, "
      "not proofs that alpha~ is Diophantine";
  return est;
}

ResonanceBound resonance_bound(const FrequencyVector& alpha, double Q) {
  alpha.validate();
  const double n = alpha.dim();
  const double tau = alpha.tau;
  ResonanceBound rb;
  rb.a = 1.0 + (n - 1.0) * tau;
  rb.Q = Q;
  const double inner = alpha.gamma * std::pow(alpha.gamma_bar, (n - 1.0) / rb.a) / n;
  rb.gamma_star = std::pow(inner, 1.0 / (n + (n - 1.0) * tau));
  rb.cutoff = rb.gamma_star * std::pow(Q, 1.0 / rb.a);
  return rb;
}

double lower_denominator_bound(const FrequencyVector& alpha, const RationalApprox& approx) {
  const double n = alpha.dim();
  const double bound = std::pow(alpha.gamma_bar * approx.Q, (n - 1.0) / (1.0 + (n - 1.0) * alpha.tau));
  if (static_cast<double>(approx.q) < bound * (1.0 - 1e-12)) {
    throw ConstantsInconsistencyError("denominator q = " + std::to_string(approx.q) +
                                      " is below the lower bound " + std::to_string(bound) +
                                      "; re-estimate gamma_bar over a longer range");
  }
  return bound;
}

}  // namespace kam
