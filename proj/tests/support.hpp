#pragma once

// Test-side generators and brute-force references. These deliberately avoid
// the library's own generator and evaluation shortcuts.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "kam/diophantine.hpp"
#include "kam/spectral_field.hpp"

namespace kt {

using kam::Complex;
using kam::FourierField;

inline double uniform(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::vector<int> mode_of(std::size_t idx, int n, int kmax) {
  std::vector<int> k(n);
  const std::size_t side = 2 * kmax + 1;
  for (int j = 0; j < n; ++j) {
    k[j] = static_cast<int>(idx % side) - kmax;
    idx /= side;
  }
  return k;
}

inline bool representative(const std::vector<int>& k) {
  for (int v : k)
    if (v != 0) return v > 0;
  return true;
}

inline std::size_t box_size(int n, int kmax) {
  std::size_t m = 1;
  for (int j = 0; j < n; ++j) m *= 2 * kmax + 1;
  return m;
}

/// Random real field on |k|_inf <= kmax with decay exp(-2 pi s |k|_1) and
/// |coefficients| of order `scale`. `density` in (0, 1] keeps each pair with that probability.
inline FourierField random_field(std::mt19937_64& rng, int n, int kmax, double s, double scale,
                                 double density = 1.0, bool with_mean = true) {
  FourierField f(n, s, kmax);
  for (std::size_t idx = 0; idx < box_size(n, kmax); ++idx) {
    auto k = mode_of(idx, n, kmax);
    if (!representative(k)) continue;
    const bool zero = kam::l1_norm(k) == 0;
    if (zero && !with_mean) continue;
    if (density < 1.0 && uniform(rng, 0.0, 1.0) > density) continue;
    const double w = scale * std::exp(-2.0 * std::numbers::pi * s * kam::l1_norm(k));
    std::vector<Complex> c(n);
    for (int j = 0; j < n; ++j) c[j] = zero ? Complex(w * uniform(rng), 0.0) : Complex(w * uniform(rng), w * uniform(rng));
    f.set_mode(k, c);
  }
  return f;
}

/// Term-by-term sum in long double, the extended-precision reference for eval.
inline std::vector<long double> eval_ld(const FourierField& f, const std::vector<double>& theta) {
  const int n = f.dim();
  std::vector<long double> out(n, 0.0L);
  const long double two_pi = 2.0L * 3.14159265358979323846264338327950288L;
  for (std::size_t idx = 0; idx < box_size(n, f.kmax()); ++idx) {
    auto k = mode_of(idx, n, f.kmax());
    long double ph = 0.0L;
    for (int j = 0; j < n; ++j) ph += static_cast<long double>(k[j]) * theta[j];
    ph -= std::floor(ph);
    const long double c = std::cos(two_pi * ph), sn = std::sin(two_pi * ph);
    for (int j = 0; j < n; ++j) {
      const Complex v = f.coeff(k, j);
      out[j] += static_cast<long double>(v.real()) * c - static_cast<long double>(v.imag()) * sn;
    }
  }
  return out;
}

/// Plain coefficient loop for |X|_s, independent of kam::norm.
inline double norm_ref(const FourierField& f, double s) {
  const int n = f.dim();
  double best = 0.0;
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t idx = 0; idx < box_size(n, f.kmax()); ++idx) {
      auto k = mode_of(idx, n, f.kmax());
      acc += std::abs(f.coeff(k, j)) * std::exp(2.0 * std::numbers::pi * s * kam::l1_norm(k));
    }
    best = std::max(best, acc);
  }
  return best;
}

inline double max_coeff_diff(const FourierField& a, const FourierField& b) {
  const int n = a.dim();
  const int K = std::max(a.kmax(), b.kmax());
  double d = 0.0;
  for (std::size_t idx = 0; idx < box_size(n, K); ++idx) {
    auto k = mode_of(idx, n, K);
    for (int j = 0; j < n; ++j) d = std::max(d, std::abs(a.coeff(k, j) - b.coeff(k, j)));
  }
  return d;
}

inline kam::FrequencyVector golden() {
  kam::FrequencyVector a;
  a.alpha_tilde = {(std::sqrt(5.0) - 1.0) / 2.0};
  a.tau = 0.0;
  a.gamma = 1.0 - a.alpha_tilde[0];
  a.gamma_bar = a.gamma;
  return a;
}

inline kam::FrequencyVector cubic3() {
  kam::FrequencyVector a;
  a.alpha_tilde = {std::cbrt(2.0) - 1.0, std::cbrt(4.0) - 1.0};
  a.tau = 0.1;
  const auto est = kam::estimate_constants(a.alpha_tilde, a.tau, 20, 100000);
  a.gamma = est.gamma;
  a.gamma_bar = est.gamma_bar;
  return a;
}

inline std::vector<double> random_point(std::mt19937_64& rng, int n) {
  std::vector<double> t(n);
  for (auto& v : t) v = uniform(rng, 0.0, 1.0);
  return t;
}

}  // namespace kt
