#include "kam/generate.hpp"

#include <cmath>
#include <random>

#include "kam/errors.hpp"

namespace kam {

FourierField random_field(int n, double s, double eps, int kmax, std::uint64_t seed) {
  if (n < 1) throw ParameterError("random_field: n must be >= 1");
  if (!(s > 0.0)) throw ParameterError("random_field: s must be > 0");
  if (!(eps >= 0.0)) throw ParameterError("random_field: eps must be >= 0");
  if (kmax < 0) throw ParameterError("random_field: kmax must be >= 0");
  std::mt19937_64 rng(seed);
  // 53 random bits mapped to [-1, 1); independent of the library's distribution code.
  auto uniform = [&rng] { return std::ldexp(static_cast<double>(rng() >> 11), -53) * 2.0 - 1.0; };
  FourierField f(n, s, kmax);
  std::vector<int> k(n);
  std::vector<Complex> c(n);
  for (std::size_t idx = f.zero_index(); idx < f.mode_count(); ++idx) {
    f.mode_at(idx, k);
    const double weight = std::exp(-kTwoPi * s * l1_norm(k));
    const bool zero = idx == f.zero_index();
    for (int j = 0; j < n; ++j) {
      const double re = uniform();
      const double im = zero ? 0.0 : uniform();
      c[j] = Complex(re, im) * weight;
    }
    f.set_mode(k, c);
  }
  const double nf = norm(f, s);
  if (nf > 0.0) f *= eps / nf;
  if (eps == 0.0) return f;
  // Rescaling rounds every coefficient, so the norm can be a few ulp off.
  // Fix it through the mean of the dominant component, where the norm is
  // monotone in |mean|, in quarter-ulp steps of eps.
  int jmax = 0;
  double best = -1.0;
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t idx = 0; idx < f.mode_count(); ++idx) {
      f.mode_at(idx, k);
      acc += std::abs(f.data()[idx * n + j]) * std::exp(kTwoPi * s * l1_norm(k));
    }
    if (acc > best) best = acc, jmax = j;
  }
  Complex& mean = f.data()[f.zero_index() * n + jmax];
  const double sign = mean.real() < 0.0 ? -1.0 : 1.0;
  for (int pass = 0; pass < 256; ++pass) {
    const double now = norm(f, s);
    if (now == eps) break;
    double x = mean.real();
    if (pass < 2)
      x += sign * (eps - now);
    else
      x += sign * std::copysign(0.25 * (std::nextafter(eps, HUGE_VAL) - eps), eps - now);
    mean = Complex(x, 0.0);
  }
  return f;
}

}  // namespace kam
