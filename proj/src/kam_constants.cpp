#include "kam/kam_constants.hpp"

#include <cmath>
#include <initializer_list>
#include <numbers>

#include "kam/errors.hpp"

namespace kam {

KamConstants constants(int n, double tau, double gamma, double gamma_bar) {
  if (n < 2) throw ParameterError("constants: n must be >= 2");
  if (!(tau >= 0.0)) throw ParameterError("constants: tau must be >= 0");
  if (!(gamma > 0.0) || gamma > 1.0) throw ParameterError("constants: gamma must lie in (0, 1]");
  if (!(gamma_bar > 0.0)) throw ParameterError("constants: gamma_bar must be > 0");
  KamConstants k;
  k.n = n;
  k.tau = tau;
  k.a = 1.0 + (n - 1) * tau;
  k.b = std::pow(4.0, n * k.a);
  // d = b/(b-1) and c = d/b, so d eps_{m+1} and c eps_m agree to an ulp
  // along eps_{m+1} = eps_m / b. Among the representable d next to b/(b-1),
  // take the nearest one for which c + 1 == d also holds exactly.
  const double d0 = 1.0 / (1.0 - 1.0 / k.b);
  k.d = d0;
  k.c = d0 / k.b;
  for (int step = 1; step <= 8 && k.c + 1.0 != k.d; ++step) {
    for (double dir : {-1.0, 1.0}) {
      double d = d0;
      for (int i = 0; i < step; ++i) d = std::nextafter(d, dir * HUGE_VAL);
      if (d / k.b + 1.0 == d) {
        k.d = d;
        k.c = d / k.b;
        break;
      }
    }
  }
  k.gamma_star = std::pow(gamma * std::pow(gamma_bar, (n - 1) / k.a) / n, 1.0 / (n + (n - 1) * tau));
  k.kappa = 1.0 / (1.0 - 2.0 / (std::numbers::pi * k.b));
  k.mid_constant = k.b * (1.0 + k.kappa * (k.d + 3.0) / (std::numbers::pi * std::numbers::e));
  return k;
}

}  // namespace kam
