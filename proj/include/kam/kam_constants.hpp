#pragma once

namespace kam {

/// Constants of the iteration. a, b, c, d and gamma_star are the classical
/// ones; mid_constant and kappa come from the majorant-norm estimate chain
/// of one averaging step (docs/constants.md).
struct KamConstants {
  int n = 2;
  double tau = 0.0;
  double a = 1.0;           // 1 + (n-1) tau
  double b = 16.0;          // 4^(n a)
  double c = 1.0 / 15.0;    // b^-1 (1 - b^-1)^-1
  double d = 16.0 / 15.0;   // c + 1
  double gamma_star = 0.0;  // resonance cutoff constant
  /// Lie series ratio cap: the pullback of the bracket term grows by at most
  /// kappa = 1 / (1 - 2/(pi b)) once the middle step condition holds.
  double kappa = 1.0;
  /// Middle step condition reads mid_constant / (Q sigma) <= 1, with
  /// mid_constant = b (1 + kappa (d + 3) / (pi e)).
  double mid_constant = 0.0;
};

/// Derives every constant from (n, tau, gamma, gamma_bar).
KamConstants constants(int n, double tau, double gamma, double gamma_bar);

}  // namespace kam
