#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "kam/errors.hpp"
#include "kam/kam_constants.hpp"
#include "kam/oracle.hpp"
#include "kam/scheduler.hpp"
#include "support.hpp"

using namespace kam;

TEST_CASE("constants examples") {
  auto k2 = constants(2, 0.0, 0.38, 0.38);
  CHECK(k2.a == 1.0);
  CHECK(k2.b == 16.0);
  CHECK(k2.c == doctest::Approx(1.0 / 15.0).epsilon(1e-15));
  CHECK(k2.d == doctest::Approx(16.0 / 15.0).epsilon(1e-15));
  CHECK(k2.c + 1.0 == k2.d);
  auto k3 = constants(3, 0.0, 0.2, 0.3);
  CHECK(k3.b == 64.0);
  CHECK(k3.c == doctest::Approx(1.0 / 63.0).epsilon(1e-15));
  CHECK(k3.d == doctest::Approx(64.0 / 63.0).epsilon(1e-15));
  CHECK(k2.gamma_star == doctest::Approx(std::sqrt(0.38 * 0.38 / 2)).epsilon(1e-15));
  auto kt3 = constants(3, 0.1, 0.2, 0.3);
  CHECK(kt3.a == doctest::Approx(1.2));
  CHECK(kt3.gamma_star == doctest::Approx(std::pow(0.2 * std::pow(0.3, 2 / 1.2) / 3, 1 / 3.2)).epsilon(1e-14));
  CHECK_THROWS_AS(constants(1, 0, 0.3, 0.3), ParameterError);
  CHECK_THROWS_AS(constants(2, -1, 0.3, 0.3), ParameterError);
  CHECK_THROWS_AS(constants(2, 0, 1.3, 0.3), ParameterError);
  CHECK_THROWS_AS(constants(2, 0, 0.3, 0.0), ParameterError);
}

TEST_CASE("select_Q: feasibility and monotonicity") {
  auto k = constants(2, 0.0, 0.382, 0.382);
  auto t = select_Q(k, 1.0, k.gamma_star);
  CHECK(std::isfinite(t.Q0));
  CHECK(t.eps_star == doctest::Approx(std::pow(t.Q0, -2)));
  CHECK(t.eps_star > 0);
  Schedule sch{k, t.eps_star, t.Q0, 1.0};
  auto rep = check_conditions(sch, 0);
  CHECK(rep.ok);
  CHECK(rep.ratio <= 1.0);
  if (t.Q0 > 1) {
    Schedule smaller{k, std::pow(t.Q0 / 2, -2), t.Q0 / 2, 1.0};
    CHECK_FALSE(check_conditions(smaller, 0).ok);
  }
  double prev = 1e300;
  for (double gs : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double q = select_Q(k, 1.0, gs).Q0;
    CHECK(q <= prev);
    prev = q;
  }
  prev = 1e300;
  for (double s : {0.25, 0.5, 1.0, 2.0}) {
    const double q = select_Q(k, s, k.gamma_star).Q0;
    CHECK(q <= prev);
    prev = q;
  }
  CHECK_THROWS_AS(select_Q(k, 1.0, k.gamma_star, 8.0), InfeasibleError);
}

TEST_CASE("conditions propagate along the schedule") {
  for (int n : {2, 3}) {
    auto k = constants(n, n == 3 ? 0.1 : 0.0, 0.2, 0.4);
    auto t = select_Q(k, 1.0, k.gamma_star);
    Schedule sch{k, t.eps_star, t.Q0, 1.0};
    double prev3 = 1e300;
    const double first = check_conditions(sch, 0).lhs[0];
    for (int m = 0; m <= 64; ++m) {
      auto r = check_conditions(sch, m);
      CHECK(r.ok);
      CHECK(r.lhs[0] == doctest::Approx(first).epsilon(1e-12));
      CHECK(r.lhs[2] <= prev3);
      prev3 = r.lhs[2];
    }
    Schedule over{k, 2 * t.eps_star, t.Q0, 1.0};
    auto r = check_conditions(over, 0);
    CHECK_FALSE(r.pass[0]);
  }
}

TEST_CASE("schedule identities") {
  for (int n : {2, 3, 4}) {
    for (double tau : {0.0, 0.1, 0.37}) {
      auto k = constants(n, tau, 0.3, 0.3);
      Schedule sch{k, 1e-6, 32.0, 1.0};
      // Q_m^n overflows for large a; compare in log form
      auto inv = [&](int m) { return n * std::log(sch.Q_m(m)) + std::log(sch.eps_m(m)); };
      const double lin0 = std::pow(sch.Q_m(0), 1 / k.a) * sch.sigma_m(0);
      for (int m = 0; m <= 64; ++m) {
        // eps_m leaves the normal range for large b; the identities are about binary64 normals
        if (sch.eps_m(m + 1) < std::numeric_limits<double>::min()) break;
        CHECK(std::abs(std::expm1(inv(m) - inv(0))) <= 1e-12);
        CHECK(std::pow(sch.Q_m(m), 1 / k.a) * sch.sigma_m(m) == doctest::Approx(std::ldexp(lin0, m)).epsilon(1e-12));
        CHECK(sch.s_m(m) == 0.5 + std::ldexp(1.0, -m - 1));
        // past 2^-53 the excess over s/2 is below one ulp of s/2
        if (m <= 52) CHECK(sch.s_m(m) > 0.5);
        CHECK(sch.s_m(m + 1) == sch.s_m(m) - sch.sigma_m(m));
        const double lhs = k.d * sch.eps_m(m + 1), rhs = k.c * sch.eps_m(m);
        const double top = std::max(lhs, rhs);
        CHECK(std::abs(lhs - rhs) <= std::nextafter(top, 1e300) - top);
      }
    }
  }
}

TEST_CASE("run: zero and constant perturbations") {
  const auto g = kt::golden();
  auto z = run(g, FourierField(2, 1.0, 2), 1.0);
  CHECK(z.phi.is_identity());
  CHECK(z.beta == std::vector<double>{0.0, 0.0});
  CHECK(z.trace.size() <= 1);

  const double c[] = {1e-6, -2e-6};
  auto r = run(g, FourierField::constant(c, 1.0), 1.0);
  CHECK(r.beta[0] == doctest::Approx(-1e-6).epsilon(1e-14));
  CHECK(r.beta[1] == doctest::Approx(2e-6).epsilon(1e-14));
  for (const auto& L : r.phi.layers()) CHECK(L.displacement.is_zero());
  CHECK(r.P_final.is_zero());
}

TEST_CASE("run refuses above the threshold unless forced") {
  const auto g = kt::golden();
  std::mt19937_64 rng(71);
  auto P = kt::random_field(rng, 2, 2, 1.0, 1.0);
  P *= 1e-3 / norm(P, 1.0);
  CHECK_THROWS_AS(run(g, P, 1.0), ThresholdError);
}

TEST_CASE("run: geometric contraction and estimates on the golden mean") {
  const auto g = kt::golden();
  std::mt19937_64 rng(72);
  auto P = kt::random_field(rng, 2, 4, 1.0, 1.0);
  P *= 1e-6 / norm(P, 1.0);
  RunOptions o;
  o.tol = 0;
  o.max_steps = 6;
  auto r = run(g, P, 1.0, o);
  CHECK(r.trace.size() == 6);
  const double b = r.schedule.consts.b;
  for (const auto& t : r.trace) {
    CHECK(t.norm_P <= std::pow(b, -t.m) * 1e-6 * (1 + 1e-12));
    CHECK(t.ratio <= 1 / b);
    CHECK(t.s == r.schedule.s_m(t.m));
  }
  double bn = 0;
  for (double v : r.beta) bn = std::max(bn, std::abs(v));
  CHECK(bn <= r.schedule.consts.d * 1e-6);
  CHECK(r.displacement_sum <= r.displacement_bound);
  auto rep = conjugacy_residual(g, P, r.phi, r.beta, 16);
  CHECK(rep.sup_residual <= 1e-10);
}

TEST_CASE("materialize") {
  NearIdentityEmbedding id(2);
  CHECK(materialize(id, 4, 0.5).is_zero());

  std::mt19937_64 rng(73);
  auto u = kt::random_field(rng, 2, 3, 1.0, 1e-3);
  NearIdentityEmbedding one(2);
  one.compose_right(u, 1.0, 1.0);
  auto m1 = materialize(one, 3, 1.0);
  CHECK(kt::max_coeff_diff(m1, u) <= 1e-12);

  auto u2 = kt::random_field(rng, 2, 2, 1.0, 1e-3);
  NearIdentityEmbedding two(2);
  two.compose_right(u, 1.0, 1.0);
  two.compose_right(u2, 1.0, 1.0);
  auto m2 = materialize(two, 12, 0.5);
  for (int p = 0; p < 100; ++p) {
    auto th = kt::random_point(rng, 2);
    // pointwise composition: theta + u2(theta) + u(theta + u2(theta))
    const auto a = eval(u2, std::span<const double>(th));
    std::vector<double> mid{th[0] + a[0], th[1] + a[1]};
    const auto b = eval(u, std::span<const double>(mid));
    const auto got = eval(m2, std::span<const double>(th));
    for (int j = 0; j < 2; ++j) CHECK(std::abs(got[j] - (a[j] + b[j])) <= 1e-10);
  }

  auto rough = kt::random_field(rng, 2, 8, 0.05, 0.2);
  NearIdentityEmbedding bad(2);
  bad.compose_right(rough, 0.05, 0.05);
  bad.compose_right(rough, 0.05, 0.05);
  CHECK_THROWS_AS(materialize(bad, 2, 0.01), ResolutionError);
}
