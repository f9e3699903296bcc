// kam: command-line front end.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kam/averaging.hpp"
#include "kam/diophantine.hpp"
#include "kam/errors.hpp"
#include "kam/generate.hpp"
#include "kam/io.hpp"
#include "kam/kam_constants.hpp"
#include "kam/oracle.hpp"
#include "kam/scheduler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kam;

namespace {

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ParameterError("cannot write " + path.string());
  os << text;
}

json ledger_json(const SeriesLedger& l) {
  return {{"terms", l.terms}, {"remainder_bound", l.remainder_bound}, {"truncated_norm", l.truncated_norm}};
}

json budget_json(const StepBudget& b) {
  return {{"eps", b.eps},
          {"q_eps", b.q_eps},
          {"tail_term", b.tail_term},
          {"bracket_term", b.bracket_term},
          {"plus_bound", b.plus_bound},
          {"tail_measured", b.tail_measured},
          {"bracket_measured", b.bracket_measured},
          {"conditions_ok", b.conditions_ok},
          {"condition_lhs", b.condition_lhs},
          {"pullback", ledger_json(b.pullback)},
          {"flow", ledger_json(b.flow)}};
}

json constants_json(const KamConstants& k) {
  return {{"n", k.n}, {"tau", k.tau}, {"a", k.a}, {"b", k.b}, {"c", k.c}, {"d", k.d},
          {"gamma_star", k.gamma_star}, {"kappa", k.kappa}, {"mid_constant", k.mid_constant}};
}

json trace_json(const RunResult& r) {
  json steps = json::array();
  for (const auto& t : r.trace) {
    steps.push_back({{"m", t.m},
                     {"q", t.q},
                     {"p", t.p},
                     {"Q", t.Q},
                     {"sigma", t.sigma},
                     {"s", t.s},
                     {"eps", t.eps},
                     {"norm_P", t.norm_P},
                     {"P_avg", t.P_avg},
                     {"delta", t.delta},
                     {"norm_V", t.norm_V},
                     {"norm_phi", t.norm_phi},
                     {"norm_P_next", t.norm_P_next},
                     {"ratio", t.ratio},
                     {"budget", budget_json(t.budget)},
                     {"conditions",
                      {{"ok", t.conditions.ok},
                       {"pass", t.conditions.pass},
                       {"lhs", t.conditions.lhs},
                       {"decay_ratio", t.conditions.ratio}}}});
  }
  return {{"n", r.schedule.consts.n},
          {"s", r.schedule.s},
          {"eps", r.schedule.eps},
          {"Q0", r.threshold.Q0},
          {"eps_star", r.threshold.eps_star},
          {"constants", constants_json(r.schedule.consts)},
          {"steps", steps},
          {"beta", r.beta},
          {"displacement_sum", r.displacement_sum},
          {"displacement_bound", r.displacement_bound},
          {"beta_tail_bound", r.beta_tail_bound},
          {"warnings", r.warnings}};
}

std::vector<double> read_beta(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParameterError("cannot open " + path);
  std::vector<double> beta;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      beta.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("bad beta entry '" + tok + "'", 1);
    }
  }
  return beta;
}

std::string beta_text(const std::vector<double>& beta) {
  std::string out;
  for (std::size_t i = 0; i < beta.size(); ++i) out += (i ? " " : "") + g17(beta[i]);
  return out + "\n";
}

json residual_json(const ResidualReport& rep, double orbit) {
  json j = {{"sup_residual", rep.sup_residual}, {"grid", rep.grid}, {"jacobian_min_det", rep.jacobian_min_det}};
  j["orbit_deviation"] = orbit >= 0.0 ? json(orbit) : json(nullptr);
  return j;
}

// A rational rendering of c = 1/(b-1) and d = b/(b-1) when b is an integer.
std::string fraction(double num, double den) {
  if (den == std::round(den) && num == std::round(num) && den < 1e15)
    return g17(num) + "/" + g17(den);
  return g17(num / den);
}

// Flat key=value files belong to the run subcommand.
class RunConfig : public CLI::ConfigINI {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigINI::from_config(input);
    for (auto& item : items)
      if (item.parents.empty()) item.parents = {"run"};
    return items;
  }
};

struct RunFlags {
  std::string freq, pert, out = ".";
  double s = 0.0;
  double tol = -1.0;
  int max_steps = 64;
  bool force = false;
  int kmax_cap = 32;
  int phi_kmax = 16;
  int grid = 32;
  double orbit_T = 100.0;
  int orbit_samples = 100;
};

struct VerifyFlags {
  std::string freq, pert, phi, beta, out = ".";
  int grid = 32;
  double orbit_T = 100.0;
  int orbit_samples = 100;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral KAM iteration on the n-torus via periodic approximation"};
  app.require_subcommand(1);

  // approx
  std::string freq_path;
  double Q = 0.0;
  bool as_json = false;
  auto* approx = app.add_subcommand("approx", "Dirichlet approximation q, p of alpha~ at parameter Q");
  approx->add_option("--freq", freq_path, "frequency file")->required()->check(CLI::ExistingFile);
  approx->add_option("--Q", Q, "Dirichlet parameter (>= 1)")->required();
  approx->add_flag("--json", as_json, "print JSON");

  // psi
  auto* psi_cmd = app.add_subcommand("psi", "max |k . alpha|^-1 over 0 < |k| <= Q");
  psi_cmd->add_option("--freq", freq_path, "frequency file")->required()->check(CLI::ExistingFile);
  psi_cmd->add_option("--Q", Q, "box radius")->required();
  psi_cmd->add_flag("--json", as_json, "print JSON");

  // constants
  int n = 2;
  double tau = 0.0, gamma = 0.0, gammabar = 0.0, s_const = 1.0;
  auto* const_cmd = app.add_subcommand("constants", "a, b, c, d, gamma*, Q0 and eps_*");
  const_cmd->add_option("--n", n, "dimension")->required();
  const_cmd->add_option("--tau", tau, "Diophantine exponent")->required();
  const_cmd->add_option("--gamma", gamma, "linear constant")->required();
  const_cmd->add_option("--gammabar", gammabar, "simultaneous constant")->required();
  const_cmd->add_option("--s", s_const, "analyticity width used for Q0")->capture_default_str();
  const_cmd->add_flag("--json", as_json, "print JSON");

  // step
  std::string pert_path, out_dir = ".";
  double sigma = 0.0, Q_step = 0.0;
  int kmax_cap = 32;
  auto* step_cmd = app.add_subcommand("step", "One averaging step: P -> P^+, Phi_1");
  step_cmd->add_option("--freq", freq_path, "frequency file")->required()->check(CLI::ExistingFile);
  step_cmd->add_option("--pert", pert_path, "perturbation field file")->required()->check(CLI::ExistingFile);
  step_cmd->add_option("--Q", Q_step, "Dirichlet parameter (default: selected Q0)");
  step_cmd->add_option("--sigma", sigma, "width loss (default s/4)");
  step_cmd->add_option("--kmax-cap", kmax_cap, "truncation radius")->capture_default_str();
  step_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();

  // run
  RunFlags rf;
  auto* run_cmd = app.add_subcommand("run", "Full iteration: beta and Phi with Phi^*(X_alpha + P + X_beta) = X_alpha");
  app.set_config("--config", "", "key=value file for run; keys are the long flag names");
  app.config_formatter(std::make_shared<RunConfig>());
  run_cmd->fallthrough();
  run_cmd->add_option("--freq", rf.freq, "frequency file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--pert", rf.pert, "perturbation field file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--s", rf.s, "analyticity width (default: width of P)");
  run_cmd->add_option("--tol", rf.tol, "stop when |P_m| <= tol (default 1e-14 eps; 0 runs to max-steps)");
  run_cmd->add_option("--max-steps", rf.max_steps, "step limit")->capture_default_str();
  run_cmd->add_option("--out", rf.out, "output directory")->capture_default_str();
  run_cmd->add_flag("--force", rf.force, "proceed above eps_*");
  run_cmd->add_option("--kmax-cap", rf.kmax_cap, "truncation radius")->capture_default_str();
  run_cmd->add_option("--phi-kmax", rf.phi_kmax, "modes kept in phi.field")->capture_default_str();
  run_cmd->add_option("--grid", rf.grid, "residual grid per axis")->capture_default_str();
  run_cmd->add_option("--orbit-T", rf.orbit_T, "orbit horizon (0 skips)")->capture_default_str();
  run_cmd->add_option("--orbit-samples", rf.orbit_samples, "orbit comparison times")->capture_default_str();

  // verify
  VerifyFlags vf;
  auto* verify_cmd = app.add_subcommand("verify", "Conjugacy residual of a materialized Phi and beta");
  verify_cmd->add_option("--freq", vf.freq, "frequency file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--pert", vf.pert, "perturbation field file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--phi", vf.phi, "displacement field Phi - Id")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--beta", vf.beta, "beta file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--grid", vf.grid, "grid per axis")->capture_default_str();
  verify_cmd->add_option("--orbit-T", vf.orbit_T, "orbit horizon (0 skips)")->capture_default_str();
  verify_cmd->add_option("--orbit-samples", vf.orbit_samples, "orbit comparison times")->capture_default_str();
  verify_cmd->add_option("--out", vf.out, "output directory")->capture_default_str();

  // gen
  int gen_n = 2, modes = 4;
  double gen_s = 1.0, gen_eps = 1e-6;
  std::uint64_t seed = 0;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Seeded random real trigonometric perturbation with |P|_s = eps");
  gen_cmd->add_option("--n", gen_n, "dimension")->required();
  gen_cmd->add_option("--s", gen_s, "width")->required();
  gen_cmd->add_option("--eps", gen_eps, "target norm")->required();
  gen_cmd->add_option("--modes", modes, "mode radius kmax (|k|_inf <= modes)")->required();
  gen_cmd->add_option("--seed", seed, "RNG seed")->required();
  gen_cmd->add_option("--out", gen_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*approx) {
      const auto alpha = load_frequency(freq_path);
      const auto ra = dirichlet_approx(alpha, Q);
      const int dim = alpha.dim();
      const double qmax = std::floor(std::pow(Q, dim - 1) * (1.0 + 1e-15));
      double omega_err = 0.0;
      for (double v : ra.varpi) omega_err = std::max(omega_err, std::abs(v));
      const bool dirichlet_ok = ra.residual <= 1.0 / Q && ra.q >= 1 && static_cast<double>(ra.q) <= qmax;
      const bool omega_ok = omega_err <= 1.0 / (static_cast<double>(ra.q) * Q) * (1.0 + 1e-12);
      const auto rb = resonance_bound(alpha, Q);
      double lower = 0.0;
      bool lower_ok = true;
      std::string lower_msg;
      try {
        lower = lower_denominator_bound(alpha, ra);
      } catch (const ConstantsInconsistencyError& e) {
        lower_ok = false;
        lower_msg = e.what();
      }
      if (as_json) {
        json j = {{"q", ra.q},          {"p", ra.p},          {"Q", Q},
                  {"residual", ra.residual}, {"varpi", ra.varpi}, {"dirichlet_ok", dirichlet_ok},
                  {"omega_error_ok", omega_ok}, {"gamma_star", rb.gamma_star}, {"resonance_cutoff", rb.cutoff},
                  {"lower_denominator_ok", lower_ok}};
        if (lower_ok) j["lower_denominator_bound"] = lower;
        std::cout << dump_json(j) << "\n";
      } else {
        std::cout << "q = " << ra.q << "\np =";
        for (auto v : ra.p) std::cout << " " << v;
        std::cout << "\n|q alpha~ - p| = " << g17(ra.residual) << "  (<= 1/Q = " << g17(1.0 / Q) << ": "
                  << (dirichlet_ok ? "ok" : "FAIL") << ")\n"
                  << "1 <= q <= Q^(n-1) = " << g17(qmax) << ": " << (dirichlet_ok ? "ok" : "FAIL") << "\n"
                  << "|alpha - omega| = " << g17(omega_err) << "  (<= 1/(qQ): " << (omega_ok ? "ok" : "FAIL")
                  << ")\n"
                  << "resonant modes have |k| >= gamma* Q^(1/a) = " << g17(rb.cutoff) << "\n";
        if (lower_ok)
          std::cout << "q >= (gammabar Q)^((n-1)/a) = " << g17(lower) << ": ok\n";
        else
          std::cout << lower_msg << "\n";
      }
      return dirichlet_ok && omega_ok && lower_ok ? 0 : 1;
    }

    if (*psi_cmd) {
      const auto alpha = load_frequency(freq_path);
      const auto r = psi(alpha, Q);
      if (as_json) {
        std::cout << dump_json({{"psi", r.value}, {"argmax", r.argmax}, {"Q", Q}}) << "\n";
      } else {
        std::cout << "Psi(Q) = " << g17(r.value) << "\nargmax k =";
        for (auto v : r.argmax) std::cout << " " << v;
        std::cout << "\n";
      }
      return 0;
    }

    if (*const_cmd) {
      const auto k = constants(n, tau, gamma, gammabar);
      const auto th = select_Q(k, s_const, k.gamma_star);
      if (as_json) {
        json j = constants_json(k);
        j["Q0"] = th.Q0;
        j["eps_star"] = th.eps_star;
        j["s"] = s_const;
        std::cout << dump_json(j) << "\n";
      } else {
        std::cout << "a = " << g17(k.a) << "\nb = " << g17(k.b) << "\nc = " << fraction(1.0, k.b - 1.0)
                  << "  (" << g17(k.c) << ")\nd = " << fraction(k.b, k.b - 1.0) << "  (" << g17(k.d) << ")\n"
                  << "gamma* = " << g17(k.gamma_star) << "\nkappa = " << g17(k.kappa)
                  << "\nmiddle condition constant = " << g17(k.mid_constant) << "\nQ0 = " << g17(th.Q0)
                  << "  (s = " << g17(s_const) << ")\neps_* = " << g17(th.eps_star) << "\n";
      }
      return 0;
    }

    if (*step_cmd) {
      const auto alpha = load_frequency(freq_path);
      const auto P = load_field(pert_path);
      const double s = P.width();
      const auto k = constants(alpha.dim(), alpha.tau, alpha.gamma, alpha.gamma_bar);
      const double sig = sigma > 0.0 ? sigma : 0.25 * s;
      const double Qs = Q_step > 0.0 ? Q_step : select_Q(k, s, k.gamma_star).Q0;
      AveragingOptions opts;
      opts.kmax_cap = kmax_cap;
      const FourierField S(alpha.dim(), s, 0);
      const auto st = averaging_step(alpha, S, P, Qs, sig, k, opts);
      fs::create_directories(out_dir);
      save_field((fs::path(out_dir) / "P_plus.field").string(), st.P_plus);
      save_field((fs::path(out_dir) / "phi1.field").string(), st.phi1_displacement);
      json j = {{"Q", Qs},
                {"sigma", sig},
                {"s", s},
                {"q", st.approx.q},
                {"p", st.approx.p},
                {"P_avg", st.P_avg},
                {"norm_V", st.norm_V},
                {"norm_phi1", st.norm_phi1},
                {"norm_P_plus", st.norm_P_plus},
                {"phi1_bound", std::pow(Qs, alpha.dim() - 1) * st.budget.eps},
                {"P_plus_bound", st.budget.eps / k.b},
                {"budget", budget_json(st.budget)}};
      write_text(fs::path(out_dir) / "budget.json", dump_json(j) + "\n");
      std::cout << "q = " << st.approx.q << "  |P|_s = " << g17(st.budget.eps) << "\n|P^+|_{s-sigma} = "
                << g17(st.norm_P_plus) << "  (<= eps/b = " << g17(st.budget.eps / k.b) << ")\n|Phi_1 - Id| = "
                << g17(st.norm_phi1) << "  (<= Q^(n-1) eps = " << g17(std::pow(Qs, alpha.dim() - 1) * st.budget.eps)
                << ")\n";
      return 0;
    }

    if (*run_cmd) {
      const auto alpha = load_frequency(rf.freq);
      const auto P = load_field(rf.pert);
      const double s = rf.s > 0.0 ? rf.s : P.width();
      RunOptions opts;
      opts.tol = rf.tol;
      opts.max_steps = rf.max_steps;
      opts.force = rf.force;
      opts.kmax_cap = rf.kmax_cap;
      const auto r = run(alpha, P, s, opts);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      fs::create_directories(rf.out);
      const fs::path out(rf.out);
      write_text(out / "trace.json", dump_json(trace_json(r)) + "\n");
      save_field((out / "phi.field").string(), materialize(r.phi, rf.phi_kmax, 0.5 * s));
      write_text(out / "beta.txt", beta_text(r.beta));
      const auto rep = conjugacy_residual(alpha, P, r.phi, r.beta, rf.grid);
      const double orbit =
          rf.orbit_T > 0.0 ? orbit_shadowing_check(alpha, P, r.phi, r.beta, rf.orbit_T, rf.orbit_samples) : -1.0;
      write_text(out / "residual.json", dump_json(residual_json(rep, orbit)) + "\n");
      std::cout << "steps = " << r.trace.size() << "  Q0 = " << g17(r.threshold.Q0) << "  eps = " << g17(r.schedule.eps)
                << "  eps_* = " << g17(r.threshold.eps_star) << "\nbeta = " << beta_text(r.beta)
                << "sup residual = " << g17(rep.sup_residual);
      if (orbit >= 0.0) std::cout << "  orbit deviation = " << g17(orbit);
      std::cout << "\n";
      return 0;
    }

    if (*verify_cmd) {
      const auto alpha = load_frequency(vf.freq);
      const auto P = load_field(vf.pert);
      const auto u = load_field(vf.phi);
      const auto beta = read_beta(vf.beta);
      if (static_cast<int>(beta.size()) != alpha.dim()) throw DimensionError("beta has the wrong length");
      NearIdentityEmbedding phi(alpha.dim());
      if (!u.is_zero()) phi.compose_right(u, u.width(), P.width());
      const auto rep = conjugacy_residual(alpha, P, phi, beta, vf.grid);
      const double orbit =
          vf.orbit_T > 0.0 ? orbit_shadowing_check(alpha, P, phi, beta, vf.orbit_T, vf.orbit_samples) : -1.0;
      fs::create_directories(vf.out);
      write_text(fs::path(vf.out) / "residual.json", dump_json(residual_json(rep, orbit)) + "\n");
      std::cout << "sup residual = " << g17(rep.sup_residual) << "  jacobian min det = " << g17(rep.jacobian_min_det);
      if (orbit >= 0.0) std::cout << "  orbit deviation = " << g17(orbit);
      std::cout << "\n";
      return 0;
    }

    if (*gen_cmd) {
      const auto f = random_field(gen_n, gen_s, gen_eps, modes, seed);
      if (gen_out.empty())
        write_field(std::cout, f);
      else
        save_field(gen_out, f);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
