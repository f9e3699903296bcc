#include "kam/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kam/errors.hpp"

namespace kam {

// Recursive division keeps d eps_{m+1} = c eps_m to an ulp.
double Schedule::eps_m(int m) const {
  double e = eps;
  for (int i = 0; i < m; ++i) e /= consts.b;
  return e;
}
double Schedule::Q_m(int m) const { return Q * std::pow(4.0, consts.a * m); }
double Schedule::sigma_m(int m) const { return std::ldexp(s, -m - 2); }
double Schedule::s_m(int m) const { return 0.5 * s + std::ldexp(s, -m - 1); }

namespace {

double decay_ratio(const KamConstants& k, double Q, double sigma, double gamma_star) {
  return std::pow(4.0, k.a) * 0.5 * std::exp(-kTwoPi * gamma_star * std::pow(Q, 1.0 / k.a) * sigma);
}

// Solves A x = b in place (n small), partial pivoting.
std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
    if (A[piv * n + c] == 0.0) throw EmbeddingError("frequency correction matrix is singular");
    if (piv != c) {
      for (int l = 0; l < n; ++l) std::swap(A[c * n + l], A[piv * n + l]);
      std::swap(b[c], b[piv]);
    }
    for (int r = c + 1; r < n; ++r) {
      const double f = A[r * n + c] / A[c * n + c];
      if (f == 0.0) continue;
      for (int l = c; l < n; ++l) A[r * n + l] -= f * A[c * n + l];
      b[r] -= f * b[c];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int l = r + 1; l < n; ++l) acc -= A[r * n + l] * b[l];
    b[r] = acc / A[r * n + r];
  }
  return b;
}

[[noreturn]] void rethrow_at_step(int m) {
  const std::string pre = "step " + std::to_string(m) + ": ";
  try {
    throw;
  } catch (const ContractionError& e) {
    throw ContractionError(pre + e.what(), e.ratio());
  } catch (const StepConditionError& e) {
    throw StepConditionError(pre + e.what());
  } catch (const StepSizeError& e) {
    throw StepSizeError(pre + e.what());
  } catch (const DomainError& e) {
    throw DomainError(pre + e.what());
  } catch (const InternalError& e) {
    throw InternalError(pre + e.what());
  } catch (const EmbeddingError& e) {
    throw EmbeddingError(pre + e.what());
  } catch (const ParameterError& e) {
    throw ParameterError(pre + e.what());
  }
}

// Fourier coefficients |k|_inf <= kmax of f sampled on an N^n grid.
FourierField grid_transform(const NearIdentityEmbedding& phi, int n, int N, int kmax, double width) {
  const int M = 2 * kmax + 1;
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= N;

  std::vector<std::vector<Complex>> comp(n, std::vector<Complex>(total));
  std::vector<double> theta(n);
  std::vector<int> digit(n, 0);
  for (std::size_t pt = 0; pt < total; ++pt) {
    for (int i = 0; i < n; ++i) theta[i] = static_cast<double>(digit[i]) / N;
    const auto u = phi.displacement(theta);
    for (int j = 0; j < n; ++j) comp[j][pt] = u[j];
    for (int i = 0; i < n; ++i) {
      if (++digit[i] < N) break;
      digit[i] = 0;
    }
  }

  // twiddle[(k + kmax) * N + x] = exp(-2 pi i k x / N), reduced mod N for accuracy.
  std::vector<Complex> twiddle(static_cast<std::size_t>(M) * N);
  for (int k = -kmax; k <= kmax; ++k)
    for (int x = 0; x < N; ++x) {
      const long long r = ((static_cast<long long>(k) * x) % N + N) % N;
      twiddle[static_cast<std::size_t>(k + kmax) * N + x] = std::polar(1.0, -kTwoPi * r / N);
    }

  std::vector<std::size_t> dims(n, N);
  for (int axis = 0; axis < n; ++axis) {
    std::size_t inner = 1, outer = 1;
    for (int i = 0; i < axis; ++i) inner *= dims[i];
    for (int i = axis + 1; i < n; ++i) outer *= dims[i];
    for (int j = 0; j < n; ++j) {
      const auto& in = comp[j];
      std::vector<Complex> out(inner * M * outer);
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i)
          for (int kk = 0; kk < M; ++kk) {
            Complex acc{};
            const Complex* tw = &twiddle[static_cast<std::size_t>(kk) * N];
            for (int x = 0; x < N; ++x) acc += in[(o * N + x) * inner + i] * tw[x];
            out[(o * M + kk) * inner + i] = acc / static_cast<double>(N);
          }
      comp[j] = std::move(out);
    }
    dims[axis] = M;
  }

  FourierField f(n, width, kmax);
  auto data = f.data();
  const std::size_t count = f.mode_count();
  for (std::size_t idx = 0; idx < count; ++idx)
    for (int j = 0; j < n; ++j) data[idx * n + j] = comp[j][idx];
  // Real samples give conjugate-symmetric coefficients; pin it exactly.
  for (std::size_t idx = 0; idx < count / 2; ++idx)
    for (int j = 0; j < n; ++j) data[(count - 1 - idx) * n + j] = std::conj(data[idx * n + j]);
  for (int j = 0; j < n; ++j) data[f.zero_index() * n + j] = data[f.zero_index() * n + j].real();
  return f;
}

}  // namespace

ConditionReport check_conditions(const Schedule& schedule, int m) {
  ConditionReport r;
  const double Q = schedule.Q_m(m);
  const double sigma = schedule.sigma_m(m);
  r.lhs = step_condition_lhs(schedule.consts, Q, sigma, schedule.eps_m(m));
  r.ok = true;
  for (int i = 0; i < 3; ++i) {
    r.pass[i] = r.lhs[i] <= 1.0 + kConditionSlack;
    r.ok = r.ok && r.pass[i];
  }
  r.ratio = decay_ratio(schedule.consts, Q, sigma, schedule.consts.gamma_star);
  return r;
}

Threshold select_Q(const KamConstants& consts, double s, double gamma_star, double q_cap) {
  if (!(s > 0.0)) throw ParameterError("select_Q: s must be > 0");
  if (!(gamma_star > 0.0)) throw ParameterError("select_Q: gamma_star must be > 0");
  const double sigma = 0.25 * s;
  KamConstants k = consts;
  k.gamma_star = gamma_star;
  std::string binding;
  for (double Q = 1.0; Q <= q_cap; Q *= 2.0) {
    const auto lhs = step_condition_lhs(k, Q, sigma, 0.0);
    const double ratio = decay_ratio(k, Q, sigma, gamma_star);
    if (lhs[1] <= 1.0 && lhs[2] <= 1.0 && ratio <= 1.0) return {Q, std::pow(Q, -consts.n)};
    std::ostringstream b;
    if (lhs[1] > 1.0) b << "middle condition mid/(Q sigma) = " << lhs[1];
    else if (lhs[2] > 1.0) b << "tail condition Q sigma exp(-2 pi gamma* Q^(1/a) sigma) = " << lhs[2];
    else b << "ratio condition M_1/M_0 = " << ratio;
    binding = b.str();
  }
  throw InfeasibleError("select_Q: no Q0 <= " + std::to_string(q_cap) + " works; binding: " + binding);
}

RunResult run(const FrequencyVector& alpha, const FourierField& P, double s, const RunOptions& opts) {
  alpha.validate();
  const int n = alpha.dim();
  if (P.dim() != n) throw DimensionError("run: perturbation and frequency dimensions differ");
  if (!(s > 0.0) || s > P.width()) throw ParameterError("run: need 0 < s <= width of P");
  if (opts.max_steps < 0) throw ParameterError("run: max_steps must be >= 0");

  RunResult res;
  const KamConstants consts = constants(n, alpha.tau, alpha.gamma, alpha.gamma_bar);
  res.threshold = select_Q(consts, s, consts.gamma_star);
  const double eps = norm(P, s);
  res.schedule = Schedule{consts, eps, res.threshold.Q0, s};
  res.phi = NearIdentityEmbedding(n);
  res.beta.assign(n, 0.0);

  if (eps > res.threshold.eps_star) {
    std::ostringstream msg;
    msg << "|P|_s = " << eps << " exceeds eps_* = " << res.threshold.eps_star << " (Q0 = " << res.threshold.Q0 << ")";
    if (!opts.force) throw ThresholdError("run: " + msg.str() + "; pass --force to proceed");
    res.warnings.push_back(msg.str() + "; forced, estimates are not enforced");
  }

  const Schedule& sched = res.schedule;
  const double tol = opts.tol < 0.0 ? 1e-14 * eps : opts.tol;
  FourierField Pm = P.with_width(s);
  std::vector<FourierField> F(n, FourierField(n, s, 0));  // (Phi^m)^* e_j - e_j

  int m = 0;
  for (; m < opts.max_steps; ++m) {
    const double sm = sched.s_m(m);
    const double sigma = sched.sigma_m(m);
    const double Qm = sched.Q_m(m);
    const double em = sched.eps_m(m);
    const double nP = norm(Pm, sm);
    if (eps == 0.0 || (tol > 0.0 && nP <= tol)) break;
    if (!opts.force && nP > em * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "step " << m << ": |P_m| = " << nP << " exceeds eps_m = " << em;
      throw ContractionError(msg.str(), nP / em);
    }

    StepTrace tr;
    tr.m = m;
    tr.Q = Qm;
    tr.sigma = sigma;
    tr.s = sm;
    tr.eps = em;
    tr.norm_P = nP;
    tr.P_avg = Pm.mean();
    tr.conditions = check_conditions(sched, m);

    try {
      // (I + mean F) delta = -[P_m], so the pulled-back shift cancels the mean.
      std::vector<double> A(n * n, 0.0);
      for (int j = 0; j < n; ++j) {
        const auto mf = F[j].mean();
        for (int i = 0; i < n; ++i) A[i * n + j] = (i == j ? 1.0 : 0.0) + mf[i];
      }
      std::vector<double> rhs(n);
      for (int i = 0; i < n; ++i) rhs[i] = -tr.P_avg[i];
      const auto delta = solve_dense(A, rhs);

      FourierField Phat = Pm;
      for (int j = 0; j < n; ++j)
        if (delta[j] != 0.0 && !F[j].is_zero()) Phat += delta[j] * F[j];
      Phat.set_width(sm);

      AveragingOptions aopts;
      aopts.kmax_cap = opts.kmax_cap;
      aopts.series_tol = opts.series_tol;
      aopts.prune_tol = opts.prune_tol;
      aopts.eps = opts.force ? std::max(em, norm(Phat, sm)) : em;
      aopts.check_estimates = !opts.force;
      aopts.check_conditions = !opts.force;
      const auto a = alpha.alpha();
      CounterTermResult ct = counter_term_step(alpha, Phat, a, Qm, sigma, consts, aopts);
      StepResult& st = ct.step;

      tr.delta.resize(n);
      const auto phat_avg = Phat.mean();
      for (int j = 0; j < n; ++j) {
        tr.delta[j] = -phat_avg[j];
        res.beta[j] += tr.delta[j];
      }
      if (!Phat.is_zero()) {
        tr.q = st.approx.q;
        tr.p = st.approx.p;
      }
      tr.norm_V = st.norm_V;
      tr.norm_phi = st.norm_phi1;
      tr.budget = st.budget;

      const double tol_series = opts.series_tol * em;
      if (!st.V.is_zero()) {
        for (int j = 0; j < n; ++j) {
          FourierField e = F[j];
          std::vector<double> unit(n, 0.0);
          unit[j] = 1.0;
          e.add_constant(unit);
          e.set_width(sm);
          FourierField pulled = lie_pullback(e, st.V, sm, sigma, tol_series, nullptr, opts.kmax_cap, opts.prune_tol * em);
          unit[j] = -1.0;
          pulled.add_constant(unit);
          F[j] = std::move(pulled);
        }
        res.phi.compose_right(st.phi1_displacement, sm - sigma, sm);
      } else {
        for (auto& f : F) f.set_width(sm - sigma);
      }
      res.displacement_sum += st.norm_phi1;

      Pm = std::move(st.P_plus);
      Pm.set_width(sm - sigma);
      tr.norm_P_next = st.norm_P_plus;
      tr.ratio = st.norm_P_plus / em;
      const double next = sched.eps_m(m + 1);
      if (!opts.force && tr.norm_P_next > next * (1.0 + 1e-12))
        throw ContractionError("|P_{m+1}| exceeds eps_{m+1}", tr.norm_P_next / next);
    } catch (const Error&) {
      rethrow_at_step(m);
    }
    res.trace.push_back(std::move(tr));
  }

  res.P_final = Pm;
  const double b = consts.b;
  res.displacement_bound = std::pow(sched.Q, n - 1) * eps / (1.0 - std::pow(b, -1.0 / n));
  res.beta_tail_bound = sched.eps_m(m) * b / (b - 1.0);
  if (!opts.force) {
    if (res.displacement_sum > res.displacement_bound)
      throw ContractionError("run: accumulated displacement exceeds (1 - b^(-1/n))^-1 Q^(n-1) eps",
                             res.displacement_sum / res.displacement_bound);
    const double nb = norm(res.beta);
    if (nb > consts.d * eps * (1.0 + 1e-12))
      throw ContractionError("run: |beta| exceeds d eps", nb / (consts.d * eps));
  }
  return res;
}

FourierField materialize(const NearIdentityEmbedding& phi, int kmax, double width) {
  if (kmax < 1) throw ParameterError("materialize: kmax must be >= 1");
  if (!(width > 0.0)) throw ParameterError("materialize: width must be > 0");
  const int n = phi.dim();
  if (n < 1) throw DimensionError("materialize: embedding has no dimension");
  if (phi.is_identity()) return FourierField(n, width, kmax);
  const FourierField coarse = grid_transform(phi, n, 4 * kmax, kmax, width);
  const FourierField fine = grid_transform(phi, n, 8 * kmax, kmax, width);
  const double diff = (coarse - fine).max_abs();
  if (diff > 1e-10) {
    std::ostringstream msg;
    msg << "materialize: aliasing check failed, coefficients move by " << diff << " when the grid is doubled";
    throw ResolutionError(msg.str());
  }
  return fine;
}

}  // namespace kam
