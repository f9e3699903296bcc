#include "kam/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "kam/errors.hpp"

namespace kam {

namespace {

constexpr Complex kTwoPiI{0.0, kTwoPi};

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// A nonzero mode of a field, with its offset in some target box.
struct Term {
  std::size_t idx;
  long long offset;
  const int* k;
};

struct NonzeroModes {
  std::vector<int> ks;  // flattened, dim entries per mode
  std::vector<Term> terms;
};

// Convolution sums for k and -k round differently; average them so the
// result is exactly real.
void symmetrize(FourierField& f) {
  const int n = f.dim();
  auto d = f.data();
  const std::size_t count = f.mode_count();
  for (std::size_t idx = 0; idx < count / 2; ++idx) {
    const std::size_t mirror = count - 1 - idx;
    for (int j = 0; j < n; ++j) {
      const Complex avg = 0.5 * (d[idx * n + j] + std::conj(d[mirror * n + j]));
      d[idx * n + j] = avg;
      d[mirror * n + j] = std::conj(avg);
    }
  }
  for (int j = 0; j < n; ++j) d[f.zero_index() * n + j].imag(0.0);
}

NonzeroModes collect_nonzero(const FourierField& f, std::size_t target_side) {
  const int n = f.dim();
  NonzeroModes out;
  const auto data = f.data();
  std::vector<int> k(n);
  std::vector<std::size_t> idxs;
  for (std::size_t idx = 0; idx < f.mode_count(); ++idx) {
    bool nz = false;
    for (int j = 0; j < n; ++j) {
      if (data[idx * n + j] != Complex{}) {
        nz = true;
        break;
      }
    }
    if (!nz) continue;
    f.mode_at(idx, k);
    out.ks.insert(out.ks.end(), k.begin(), k.end());
    idxs.push_back(idx);
  }
  out.terms.reserve(idxs.size());
  for (std::size_t t = 0; t < idxs.size(); ++t) {
    const int* kp = out.ks.data() + t * n;
    long long off = 0;
    long long stride = 1;
    for (int j = 0; j < n; ++j) {
      off += kp[j] * stride;
      stride *= static_cast<long long>(target_side);
    }
    out.terms.push_back({idxs[t], off, kp});
  }
  return out;
}

// exp(2 pi i m theta) for m in [-K, K], one table per axis.
std::vector<Complex> phase_table(std::span<const Complex> theta, int K) {
  const int n = static_cast<int>(theta.size());
  const std::size_t side = 2 * K + 1;
  std::vector<Complex> table(side * n);
  for (int j = 0; j < n; ++j) {
    Complex* row = table.data() + j * side;
    // Reducing the real part mod 1 is exact and keeps phases accurate on long lifts.
    const Complex th(theta[j].real() - std::floor(theta[j].real()), theta[j].imag());
    row[K] = 1.0;
    for (int m = 1; m <= K; ++m) {
      // Direct evaluation keeps the error flat in m.
      row[K + m] = std::exp(kTwoPiI * static_cast<double>(m) * th);
      row[K - m] = std::exp(-kTwoPiI * static_cast<double>(m) * th);
    }
  }
  return table;
}

}  // namespace

int sup_norm(std::span<const int> k) {
  int m = 0;
  for (int v : k) m = std::max(m, std::abs(v));
  return m;
}

int l1_norm(std::span<const int> k) {
  int m = 0;
  for (int v : k) m += std::abs(v);
  return m;
}

FourierField::FourierField(int dim, double width, int kmax)
    : dim_(dim), width_(width), kmax_(kmax) {
  if (dim < 1) throw ParameterError("field dimension must be >= 1");
  if (!(width > 0.0)) throw ParameterError("field width must be > 0");
  if (kmax < 0) throw ParameterError("kmax must be >= 0");
  side_ = static_cast<std::size_t>(2 * kmax + 1);
  mode_count_ = ipow(side_, dim);
  data_.assign(mode_count_ * static_cast<std::size_t>(dim), Complex{});
}

FourierField FourierField::constant(std::span<const double> c, double width) {
  FourierField f(static_cast<int>(c.size()), width, 0);
  for (std::size_t j = 0; j < c.size(); ++j) f.data_[j] = c[j];
  return f;
}

std::size_t FourierField::index_of(std::span<const int> k) const {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int j = 0; j < dim_; ++j) {
    idx += static_cast<std::size_t>(k[j] + kmax_) * stride;
    stride *= side_;
  }
  return idx;
}

void FourierField::mode_at(std::size_t idx, std::span<int> k) const {
  for (int j = 0; j < dim_; ++j) {
    k[j] = static_cast<int>(idx % side_) - kmax_;
    idx /= side_;
  }
}

Complex FourierField::coeff(std::span<const int> k, int j) const {
  if (static_cast<int>(k.size()) != dim_) throw DimensionError("mode index has wrong length");
  if (sup_norm(k) > kmax_) return {};
  return data_[index_of(k) * dim_ + j];
}

std::vector<Complex> FourierField::coeffs(std::span<const int> k) const {
  std::vector<Complex> out(dim_);
  for (int j = 0; j < dim_; ++j) out[j] = coeff(k, j);
  return out;
}

void FourierField::set_mode(std::span<const int> k, std::span<const Complex> v) {
  if (static_cast<int>(k.size()) != dim_ || static_cast<int>(v.size()) != dim_)
    throw DimensionError("set_mode: mode or value has wrong length");
  if (sup_norm(k) > kmax_) throw ParameterError("set_mode: mode outside the box");
  const std::size_t idx = index_of(k);
  if (idx == zero_index()) {
    for (int j = 0; j < dim_; ++j) {
      if (v[j].imag() != 0.0) throw RealityError("mode 0 coefficient must be real");
      data_[idx * dim_ + j] = v[j];
    }
    return;
  }
  const std::size_t mirror = mode_count_ - 1 - idx;
  for (int j = 0; j < dim_; ++j) {
    data_[idx * dim_ + j] = v[j];
    data_[mirror * dim_ + j] = std::conj(v[j]);
  }
}

std::vector<double> FourierField::mean() const {
  std::vector<double> m(dim_);
  const std::size_t z = zero_index();
  for (int j = 0; j < dim_; ++j) m[j] = data_[z * dim_ + j].real();
  return m;
}

bool FourierField::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](Complex c) { return c == Complex{}; });
}

double FourierField::max_abs() const noexcept {
  double m = 0.0;
  for (Complex c : data_) m = std::max(m, std::abs(c));
  return m;
}

void FourierField::set_width(double s) {
  if (!(s > 0.0)) throw ParameterError("field width must be > 0");
  width_ = s;
}

FourierField FourierField::with_width(double s) const {
  FourierField f = *this;
  f.set_width(s);
  return f;
}

FourierField FourierField::resized(int kmax) const {
  if (kmax == kmax_) return *this;
  FourierField out(dim_, width_, kmax);
  std::vector<int> k(dim_);
  for (std::size_t idx = 0; idx < mode_count_; ++idx) {
    mode_at(idx, k);
    if (sup_norm(k) > kmax) continue;
    const std::size_t o = out.index_of(k);
    for (int j = 0; j < dim_; ++j) out.data_[o * dim_ + j] = data_[idx * dim_ + j];
  }
  return out;
}

FourierField FourierField::shrunk() const {
  int used = 0;
  std::vector<int> k(dim_);
  for (std::size_t idx = 0; idx < mode_count_; ++idx) {
    bool nz = false;
    for (int j = 0; j < dim_; ++j) nz = nz || data_[idx * dim_ + j] != Complex{};
    if (!nz) continue;
    mode_at(idx, k);
    used = std::max(used, sup_norm(k));
  }
  return resized(used);
}

void FourierField::require_compatible(const FourierField& other) const {
  if (dim_ != other.dim_) throw DimensionError("fields have different dimensions");
}

FourierField& FourierField::operator+=(const FourierField& other) {
  require_compatible(other);
  if (other.kmax_ > kmax_) *this = resized(other.kmax_);
  width_ = std::min(width_, other.width_);
  if (other.kmax_ == kmax_) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  std::vector<int> k(dim_);
  for (std::size_t idx = 0; idx < other.mode_count_; ++idx) {
    other.mode_at(idx, k);
    const std::size_t o = index_of(k);
    for (int j = 0; j < dim_; ++j) data_[o * dim_ + j] += other.data_[idx * dim_ + j];
  }
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& other) {
  return *this += -other;
}

FourierField& FourierField::operator*=(double a) {
  for (Complex& c : data_) c *= a;
  return *this;
}

FourierField FourierField::operator-() const {
  FourierField f = *this;
  for (Complex& c : f.data_) c = -c;
  return f;
}

void FourierField::add_constant(std::span<const double> c) {
  if (static_cast<int>(c.size()) != dim_) throw DimensionError("constant has wrong length");
  const std::size_t z = zero_index();
  for (int j = 0; j < dim_; ++j) data_[z * dim_ + j] += c[j];
}

bool FourierField::coefficients_equal(const FourierField& other) const {
  if (dim_ != other.dim_) return false;
  const int K = std::max(kmax_, other.kmax_);
  const FourierField a = resized(K);
  const FourierField b = other.resized(K);
  return a.data_ == b.data_;
}

double norm(const FourierField& field, double s) {
  if (!(s > 0.0) || s > field.width()) throw ParameterError("norm: width must satisfy 0 < s <= field width");
  const int n = field.dim();
  // Extended accumulation: the result is (nearly) the rounded exact sum, so
  // it moves through every representable value as one coefficient varies.
  std::vector<long double> sums(n, 0.0L);
  std::vector<int> k(n);
  const auto data = field.data();
  for (std::size_t idx = 0; idx < field.mode_count(); ++idx) {
    field.mode_at(idx, k);
    const double w = kTwoPi * s * l1_norm(k);
    const double ew = std::exp(w);
    for (int j = 0; j < n; ++j) {
      const double a = std::abs(data[idx * n + j]);
      if (a == 0.0) continue;
      // log space only when exp(w) alone overflows
      sums[j] += std::isfinite(ew) ? a * ew : std::exp(std::log(a) + w);
    }
  }
  return static_cast<double>(*std::max_element(sums.begin(), sums.end()));
}

double norm(std::span<const double> c) {
  double m = 0.0;
  for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

std::vector<Complex> eval(const FourierField& field, std::span<const Complex> theta) {
  const int n = field.dim();
  if (static_cast<int>(theta.size()) != n) throw DimensionError("eval: point has wrong dimension");
  for (Complex t : theta) {
    if (!(std::abs(t.imag()) < field.width())) throw ParameterError("eval: point outside the analyticity strip");
  }
  const int K = field.kmax();
  const std::size_t side = 2 * K + 1;
  const auto table = phase_table(theta, K);
  std::vector<Complex> out(n, Complex{});
  const auto data = field.data();
  std::vector<int> k(n);
  for (std::size_t idx = 0; idx < field.mode_count(); ++idx) {
    const Complex* c = &data[idx * n];
    bool nz = false;
    for (int j = 0; j < n; ++j) nz = nz || c[j] != Complex{};
    if (!nz) continue;
    field.mode_at(idx, k);
    Complex phase = 1.0;
    for (int j = 0; j < n; ++j) phase *= table[j * side + (k[j] + K)];
    for (int j = 0; j < n; ++j) out[j] += c[j] * phase;
  }
  return out;
}

std::vector<double> eval(const FourierField& field, std::span<const double> theta) {
  std::vector<Complex> z(theta.begin(), theta.end());
  const auto v = eval(field, std::span<const Complex>(z));
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[j].real();
  return out;
}

std::vector<double> eval_jacobian(const FourierField& field, std::span<const double> theta) {
  const int n = field.dim();
  if (static_cast<int>(theta.size()) != n) throw DimensionError("eval_jacobian: point has wrong dimension");
  const int K = field.kmax();
  const std::size_t side = 2 * K + 1;
  std::vector<Complex> z(theta.begin(), theta.end());
  const auto table = phase_table(z, K);
  std::vector<Complex> jac(n * n, Complex{});
  const auto data = field.data();
  std::vector<int> k(n);
  for (std::size_t idx = 0; idx < field.mode_count(); ++idx) {
    const Complex* c = &data[idx * n];
    bool nz = false;
    for (int j = 0; j < n; ++j) nz = nz || c[j] != Complex{};
    if (!nz) continue;
    field.mode_at(idx, k);
    Complex phase = 1.0;
    for (int j = 0; j < n; ++j) phase *= table[j * side + (k[j] + K)];
    for (int i = 0; i < n; ++i) {
      const Complex a = c[i] * phase * kTwoPiI;
      for (int l = 0; l < n; ++l) jac[i * n + l] += a * static_cast<double>(k[l]);
    }
  }
  std::vector<double> out(n * n);
  for (int i = 0; i < n * n; ++i) out[i] = jac[i].real();
  return out;
}

FourierField directional_derivative(const FourierField& f, const FourierField& v) {
  if (f.dim() != v.dim()) throw DimensionError("directional_derivative: dimension mismatch");
  const int n = f.dim();
  FourierField out(n, std::min(f.width(), v.width()), f.kmax() + v.kmax());
  const std::size_t side = 2 * out.kmax() + 1;
  const auto fm = collect_nonzero(f, side);
  const auto vm = collect_nonzero(v, side);
  const long long center = static_cast<long long>(out.zero_index());
  auto res = out.data();
  const auto fd = f.data();
  const auto vd = v.data();
  for (const Term& a : fm.terms) {
    const Complex* fa = &fd[a.idx * n];
    for (const Term& b : vm.terms) {
      const Complex* vb = &vd[b.idx * n];
      Complex dot{};
      for (int l = 0; l < n; ++l) dot += static_cast<double>(a.k[l]) * vb[l];
      if (dot == Complex{}) continue;
      Complex* r = &res[static_cast<std::size_t>(center + a.offset + b.offset) * n];
      for (int j = 0; j < n; ++j) r[j] += dot * fa[j];
    }
  }
  for (Complex& c : res) c *= kTwoPiI;
  symmetrize(out);
  return out;
}

FourierField lie_bracket(const FourierField& x, const FourierField& v) {
  if (x.dim() != v.dim()) throw DimensionError("lie_bracket: dimension mismatch");
  const int n = x.dim();
  FourierField out(n, std::min(x.width(), v.width()), x.kmax() + v.kmax());
  const std::size_t side = 2 * out.kmax() + 1;
  const auto xm = collect_nonzero(x, side);
  const auto vm = collect_nonzero(v, side);
  const long long center = static_cast<long long>(out.zero_index());
  auto res = out.data();
  const auto xd = x.data();
  const auto vd = v.data();
  for (const Term& a : xm.terms) {
    const Complex* xa = &xd[a.idx * n];
    for (const Term& b : vm.terms) {
      const Complex* vb = &vd[b.idx * n];
      // (DX.V)_k picks k1 . V_{k2}; (DV.X)_k picks k2 . X_{k1}.
      Complex kv{};
      Complex kx{};
      for (int l = 0; l < n; ++l) {
        kv += static_cast<double>(a.k[l]) * vb[l];
        kx += static_cast<double>(b.k[l]) * xa[l];
      }
      Complex* r = &res[static_cast<std::size_t>(center + a.offset + b.offset) * n];
      for (int j = 0; j < n; ++j) r[j] += kv * xa[j] - kx * vb[j];
    }
  }
  for (Complex& c : res) c *= kTwoPiI;
  symmetrize(out);
  return out;
}

double bracket_bound(double s, double sigma, double nx, double nv) {
  if (!(sigma > 0.0) || !(sigma < s)) throw ParameterError("bracket_bound: need 0 < sigma < s");
  return kBracketConstant / sigma * nx * nv;
}

TailSplit tail_split(const FourierField& x, double K) {
  TailSplit out{x, FourierField(x.dim(), x.width(), x.kmax())};
  const int n = x.dim();
  std::vector<int> k(n);
  auto low = out.low.data();
  auto high = out.high.data();
  for (std::size_t idx = 0; idx < x.mode_count(); ++idx) {
    x.mode_at(idx, k);
    if (static_cast<double>(sup_norm(k)) < K) continue;
    for (int j = 0; j < n; ++j) {
      high[idx * n + j] = low[idx * n + j];
      low[idx * n + j] = Complex{};
    }
  }
  return out;
}

double tail_bound(int n, double sigma, double K) {
  if (n < 1) throw ParameterError("tail_bound: dimension must be >= 1");
  if (!(sigma > 0.0)) throw ParameterError("tail_bound: sigma must be > 0");
  if (!(K >= 1.0)) throw ParameterError("tail_bound: K must be >= 1");
  return std::exp(-kTwoPi * sigma * K);
}

double truncate_in_place(FourierField& field, int kmax, double ledger_width) {
  if (kmax >= field.kmax()) return 0.0;
  auto split = tail_split(field, static_cast<double>(kmax) + 1.0);
  const double dropped = split.high.is_zero() ? 0.0 : norm(split.high.with_width(ledger_width), ledger_width);
  field = split.low.resized(kmax);
  return dropped;
}

double prune_in_place(FourierField& field, double threshold, double ledger_width) {
  if (!(threshold > 0.0)) return 0.0;
  const int n = field.dim();
  auto data = field.data();
  std::vector<int> k(n);
  std::vector<double> dropped(n, 0.0);
  for (std::size_t idx = 0; idx < field.mode_count(); ++idx) {
    Complex* c = &data[idx * n];
    double big = 0.0;
    for (int j = 0; j < n; ++j) big = std::max(big, std::abs(c[j]));
    if (big == 0.0) continue;
    field.mode_at(idx, k);
    const double w = std::exp(kTwoPi * ledger_width * l1_norm(k));
    if (big * w >= threshold) continue;
    for (int j = 0; j < n; ++j) {
      dropped[j] += std::abs(c[j]) * w;
      c[j] = Complex{};
    }
  }
  return *std::max_element(dropped.begin(), dropped.end());
}

}  // namespace kam
