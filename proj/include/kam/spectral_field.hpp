#pragma once

// Real-analytic vector fields on the torus T^n = R^n / Z^n stored as
// truncated Fourier series
//
//     X(theta) = sum_k X_k exp(2 pi i k . theta),   X_k in C^n,
//
// over the box |k|_inf <= kmax. Reality is X_{-k} = conj(X_k).
//
// Norms are the weighted l1 majorant
//
//     |X|_s = max_j sum_k |X_{j,k}| exp(2 pi s |k|_1),
//
// which bounds the supremum of |X| on the strip |Im theta|_inf < s. Every
// estimate constant in this header is derived for that norm and the 2 pi
// Fourier convention; see docs/constants.md.

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace kam {

using Complex = std::complex<double>;
using ModeIndex = std::vector<int>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// |[X,V]|_{s-sigma} <= kBracketConstant / sigma * |X|_s |V|_s.
/// Each half of DX.V - DV.X costs sup_x x exp(-sigma x) = 1/(e sigma).
inline constexpr double kBracketConstant = 2.0 / std::numbers::e;

/// |(V^t)^* X|_{s-sigma} <= 2 |X|_s for |t| <= 1 once |V|_s <= kPullbackSmallness * sigma.
/// The Lie series ratio is 2|V|_s/sigma, so 1/4 gives ratio 1/2.
inline constexpr double kPullbackSmallness = 0.25;

int sup_norm(std::span<const int> k);
int l1_norm(std::span<const int> k);

class FourierField {
 public:
  FourierField() = default;
  /// Zero field of dimension `dim` on the box |k|_inf <= kmax.
  FourierField(int dim, double width, int kmax);

  /// The constant field c (mode 0 only).
  static FourierField constant(std::span<const double> c, double width);

  int dim() const noexcept { return dim_; }
  double width() const noexcept { return width_; }
  int kmax() const noexcept { return kmax_; }
  /// Number of lattice points in the box, (2 kmax + 1)^n.
  std::size_t mode_count() const noexcept { return mode_count_; }

  /// Coefficient of component j at mode k; zero outside the box.
  Complex coeff(std::span<const int> k, int j) const;
  std::vector<Complex> coeffs(std::span<const int> k) const;

  /// Sets X_k = v and X_{-k} = conj(v). At k = 0 the imaginary parts must vanish.
  void set_mode(std::span<const int> k, std::span<const Complex> v);

  // Raw storage: entry [idx * dim + j], with idx enumerating the box with
  // axis 0 fastest. Direct writers are responsible for keeping reality.
  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }
  std::size_t index_of(std::span<const int> k) const;
  void mode_at(std::size_t idx, std::span<int> k) const;
  std::size_t zero_index() const noexcept { return mode_count_ / 2; }

  /// Mean value (mode 0); real by reality.
  std::vector<double> mean() const;

  bool is_zero() const noexcept;
  /// Largest |X_k| entry, unweighted.
  double max_abs() const noexcept;

  void set_width(double s);
  FourierField with_width(double s) const;

  /// Same field on a different box; modes outside the new box are dropped.
  FourierField resized(int kmax) const;
  /// Smallest box that still holds every nonzero coefficient.
  FourierField shrunk() const;

  FourierField& operator+=(const FourierField& other);
  FourierField& operator-=(const FourierField& other);
  FourierField& operator*=(double a);
  friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
  friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
  friend FourierField operator*(double a, FourierField x) { return x *= a; }
  FourierField operator-() const;

  /// Adds a constant vector to mode 0.
  void add_constant(std::span<const double> c);

  /// Coefficientwise equality (same dimension, exact values, boxes may differ).
  bool coefficients_equal(const FourierField& other) const;

 private:
  void require_compatible(const FourierField& other) const;

  int dim_ = 0;
  double width_ = 0.0;
  int kmax_ = 0;
  std::size_t side_ = 1;
  std::size_t mode_count_ = 1;
  std::vector<Complex> data_;
};

/// Weighted majorant norm at width s, 0 < s <= field.width().
double norm(const FourierField& field, double s);

/// Majorant norm of a constant vector (sup norm of its entries).
double norm(std::span<const double> c);

/// Value at a complex point with |Im theta_j| < width.
std::vector<Complex> eval(const FourierField& field, std::span<const Complex> theta);

/// Value at a real point; the imaginary parts (pure roundoff) are dropped.
std::vector<double> eval(const FourierField& field, std::span<const double> theta);

/// Jacobian DX(theta) at a real point, row-major n x n: entry [i*n + l] = d X_i / d theta_l.
std::vector<double> eval_jacobian(const FourierField& field, std::span<const double> theta);

/// DF . V, the derivative of F along V. Exact convolution.
FourierField directional_derivative(const FourierField& f, const FourierField& v);

/// [X, V] = DX . V - DV . X. Result box is X.kmax + V.kmax, width min of the two.
FourierField lie_bracket(const FourierField& x, const FourierField& v);

/// Certified majorant for |[X,V]|_{s-sigma} given |X|_s = nx and |V|_s = nv.
double bracket_bound(double s, double sigma, double nx, double nv);

struct TailSplit {
  FourierField low;
  FourierField high;
};

/// high keeps exactly the modes with |k|_inf >= K, low the rest.
TailSplit tail_split(const FourierField& x, double K);

/// Factor f with |X^K|_{s-sigma} <= f |X|_s. For the majorant norm this is
/// exp(-2 pi sigma K): every kept mode has |k|_1 >= |k|_inf >= K. It does
/// not depend on n; the argument is validated and kept for the interface.
double tail_bound(int n, double sigma, double K);

/// Zeroes every mode whose weighted size max_j |X_{j,k}| exp(2 pi w |k|_1) at
/// w = ledger_width is below `threshold`. Returns the majorant norm removed.
double prune_in_place(FourierField& field, double threshold, double ledger_width);

/// Drops every mode with |k|_inf > kmax. Returns the majorant norm (at
/// `ledger_width`) of what was removed.
double truncate_in_place(FourierField& field, int kmax, double ledger_width);

}  // namespace kam
