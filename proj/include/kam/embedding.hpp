#pragma once

#include <span>
#include <vector>

#include "kam/spectral_field.hpp"

namespace kam {

/// Phi = (Id + u_1) o (Id + u_2) o ... o (Id + u_m), kept as its list of layers.
/// Appending a layer composes on the right, so the newest layer acts first.
class NearIdentityEmbedding {
 public:
  struct Layer {
    FourierField displacement;
    double source_width = 0.0;  // Phi_j maps T^n_{source} into T^n_{target}
    double target_width = 0.0;
  };

  NearIdentityEmbedding() = default;
  explicit NearIdentityEmbedding(int dim) : dim_(dim) {}

  int dim() const noexcept { return dim_; }
  bool is_identity() const noexcept { return layers_.empty(); }
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  /// Phi <- Phi o (Id + u).
  void compose_right(FourierField displacement, double source_width, double target_width);

  /// Phi(theta) at a real point.
  std::vector<double> apply(std::span<const double> theta) const;
  /// Phi(theta) - theta at a real point, accumulated without forming theta + O(1) sums.
  std::vector<double> displacement(std::span<const double> theta) const;

  /// Width of the innermost domain, or `fallback` for the identity.
  double domain_width(double fallback) const;

 private:
  int dim_ = 0;
  std::vector<Layer> layers_;
};

}  // namespace kam
