#include "kam/embedding.hpp"

#include "kam/errors.hpp"

namespace kam {

void NearIdentityEmbedding::compose_right(FourierField displacement, double source_width, double target_width) {
  if (dim_ == 0) dim_ = displacement.dim();
  if (displacement.dim() != dim_) throw DimensionError("embedding layer has the wrong dimension");
  if (!(source_width > 0.0) || source_width > target_width)
    throw ParameterError("embedding layer must map a narrower strip into a wider one");
  layers_.push_back({std::move(displacement), source_width, target_width});
}

std::vector<double> NearIdentityEmbedding::displacement(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != dim_) throw DimensionError("embedding: point has wrong dimension");
  std::vector<double> total(dim_, 0.0);
  std::vector<double> point(theta.begin(), theta.end());
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    const auto u = eval(it->displacement, std::span<const double>(point));
    for (int j = 0; j < dim_; ++j) {
      total[j] += u[j];
      point[j] = theta[j] + total[j];
    }
  }
  return total;
}

std::vector<double> NearIdentityEmbedding::apply(std::span<const double> theta) const {
  auto d = displacement(theta);
  for (int j = 0; j < dim_; ++j) d[j] += theta[j];
  return d;
}

double NearIdentityEmbedding::domain_width(double fallback) const {
  return layers_.empty() ? fallback : layers_.back().source_width;
}

}  // namespace kam
