#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace tiertraffic {

/// Feature vectors have at most three scalars (RGB); intensity uses one.
constexpr int kMaxFeatureDims = 3;
using Feature = std::array<double, kMaxFeatureDims>;

/// Diagonal-covariance Gaussian with a mixture weight.
struct GaussianComponent {
  Feature mean{};
  Feature variance{};
  double weight = 0.0;
};

/// (2*pi)^(-d/2) for d = 0..3.
inline const std::array<double, kMaxFeatureDims + 1>& normal_constants() {
  static const std::array<double, kMaxFeatureDims + 1> table = [] {
    std::array<double, kMaxFeatureDims + 1> t{};
    for (int d = 0; d <= kMaxFeatureDims; ++d) t[d] = std::pow(2.0 * std::numbers::pi, -0.5 * d);
    return t;
  }();
  return table;
}

/// (2*pi)^(-d/2) / sqrt(prod variance)
inline double gaussian_peak(const GaussianComponent& g, int dims) {
  double det = 1.0;
  for (int c = 0; c < dims; ++c) det *= g.variance[c];
  return normal_constants()[dims] / std::sqrt(det);
}

/// Squared Mahalanobis distance under the diagonal covariance.
inline double mahalanobis2(const GaussianComponent& g, const Feature& x, int dims) {
  double q = 0.0;
  for (int c = 0; c < dims; ++c) {
    const double diff = x[c] - g.mean[c];
    q += diff * diff / g.variance[c];
  }
  return q;
}

/// gaussian_peak * exp(-0.5 * mahalanobis2); never exceeds the peak.
inline double gaussian_density(const GaussianComponent& g, const Feature& x, int dims) {
  return gaussian_peak(g, dims) * std::exp(-0.5 * mahalanobis2(g, x, dims));
}

/// Same value as gaussian_density given a precomputed gaussian_peak.
inline double gaussian_density(const GaussianComponent& g, double peak, const Feature& x, int dims) {
  return peak * std::exp(-0.5 * mahalanobis2(g, x, dims));
}

/// True when every channel lies within `sigmas` standard deviations.
inline bool within_sigmas(const GaussianComponent& g, const Feature& x, int dims, double sigmas) {
  for (int c = 0; c < dims; ++c) {
    const double diff = x[c] - g.mean[c];
    if (diff * diff > sigmas * sigmas * g.variance[c]) return false;
  }
  return true;
}

}  // namespace tiertraffic
