#include "magloc/features/gravity.hpp"

#include <cmath>
#include <string>

#include "magloc/errors.hpp"

namespace magloc::features {

GravityEstimate estimate_gravity(std::span<const Vec3> acc, double alpha) {
  require(!acc.empty(), "estimate_gravity: empty accelerometer stream");
  require(alpha > 0.0 && alpha <= 1.0, "estimate_gravity: alpha must be in (0, 1]");
  require(geometry::norm(acc[0]) >= kFreeFallThreshold,
          "estimate_gravity: first accelerometer sample is (near) zero");

  GravityEstimate est;
  est.alpha = alpha;
  est.g.reserve(acc.size());
  Vec3 v = acc[0];
  for (std::size_t n = 0; n < acc.size(); ++n) {
    if (n > 0) v = alpha == 1.0 ? acc[n] : acc[n] * alpha + v * (1.0 - alpha);
    const double len = geometry::norm(v);
    if (len < kFreeFallThreshold) {
      est.flagged.push_back(n);
      est.g.push_back(est.g.back());
      continue;
    }
    est.g.push_back(Vec3{-v.x / len, -v.y / len, -v.z / len});
  }
  return est;
}

InvariantFeatures invariant_features(const Vec3& mag, const Vec3& g) {
  const double gn = geometry::norm(g);
  if (std::abs(gn - 1.0) > 1e-6) {
    throw ContractError("invariant_features: |g| = " + std::to_string(gn) + " is not unit");
  }
  return {geometry::norm(mag), geometry::dot(mag, g)};
}

}  // namespace magloc::features
