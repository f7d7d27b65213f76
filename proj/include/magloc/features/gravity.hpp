#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "magloc/geometry/vec3.hpp"

namespace magloc::features {

using geometry::Vec3;

/// alpha = 1 uses each accelerometer sample directly, which keeps the
/// estimate exactly equivariant under rotations that change between samples.
/// Smaller values low-pass the stream (0.02 at 50 Hz is roughly 0.16 Hz).
inline constexpr double kDefaultGravityAlpha = 1.0;
inline constexpr double kFreeFallThreshold = 0.5;  // m/s^2

struct GravityEstimate {
  double alpha = kDefaultGravityAlpha;
  std::vector<Vec3> g;                 // unit, sensor frame, pointing up
  std::vector<std::size_t> flagged;    // samples where the previous g was held
};

/// v_n = alpha acc_n + (1 - alpha) v_{n-1}, v_0 = acc_0, g_n = -v_n / |v_n|.
/// A static device reading (0, 0, -9.81) gives g = (0, 0, 1).
GravityEstimate estimate_gravity(std::span<const Vec3> acc, double alpha = kDefaultGravityAlpha);

struct InvariantFeatures {
  double m_n = 0.0;  // |M|
  double m_g = 0.0;  // M . g
};

/// Requires |g| = 1 within 1e-6.
InvariantFeatures invariant_features(const Vec3& mag, const Vec3& g);

}  // namespace magloc::features
