#pragma once

// Reference implementations used only by the tests. Written as plainly as
// possible so they can be checked by eye.

#include <cmath>
#include <cstddef>
#include <vector>

#include "magloc/numkit/ops.hpp"
#include "magloc/numkit/random.hpp"
#include "magloc/numkit/tensor.hpp"

namespace oracle {

using magloc::numkit::Shape;
using magloc::numkit::Tensor;

// out[c,t] = bias[c] + sum_i sum_j w[c,i,j] * padded[i, t + j*d]
template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, std::size_t d,
                 bool causal = false) {
  const std::size_t cin = x.dim(0), len = x.dim(1), cout = w.dim(0), k = w.dim(2);
  const std::size_t total = d * (k - 1);
  const std::size_t left = causal ? total : total / 2;
  std::vector<std::vector<T>> padded(cin, std::vector<T>(len + total, T{0}));
  for (std::size_t i = 0; i < cin; ++i)
    for (std::size_t t = 0; t < len; ++t) padded[i][t + left] = x.at(i, t);
  Tensor<T> out(Shape{cout, len});
  for (std::size_t c = 0; c < cout; ++c) {
    for (std::size_t t = 0; t < len; ++t) {
      T acc = b[c];
      for (std::size_t i = 0; i < cin; ++i)
        for (std::size_t j = 0; j < k; ++j) acc += w.at(c, i, j) * padded[i][t + j * d];
      out.at(c, t) = acc;
    }
  }
  return out;
}

// Plain 3x3 matrix for R = Rz(yaw) Ry(pitch) Rx(roll), angles in degrees.
struct Mat3 {
  double m[3][3];
};

inline Mat3 euler_matrix(double roll, double pitch, double yaw) {
  const double r = roll * M_PI / 180, p = pitch * M_PI / 180, y = yaw * M_PI / 180;
  const double cr = std::cos(r), sr = std::sin(r), cp = std::cos(p), sp = std::sin(p);
  const double cy = std::cos(y), sy = std::sin(y);
  Mat3 a{};
  a.m[0][0] = cy * cp;
  a.m[0][1] = cy * sp * sr - sy * cr;
  a.m[0][2] = cy * sp * cr + sy * sr;
  a.m[1][0] = sy * cp;
  a.m[1][1] = sy * sp * sr + cy * cr;
  a.m[1][2] = sy * sp * cr - cy * sr;
  a.m[2][0] = -sp;
  a.m[2][1] = cp * sr;
  a.m[2][2] = cp * cr;
  return a;
}

inline void mat_apply(const Mat3& a, const double v[3], double out[3]) {
  for (int i = 0; i < 3; ++i) out[i] = a.m[i][0] * v[0] + a.m[i][1] * v[1] + a.m[i][2] * v[2];
}

template <typename T>
Tensor<T> random_tensor(const Shape& shape, magloc::numkit::Rng& rng, double scale = 1.0) {
  Tensor<T> t(shape);
  for (auto& v : t.values()) v = static_cast<T>(rng.normal() * scale);
  return t;
}

// |a - n| <= tol * max(|a|, |n|) with a small absolute floor for values that
// are zero analytically.
inline bool rel_close(double analytic, double numeric, double tol, double floor = 1e-7) {
  return std::abs(analytic - numeric) <= tol * std::max(std::abs(analytic), std::abs(numeric)) + floor;
}

}  // namespace oracle
