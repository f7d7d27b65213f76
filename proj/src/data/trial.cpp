#include "magloc/data/trial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "magloc/data/resample.hpp"
#include "magloc/errors.hpp"

namespace magloc::data {

double BoundingBox::diagonal() const { return std::hypot(max_x - min_x, max_y - min_y); }

BoundingBox bounding_box_of(const std::vector<Trial>& trials) {
  BoundingBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (const auto& trial : trials) {
    for (const auto& r : trial.records) {
      b.min_x = std::min(b.min_x, r.pos.x);
      b.min_y = std::min(b.min_y, r.pos.y);
      b.max_x = std::max(b.max_x, r.pos.x);
      b.max_y = std::max(b.max_y, r.pos.y);
      any = true;
    }
  }
  return any ? b : BoundingBox{};
}

double median_spacing(const Trial& trial) {
  if (trial.records.size() < 2) return 0.0;
  std::vector<double> dt;
  dt.reserve(trial.records.size() - 1);
  for (std::size_t i = 1; i < trial.records.size(); ++i)
    dt.push_back(trial.records[i].t - trial.records[i - 1].t);
  const auto mid = dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2);
  std::nth_element(dt.begin(), mid, dt.end());
  return *mid;
}

std::string size_class_of(const std::string& building) {
  if (building == "CSL") return "small";
  if (building == "Talbot") return "medium";
  if (building == "Loomis") return "large";
  if (building.rfind("synthetic", 0) == 0) return "synthetic";
  return "unknown";
}

Trial resample_align(const Trial& trial, double target_rate_hz) {
  const auto& in = trial.records;
  if (in.size() < 2) {
    throw DataError("resample: trial " + trial.building + "/" + std::to_string(trial.trial_id) +
                    " has fewer than 2 records");
  }
  require(target_rate_hz > 0.0, "resample: target rate must be positive");
  const double t0 = in.front().t;
  const double span = in.back().t - t0;
  const auto count = static_cast<std::size_t>(std::floor(span * target_rate_hz + 1e-9)) + 1;

  Trial out = trial;
  out.sample_rate_hz = target_rate_hz;
  out.records.clear();
  out.records.reserve(count);
  auto lerp = [](const Vec3& a, const Vec3& b, double f) {
    return Vec3{a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f, a.z + (b.z - a.z) * f};
  };
  std::size_t k = 0;
  for (std::size_t n = 0; n < count; ++n) {
    const double t = std::min(t0 + static_cast<double>(n) / target_rate_hz, in.back().t);
    while (k + 1 < in.size() - 1 && in[k + 1].t <= t) ++k;
    const SampleRecord& a = in[k];
    const SampleRecord& b = in[k + 1];
    SampleRecord r;
    r.t = t;
    if (t == a.t) {
      r.mag = a.mag;
      r.acc = a.acc;
      r.pos = a.pos;
    } else if (t == b.t) {
      r.mag = b.mag;
      r.acc = b.acc;
      r.pos = b.pos;
    } else {
      const double f = (t - a.t) / (b.t - a.t);
      r.mag = lerp(a.mag, b.mag, f);
      r.acc = lerp(a.acc, b.acc, f);
      r.pos = lerp(a.pos, b.pos, f);
    }
    out.records.push_back(r);
  }
  const double spacing = median_spacing(out);
  out.rate_flagged = out.records.size() >= 2 && std::abs(spacing * target_rate_hz - 1.0) > 0.05;
  return out;
}

}  // namespace magloc::data
