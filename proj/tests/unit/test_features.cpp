#include <gtest/gtest.h>

#include <cmath>

#include "magloc/data/synth.hpp"
#include "magloc/errors.hpp"
#include "magloc/features/windows.hpp"
#include "magloc/geometry/schedule.hpp"
#include "magloc/numkit/random.hpp"
#include "magloc/perturb/scenario.hpp"
#include "support/tempdir.hpp"

using namespace magloc;
using namespace magloc::features;
using geometry::Rotation;
using numkit::Rng;

namespace {

data::Trial synthetic_trial(double seconds, std::uint64_t seed = 3) {
  data::SynthConfig c;
  c.trial_count = 1;
  c.trial_duration_s = seconds;
  c.seed = seed;
  return data::synth_generate(c).trials.at(0);
}

double angle_between_deg(const Vec3& a, const Vec3& b) {
  return std::atan2(geometry::norm(geometry::cross(a, b)), geometry::dot(a, b)) * 180 / M_PI;
}

Vec3 random_unit(Rng& rng) {
  Vec3 v{rng.normal(), rng.normal(), rng.normal()};
  return v * (1 / geometry::norm(v));
}

}  // namespace

TEST(Gravity, StaticDevice) {
  std::vector<Vec3> acc(50, Vec3{0, 0, -9.81});
  for (double alpha : {1.0, 0.02}) {
    const auto est = estimate_gravity(acc, alpha);
    for (const auto& g : est.g) EXPECT_EQ(g, (Vec3{0, 0, 1}));
    EXPECT_TRUE(est.flagged.empty());
  }
}

TEST(Gravity, EquivariantUnderFixedRotation) {
  Rng rng(1);
  std::vector<Vec3> acc, rotated;
  const auto r = Rotation::about_axis({1, 0, 0}, 88);
  for (int i = 0; i < 300; ++i) {
    acc.push_back(Vec3{0.3 * rng.normal(), 0.3 * rng.normal(), -9.81 + 0.3 * rng.normal()});
    rotated.push_back(r.apply(acc.back()));
  }
  for (double alpha : {1.0, 0.02, 0.5}) {
    const auto a = estimate_gravity(acc, alpha), b = estimate_gravity(rotated, alpha);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const auto want = r.apply(a.g[i]);
      EXPECT_NEAR(b.g[i].x, want.x, 1e-6);
      EXPECT_NEAR(b.g[i].y, want.y, 1e-6);
      EXPECT_NEAR(b.g[i].z, want.z, 1e-6);
    }
  }
}

TEST(Gravity, NoisyEmaConvergesWithinTwoDegrees) {
  // alpha = 0.02 with 0.5 m/s^2 noise; after 2 s (100 samples) the estimate
  // must be within 2 degrees of the true axis, over 100 seeds.
  double worst = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(500 + seed);
    const Vec3 up = random_unit(rng);
    std::vector<Vec3> acc;
    for (int i = 0; i < 200; ++i)
      acc.push_back(up * -9.81 + Vec3{rng.normal(), rng.normal(), rng.normal()} * 0.5);
    const auto est = estimate_gravity(acc, 0.02);
    for (std::size_t i = 100; i < acc.size(); ++i) worst = std::max(worst, angle_between_deg(est.g[i], up));
  }
  EXPECT_LT(worst, 2.0);
}

TEST(Gravity, UnitNormAndFreeFallHold) {
  Rng rng(2);
  std::vector<Vec3> acc;
  for (int i = 0; i < 100; ++i) acc.push_back(Vec3{rng.normal(), rng.normal(), rng.normal()} * 5);
  acc[10] = {0.1, 0.0, 0.0};
  acc[11] = {0.0, 0.2, 0.0};
  const auto est = estimate_gravity(acc, 1.0);
  for (const auto& g : est.g) EXPECT_NEAR(geometry::norm(g), 1.0, 1e-6);
  EXPECT_EQ(est.flagged, (std::vector<std::size_t>{10, 11}));
  EXPECT_EQ(est.g[10], est.g[9]);
  EXPECT_EQ(est.g[11], est.g[9]);
  std::vector<Vec3> bad{{0, 0, 0}, {0, 0, -9.8}};
  EXPECT_THROW(estimate_gravity(bad), ContractError);
  EXPECT_THROW(estimate_gravity(acc, 0.0), ContractError);
}

TEST(Invariants, Examples) {
  EXPECT_DOUBLE_EQ(invariant_features({3, 4, 0}, {0, 0, 1}).m_n, 5.0);
  EXPECT_DOUBLE_EQ(invariant_features({3, 4, 0}, {1, 0, 0}).m_n, 5.0);
  const auto f = invariant_features({0, 0, 50}, {0, 0, 1});
  EXPECT_DOUBLE_EQ(f.m_n, 50);
  EXPECT_DOUBLE_EQ(f.m_g, 50);
  EXPECT_THROW(invariant_features({1, 2, 3}, {0, 0, 2}), ContractError);
}

TEST(Invariants, RotationInvariantOverRandomDraws) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 mag = Vec3{rng.normal(), rng.normal(), rng.normal()} * 40;
    const Vec3 g = random_unit(rng);
    const auto r = Rotation::from_quaternion(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    const auto a = invariant_features(mag, g);
    const auto b = invariant_features(r.apply(mag), r.apply(g));
    EXPECT_NEAR(a.m_n, b.m_n, 1e-5);
    EXPECT_NEAR(a.m_g, b.m_g, 1e-5);
  }
}

TEST(Windows, BoundaryAndCounts) {
  const auto trial = synthetic_trial(19.98);  // 1000 samples
  ASSERT_EQ(trial.records.size(), 1000u);
  data::Trial first200 = trial;
  first200.records.resize(200);
  auto one = make_windows(first200, {Mode::Raw3d, 200, 1});
  ASSERT_EQ(one.set.size(), 1u);
  EXPECT_EQ(one.set.target(0)[0], trial.records[199].pos.x);
  EXPECT_EQ(one.set.target(0)[1], trial.records[199].pos.y);
  EXPECT_EQ(one.set.meta(0).end_index, 199u);
  EXPECT_EQ(make_windows(trial, {Mode::Raw3d, 200, 1}).set.size(), 801u);
  EXPECT_EQ(make_windows(trial, {Mode::Inv2d, 200, 10}).set.size(), 81u);
  for (std::size_t stride : {1, 3, 7, 64, 800, 801, 5000})
    EXPECT_EQ(make_windows(trial, {Mode::Raw3d, 200, stride}).set.size(), (1000 - 200) / stride + 1);
}

TEST(Windows, ShortTrialGivesWarning) {
  data::Trial t = synthetic_trial(3);
  const auto r = make_windows(t, {Mode::Raw3d, 200, 1});
  EXPECT_TRUE(r.set.empty());
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("fewer than W=200"), std::string::npos);
}

TEST(Windows, TargetAlignmentAndContent) {
  const auto trial = synthetic_trial(12);
  const auto ws = make_windows(trial, {Mode::Raw3d, 200, 7}).set;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const auto w = ws.at(i);
    const std::size_t start = i * 7, end = start + 199;
    EXPECT_EQ(w.meta.end_index, end);
    EXPECT_EQ(w.target[0], trial.records[end].pos.x);
    EXPECT_EQ(w.target[1], trial.records[end].pos.y);
    EXPECT_EQ(w.matrix.at(0, 0), static_cast<float>(trial.records[start].mag.x));
    EXPECT_EQ(w.matrix.at(2, 199), static_cast<float>(trial.records[end].mag.z));
  }
}

TEST(Windows, Inv2dChannelsAreNormAndProjection) {
  const auto trial = synthetic_trial(6);
  const auto w = make_windows(trial, {Mode::Inv2d, 200, 1}).set.at(5);
  for (std::size_t t = 0; t < 200; ++t) {
    const auto& r = trial.records[5 + t];
    const Vec3 g = r.acc * (-1 / geometry::norm(r.acc));
    EXPECT_EQ(w.matrix.at(0, t), static_cast<float>(geometry::norm(r.mag)));
    EXPECT_NEAR(w.matrix.at(1, t), geometry::dot(r.mag, g), 1e-4);
  }
}

TEST(Windows, Inv2dInvariantUnderJointSchedules) {
  const auto trial = synthetic_trial(20);
  const auto base = make_windows(trial, {Mode::Inv2d, 200, 5}).set;
  for (double sigma : {0.0, 5.0, 20.0, 88.0}) {
    const auto sched = geometry::sample_schedule(sigma, 1.0, trial.duration(), 17);
    const auto rotated = perturb::rotate_trial(trial, sched);
    const auto ws = make_windows(rotated, {Mode::Inv2d, 200, 5}).set;
    ASSERT_EQ(ws.size(), base.size());
    double worst = 0;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const auto a = base.at(i), b = ws.at(i);
      for (std::size_t k = 0; k < a.matrix.size(); ++k)
        worst = std::max(worst, static_cast<double>(std::abs(a.matrix[k] - b.matrix[k])));
    }
    EXPECT_LE(worst, 1e-5) << "sigma " << sigma;
  }
}

TEST(Windows, Raw3dEquivariantUnderFixedRotation) {
  const auto trial = synthetic_trial(8);
  const auto r = geometry::rot_from_euler(30, -20, 88);
  const auto base = make_windows(trial, {Mode::Raw3d, 200, 11}).set;
  const auto rot = make_windows(perturb::rotate_trial(trial, r), {Mode::Raw3d, 200, 11}).set;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto a = base.at(i), b = rot.at(i);
    for (std::size_t t = 0; t < 200; ++t) {
      const auto want = r.apply({a.matrix.at(0, t), a.matrix.at(1, t), a.matrix.at(2, t)});
      EXPECT_NEAR(b.matrix.at(0, t), want.x, 1e-4);
      EXPECT_NEAR(b.matrix.at(1, t), want.y, 1e-4);
      EXPECT_NEAR(b.matrix.at(2, t), want.z, 1e-4);
    }
  }
}

TEST(Standardize, ZeroVarianceRejectedByName) {
  data::Trial t = synthetic_trial(5);
  for (auto& r : t.records) r.mag.y = 12.0;
  const auto ws = make_windows(t, {Mode::Raw3d, 200, 1}).set;
  try {
    ChannelStats::fit(ws);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("zero variance"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("M_y"), std::string::npos);
  }
}

TEST(Standardize, RecomputedMomentsAreZeroAndOne) {
  for (Mode mode : {Mode::Raw3d, Mode::Inv2d}) {
    const auto trial = synthetic_trial(30);
    auto ws = make_windows(trial, {mode, 200, 3}).set;
    const auto stats = ChannelStats::fit(ws);
    standardize(ws, stats);
    for (std::size_t c = 0; c < ws.channels(); ++c) {
      double sum = 0, sq = 0, n = 0;
      for (std::size_t i = 0; i < ws.size(); ++i) {
        const auto w = ws.at(i);
        for (std::size_t t = 0; t < 200; ++t) {
          sum += w.matrix.at(c, t);
          sq += double(w.matrix.at(c, t)) * w.matrix.at(c, t);
          ++n;
        }
      }
      const double mean = sum / n;
      EXPECT_NEAR(mean, 0.0, 1e-5);
      EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 1.0, 1e-4);
    }
  }
}

TEST(Standardize, TrainStatsOnIdenticalTestSet) {
  const auto trial = synthetic_trial(10);
  auto train = make_windows(trial, {Mode::Inv2d, 200, 4}).set;
  auto test = make_windows(trial, {Mode::Inv2d, 200, 4}).set;
  const auto stats = ChannelStats::fit(train);
  standardize(train, stats);
  standardize(test, stats);
  for (std::size_t i = 0; i < train.size(); ++i) EXPECT_EQ(train.at(i).matrix, test.at(i).matrix);
  EXPECT_EQ(ChannelStats::from_json(stats.to_json()), stats);
}

TEST(Windows, BlobRoundTrip) {
  TempDir dir("windows");
  const auto trial = synthetic_trial(9);
  auto ws = make_windows(trial, {Mode::Inv2d, 200, 13}).set;
  const auto stats = ChannelStats::fit(ws);
  save_windows(ws, &stats, dir / "w.bin", dir / "w.json");
  const auto back = load_windows(dir / "w.bin", dir / "w.json");
  ASSERT_EQ(back.size(), ws.size());
  EXPECT_EQ(back.mode(), Mode::Inv2d);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const auto a = ws.at(i), b = back.at(i);
    EXPECT_EQ(a.matrix, b.matrix);
    EXPECT_EQ(a.target, b.target);
    EXPECT_EQ(a.meta, b.meta);
  }
}

TEST(Windows, GatherMatchesAt) {
  const auto trial = synthetic_trial(8);
  const auto ws = make_windows(trial, {Mode::Raw3d, 200, 9}).set;
  const std::vector<std::size_t> idx{4, 0, 9};
  const auto batch = ws.gather(idx);
  EXPECT_EQ(batch.shape(), (numkit::Shape{3, 3, 200}));
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const auto w = ws.at(idx[b]);
    for (std::size_t k = 0; k < w.matrix.size(); ++k) ASSERT_EQ(batch[b * 600 + k], w.matrix[k]);
  }
}
