#include <gtest/gtest.h>

#include <set>

#include "magloc/data/synth.hpp"
#include "magloc/errors.hpp"
#include "magloc/features/windows.hpp"
#include "magloc/numkit/random.hpp"
#include "magloc/perturb/scenario.hpp"

using namespace magloc;
using namespace magloc::perturb;

namespace {

std::vector<data::Trial> synthetic_trials(int count, double seconds) {
  data::SynthConfig c;
  c.trial_count = count;
  c.trial_duration_s = seconds;
  return data::synth_generate(c).trials;
}

Scenario make(Kind kind, double sigma, std::uint64_t seed = 5) {
  Scenario s;
  s.kind = kind;
  s.sigma_deg = sigma;
  s.angle_deg = sigma;
  s.seed = seed;
  return s;
}

double max_feature_gap(const data::Trial& a, const data::Trial& b) {
  const auto fa = features::compute_features(a, features::Mode::Inv2d);
  const auto fb = features::compute_features(b, features::Mode::Inv2d);
  double worst = 0;
  for (std::size_t i = 0; i < fa.values.size(); ++i)
    worst = std::max(worst, static_cast<double>(std::abs(fa.values[i] - fb.values[i])));
  return worst;
}

}  // namespace

TEST(Perturb, RandomBothSigmaZeroIsBitIdentical) {
  const auto trials = synthetic_trials(4, 8);
  const std::vector<data::Trial> train(trials.begin(), trials.begin() + 2), test(trials.begin() + 2, trials.end());
  const auto r = apply_scenario(train, test, make(Kind::RandomBoth, 0));
  EXPECT_EQ(r.train, train);
  EXPECT_EQ(r.test, test);
  EXPECT_EQ(r.audit.size(), 4u);
}

TEST(Perturb, FixedTestXAxisMatchesTableCondition) {
  const auto trials = synthetic_trials(2, 5);
  Scenario s = make(Kind::FixedTest, 0);
  s.axes = "x";
  s.angle_deg = 88;
  const std::vector<data::Trial> train{trials[0]}, test{trials[1]};
  const auto r = apply_scenario(train, test, s);
  EXPECT_EQ(r.train, train);
  const auto rot = geometry::rot_from_euler(88, 0, 0);
  for (std::size_t i = 0; i < test[0].records.size(); ++i) {
    EXPECT_EQ(r.test[0].records[i].mag, rot.apply(test[0].records[i].mag));
    EXPECT_EQ(r.test[0].records[i].acc, rot.apply(test[0].records[i].acc));
    EXPECT_EQ(r.test[0].records[i].pos, test[0].records[i].pos);
    EXPECT_EQ(r.test[0].records[i].t, test[0].records[i].t);
  }
}

TEST(Perturb, AllAxesFixedTestComposes) {
  const auto trials = synthetic_trials(1, 5);
  Scenario s = make(Kind::FixedTest, 0);
  s.angle_deg = 88;
  const auto r = apply_scenario({}, trials, s);
  const auto rot = geometry::rot_from_euler(88, 88, 88);
  EXPECT_EQ(r.test[0].records[17].mag, rot.apply(trials[0].records[17].mag));
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Perturb, NormsPositionsAndInvariantsPreserved) {
  const auto trials = synthetic_trials(10, 12);
  const std::vector<data::Trial> train(trials.begin(), trials.begin() + 5), test(trials.begin() + 5, trials.end());
  Scenario fixed = make(Kind::FixedTest, 0);
  fixed.angle_deg = 88;
  for (const auto& s : {fixed, make(Kind::FixedMagnitudeBoth, 20), make(Kind::RandomTest, 20),
                        make(Kind::RandomBoth, 20)}) {
    const auto r = apply_scenario(train, test, s);
    const auto check = [&](const std::vector<data::Trial>& in, const std::vector<data::Trial>& out) {
      ASSERT_EQ(in.size(), out.size());
      for (std::size_t k = 0; k < in.size(); ++k) {
        for (std::size_t i = 0; i < in[k].records.size(); ++i) {
          EXPECT_EQ(out[k].records[i].pos, in[k].records[i].pos);
          EXPECT_NEAR(geometry::norm(out[k].records[i].mag), geometry::norm(in[k].records[i].mag), 1e-5);
        }
        EXPECT_LE(max_feature_gap(in[k], out[k]), 1e-5) << s.label();
      }
    };
    check(train, r.train);
    check(test, r.test);
    EXPECT_EQ(r.train != train, s.perturbs_train()) << s.label();
    EXPECT_NE(r.test, test) << s.label();
  }
}

TEST(Perturb, RotatingOnlyMagBreaksInvariance) {
  // Guards the joint-rotation rule: M_g is invariant only when acc turns too.
  const auto trial = synthetic_trials(1, 10)[0];
  const auto sched = geometry::sample_schedule(20, 1, trial.duration(), 3);
  const auto joint = rotate_trial(trial, sched);
  data::Trial mag_only = trial;
  for (std::size_t i = 0; i < trial.records.size(); ++i) mag_only.records[i].mag = joint.records[i].mag;
  EXPECT_LE(max_feature_gap(trial, joint), 1e-5);
  EXPECT_GT(max_feature_gap(trial, mag_only), 1e-2);
}

TEST(Perturb, DeterministicAndPerTrialSeeds) {
  auto trials = synthetic_trials(3, 6);
  const auto s = make(Kind::RandomTest, 20, 11);
  const auto a = apply_scenario({}, trials, s), b = apply_scenario({}, trials, s);
  EXPECT_EQ(a.test, b.test);
  // Dropping a trial does not change the others' rotations.
  const std::vector<data::Trial> fewer{trials[0], trials[2]};
  const auto c = apply_scenario({}, fewer, s);
  EXPECT_EQ(c.test[0], a.test[0]);
  EXPECT_EQ(c.test[1], a.test[2]);
  EXPECT_NE(a.audit[0].seed, a.audit[1].seed);
  ASSERT_TRUE(a.audit[0].knots.has_value());
  EXPECT_GE(a.audit[0].knots->last_time(), trials[0].duration());
  EXPECT_TRUE(a.audit[0].to_json().contains("knots"));
}

TEST(Perturb, FixedMagnitudeUsesSigmaAsAngle) {
  const auto trials = synthetic_trials(4, 4);
  const auto r = apply_scenario({trials[0], trials[1]}, {trials[2], trials[3]}, make(Kind::FixedMagnitudeBoth, 15));
  std::set<double> axes_x;
  for (const auto& rec : r.audit) {
    ASSERT_TRUE(rec.constant.has_value());
    EXPECT_NEAR(rec.constant->angle_deg(), 15, 1e-9);
    axes_x.insert(rec.constant->x());
  }
  EXPECT_EQ(axes_x.size(), 4u);  // independent axes per trial
}

TEST(Scenario, JsonAndValidation) {
  const auto s = Scenario::from_json({{"kind", "RandomTest"}, {"sigma_deg", 20}, {"period_s", 2}, {"seed", 9}});
  EXPECT_EQ(Scenario::from_json(s.to_json()), s);
  EXPECT_EQ(Scenario::from_json({{"kind", "FixedTest"}, {"axes", {"x", "z"}}, {"angle_deg", 88}}).axes, "xz");
  EXPECT_THROW(Scenario::from_json({{"kind", "RandomTest"}, {"sigma_deg", -1}}), ConfigError);
  EXPECT_THROW(Scenario::from_json({{"kind", "RandomTest"}, {"period_s", 0}}), ConfigError);
  EXPECT_THROW(Scenario::from_json({{"kind", "FixedTest"}, {"axes", ""}}), ConfigError);
  EXPECT_THROW(Scenario::from_json({{"kind", "Sideways"}}), ConfigError);
  EXPECT_THROW(Scenario::from_json({{"kind", "None"}, {"sigma", 3}}), ConfigError);
}

TEST(Scenario, CatalogCountOrderAndSeeds) {
  std::vector<double> sigmas;
  for (int s = 0; s <= 20; ++s) sigmas.push_back(s);
  const auto cat = scenario_catalog(sigmas, {Kind::RandomBoth}, 42);
  ASSERT_EQ(cat.size(), 21u);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < cat.size(); ++i) {
    EXPECT_EQ(cat[i].sigma_deg, static_cast<double>(i));
    EXPECT_EQ(cat[i].seed, numkit::derive_seed(42, i));
    seeds.insert(cat[i].seed);
  }
  EXPECT_EQ(seeds.size(), 21u);
  EXPECT_TRUE(scenario_catalog({}, {Kind::RandomBoth}, 42).empty());
  const auto two = scenario_catalog({0, 10}, {Kind::RandomTest, Kind::FixedTest}, 1);
  ASSERT_EQ(two.size(), 4u);
  EXPECT_EQ(two[2].kind, Kind::FixedTest);
  EXPECT_EQ(two[3].angle_deg, 10);
  EXPECT_EQ(scenario_catalog({0, 10}, {Kind::RandomTest}, 1)[1].seed, two[1].seed);
}
