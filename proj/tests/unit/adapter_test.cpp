#include "adaptsel/adapter.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "adaptsel/engine.hpp"
#include "fixtures.hpp"

namespace ad = adaptsel::adapter;
namespace obj = adaptsel::objectives;
using adaptsel::techniques::Technique;
using obj::ObjectiveVector;

namespace {

ad::AdapterConfig two_way() {
  ad::AdapterConfig c = ad::application_preset();
  c.techniques = {Technique::sticky_ray, Technique::ray_cursor};
  c.familiarity = obj::study_familiarity();
  return c;
}

// Smoothed scores under which `favoured` leads by `lead` on every objective.
std::map<Technique, ObjectiveVector> favouring(Technique favoured, double lead = 0.1) {
  std::map<Technique, ObjectiveVector> out;
  for (Technique t : {Technique::sticky_ray, Technique::ray_cursor}) {
    const double x = t == favoured ? 0.5 + lead : 0.5;
    out[t] = {x, x, x, x};
  }
  return out;
}

}  // namespace

TEST(Presets, ApplicationAndStudy) {
  const auto app = ad::application_preset();
  EXPECT_EQ(app.weights.speed, 0.5);
  EXPECT_EQ(app.weights.accuracy, 0.2);
  EXPECT_EQ(app.weights.comfort, 0.15);
  EXPECT_EQ(app.weights.familiarity, 0.15);
  EXPECT_EQ(app.required, 15);
  EXPECT_EQ(app.window, 20);
  EXPECT_EQ(app.margin_threshold, 0.0);
  EXPECT_EQ(app.alpha, 0.8);
  EXPECT_EQ(app.cone_radius, 20.0);
  const auto study = ad::study_preset();
  EXPECT_EQ(study.weights.comfort, 0.2);
  EXPECT_EQ(study.weights.familiarity, 0.1);
  EXPECT_EQ(study.techniques, (std::vector<Technique>{Technique::sticky_ray, Technique::ray_cursor}));
  EXPECT_THROW(ad::load_preset("nonsense"), ad::ConfigError);
}

TEST(Config, JsonRoundTripKeepsHash) {
  const auto study = ad::study_preset();
  const auto back = ad::config_from_json(ad::config_to_json(study));
  EXPECT_EQ(ad::config_hash(back), ad::config_hash(study));
  EXPECT_NE(ad::config_hash(study), ad::config_hash(ad::application_preset()));
}

TEST(Config, ValidationRejectsBadValues) {
  auto c = ad::application_preset();
  c.weights = {0, 0, 0, 0};
  EXPECT_THROW(c.validate(), ad::ConfigError);
  c = ad::application_preset();
  c.required = 21;
  EXPECT_THROW(c.validate(), ad::ConfigError);
  c = ad::application_preset();
  c.familiarity.erase(Technique::ray_cursor);
  EXPECT_THROW(c.validate(), ad::ConfigError);
  EXPECT_THROW(ad::config_from_json(nlohmann::json::parse(R"({"alpha": "high"})")), ad::ConfigError);
}

TEST(Aggregate, MeansAndEmpty) {
  const std::vector<ObjectiveVector> one{{0.1, 0.2, 0.3, 0.4}};
  EXPECT_EQ(*ad::aggregate(one), one[0]);
  const std::vector<ObjectiveVector> two{{0.2, 0, 0, 0}, {0.8, 0, 0, 0}};
  EXPECT_DOUBLE_EQ(ad::aggregate(two)->speed, 0.5);
  EXPECT_FALSE(ad::aggregate({}));
}

TEST(Aggregate, MatchesResummation) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ObjectiveVector> v(240);
  double sum = 0.0;
  for (auto& x : v) {
    x = {u(rng), u(rng), u(rng), u(rng)};
    sum += x.comfort;
  }
  EXPECT_NEAR(ad::aggregate(v)->comfort, sum / 240.0, 1e-12);
}

TEST(Smooth, AlphaOneAndFixedPoint) {
  ad::AdapterState s(Technique::sticky_ray);
  const std::map<Technique, ObjectiveVector> a{{Technique::sticky_ray, {0.3, 0.3, 0.3, 0.3}}};
  const std::map<Technique, ObjectiveVector> b{{Technique::sticky_ray, {0.9, 0.1, 0.2, 0.4}}};
  ad::smooth(a, s, 1.0);
  EXPECT_EQ(ad::smooth(b, s, 1.0).at(Technique::sticky_ray), b.at(Technique::sticky_ray));
  ad::AdapterState f(Technique::sticky_ray);
  for (int k = 0; k < 50; ++k) EXPECT_EQ(ad::smooth(a, f, 0.8).at(Technique::sticky_ray), a.at(Technique::sticky_ray));
}

TEST(Smooth, StepResponse) {
  ad::AdapterState s(Technique::sticky_ray);
  ad::smooth({{Technique::sticky_ray, {0, 0, 0, 0}}}, s, 0.8);
  for (int k = 1; k <= 6; ++k) {
    const auto out = ad::smooth({{Technique::sticky_ray, {1, 1, 1, 1}}}, s, 0.8);
    EXPECT_NEAR(out.at(Technique::sticky_ray).speed, 1.0 - std::pow(0.2, k), 1e-12);
  }
}

TEST(Decide, CurrentOptimalNeverSwitches) {
  const auto c = two_way();
  ad::AdapterState s(c);
  for (int i = 0; i < 100; ++i) EXPECT_FALSE(ad::decide(s, favouring(Technique::sticky_ray), c).switched);
  EXPECT_EQ(s.current, Technique::sticky_ray);
}

TEST(Decide, TiesKeepCurrent) {
  const auto c = two_way();
  ad::AdapterState s(Technique::ray_cursor);
  const auto d = ad::decide(s, favouring(Technique::sticky_ray, 0.0), c);
  EXPECT_EQ(d.optimal, Technique::ray_cursor);
  EXPECT_EQ(d.margin, 0.0);
}

TEST(Decide, WeightsCombineLinearly) {
  const auto c = two_way();
  ad::AdapterState s(c);
  std::map<Technique, ObjectiveVector> sm{{Technique::sticky_ray, {1, 0, 0, 0}}, {Technique::ray_cursor, {0, 1, 1, 1}}};
  const auto d = ad::decide(s, sm, c);
  EXPECT_DOUBLE_EQ(d.score_of(Technique::sticky_ray)->overall, 0.5);
  EXPECT_DOUBLE_EQ(d.score_of(Technique::ray_cursor)->overall, 0.5);
}

TEST(Step, UnselectableTargetScoresMinimum) {
  const auto c = ad::application_preset();
  adaptsel::techniques::ActivationRegion empty;
  empty.target_id = "x";
  const auto s = fixture::scene_of({fixture::sphere("x", {0, 0, 3}, 0.2)});
  const auto ctx = fixture::context(s);
  const auto score = ad::score_target(Technique::ray_casting, empty, ctx, c);
  EXPECT_EQ(score.normalized.speed, 0.0);
  EXPECT_EQ(score.normalized.accuracy, 0.0);
  EXPECT_EQ(score.normalized.comfort, 0.0);
  EXPECT_EQ(score.normalized.familiarity, 0.57);
}

TEST(Step, EmptySpaceCarriesState) {
  const auto c = ad::application_preset();
  ad::AdapterState state(c);
  const auto s = fixture::scene_of({fixture::sphere("x", {0, 0, 3}, 0.2)});
  const auto ctx = fixture::context(s);
  ad::step(ctx, ad::compute_regions(ctx, c), c, state);
  const auto before = state.smoothed;
  const auto window = state.window.size();
  const auto nothing = fixture::context(fixture::scene_of({}));
  const auto d = ad::step(nothing, ad::compute_regions(nothing, c), c, state);
  EXPECT_TRUE(d.empty_space);
  EXPECT_FALSE(d.switched);
  EXPECT_EQ(state.smoothed, before);
  EXPECT_EQ(state.window.size(), window);
}

TEST(Engine, LargeOnAxisTargetIsStable) {
  for (const auto& config : {ad::application_preset(), ad::study_preset()}) {
    auto scene = std::make_shared<const adaptsel::scene::Scene>(
        fixture::scene_of({fixture::sphere("big", {0, 0, 2}, 0.6)}));
    adaptsel::Engine engine(scene, config);
    for (int i = 0; i < 100; ++i) {
      const auto r = engine.process(fixture::pointer(adaptsel::geometry::Vec3::UnitZ(), i / 90.0));
      EXPECT_FALSE(r.decision.switched) << config.name << " frame " << i;
    }
    EXPECT_EQ(engine.active(), config.initial_technique());
  }
}

TEST(Engine, DeterministicAndResettable) {
  auto scene = std::make_shared<const adaptsel::scene::Scene>(fixture::scene_of(
      {fixture::sphere("a", {0.2, 0, 2}, 0.2), fixture::sphere("b", {-0.3, 0.1, 3}, 0.3)}));
  adaptsel::Engine one(scene, ad::application_preset());
  adaptsel::Engine two(scene, ad::application_preset());
  for (int i = 0; i < 10; ++i) {
    const auto p = fixture::pointer(adaptsel::geometry::Vec3(0.01 * i, 0, 1), i / 90.0);
    const auto a = one.process(p);
    const auto b = two.process(p);
    ASSERT_EQ(a.decision.scores.size(), b.decision.scores.size());
    for (std::size_t k = 0; k < a.decision.scores.size(); ++k)
      EXPECT_EQ(a.decision.scores[k].overall, b.decision.scores[k].overall);
  }
  one.reset();
  EXPECT_FALSE(one.state().initialized());
  EXPECT_TRUE(one.state().window.empty());
}
