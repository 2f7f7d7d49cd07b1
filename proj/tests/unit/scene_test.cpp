#include "adaptsel/scene.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "adaptsel/simulator.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace sc = adaptsel::scene;
namespace geo = adaptsel::geometry;
using geo::Vec3;

namespace {

constexpr double kRad = std::numbers::pi / 180.0;

Vec3 at_angle(double h_deg, double v_deg, double distance) {
  return distance * geo::angular_to_local_direction({h_deg, v_deg});
}

// Sphere diameter subtending `radius_deg` of angular radius at `distance`.
double diameter_for(double radius_deg, double distance) { return 2.0 * distance * std::sin(radius_deg * kRad); }

}  // namespace

TEST(SceneIo, MinimalDocument) {
  const auto doc = nlohmann::json::parse(R"({
    "version": 1,
    "targets": [{"id": "a", "shape": "sphere", "position": [0, 1, 2],
                 "rotation_quaternion": [0, 0, 0, 1], "scale": [0.2, 0.2, 0.2]}]
  })");
  const sc::Scene s = sc::load_scene(doc);
  ASSERT_EQ(s.targets.size(), 1u);
  EXPECT_EQ(s.targets[0].id, "a");
  EXPECT_TRUE(s.targets[0].selectable);
}

TEST(SceneIo, DuplicateIdNamesTheId) {
  const auto doc = nlohmann::json::parse(R"({
    "version": 1,
    "targets": [
      {"id": "twin", "shape": "box", "position": [0, 0, 2], "rotation_quaternion": [0, 0, 0, 1], "scale": [1, 1, 1]},
      {"id": "twin", "shape": "box", "position": [1, 0, 2], "rotation_quaternion": [0, 0, 0, 1], "scale": [1, 1, 1]}
    ]
  })");
  try {
    sc::load_scene(doc);
    FAIL() << "expected SceneError";
  } catch (const sc::SceneError& e) {
    EXPECT_NE(std::string(e.what()).find("twin"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("$.targets[1]"), std::string::npos);
  }
}

TEST(SceneIo, SchemaErrorsCarryPaths) {
  EXPECT_THROW(sc::load_scene(nlohmann::json::array()), sc::SceneError);
  EXPECT_THROW(sc::load_scene(nlohmann::json::parse(R"({"targets": []})")), sc::SceneError);
  const auto bad_shape = nlohmann::json::parse(R"({"version": 1, "targets": [{"id": "a", "shape": "torus",
      "position": [0, 0, 1], "rotation_quaternion": [0, 0, 0, 1], "scale": [1, 1, 1]}]})");
  EXPECT_THROW(sc::load_scene(bad_shape), sc::SceneError);
}

TEST(SceneIo, GeneratedSparseRoundTrips) {
  const auto s = adaptsel::sim::generate_environment(
      adaptsel::sim::EnvironmentSpec::study(adaptsel::sim::EnvironmentKind::sparse, 2.5, 1));
  const std::string first = sc::dump_scene(s);
  const std::string second = sc::dump_scene(sc::load_scene(nlohmann::json::parse(first)));
  EXPECT_EQ(first, second);
}

TEST(PointerIo, RejectsNonUnitDirection) {
  auto j = sc::pointer_to_json(fixture::pointer());
  EXPECT_NO_THROW(sc::pointer_from_json(j));
  j["pointing_direction"] = {0.0, 0.0, 2.0};
  EXPECT_THROW(sc::pointer_from_json(j), sc::SceneError);
}

TEST(InteractionSpace, OnAxisIncluded) {
  for (double d : {0.5, 3.0, 40.0}) {
    const auto s = fixture::scene_of({fixture::sphere("a", {0, 0, d}, 0.05)});
    EXPECT_EQ(sc::filter_interaction_space(s, fixture::pointer(), 20.0).size(), 1u);
  }
}

TEST(InteractionSpace, OutsideConeExcludedAndRimIncluded) {
  const auto far = fixture::scene_of({fixture::sphere("a", at_angle(25.0, 0.0, 3.0), diameter_for(1.0, 3.0))});
  EXPECT_TRUE(sc::filter_interaction_space(far, fixture::pointer(), 20.0).empty());
  const auto rim = fixture::scene_of({fixture::sphere("a", at_angle(20.5, 0.0, 3.0), diameter_for(1.0, 3.0))});
  EXPECT_EQ(sc::filter_interaction_space(rim, fixture::pointer(), 20.0).size(), 1u);
}

TEST(ContextExtraction, SingleSphereCentroidAtCentre) {
  const auto s = fixture::scene_of({fixture::sphere("a", at_angle(6.0, -3.0, 2.5), 0.2)});
  const auto ctx = fixture::context(s);
  ASSERT_EQ(ctx.targets.size(), 1u);
  const auto& rec = ctx.targets[0];
  ASSERT_TRUE(rec.visible());
  EXPECT_NEAR(rec.centroid->h, 6.0, 0.05);
  EXPECT_NEAR(rec.centroid->v, -3.0, 0.05);
  EXPECT_NEAR(rec.outline.area(), rec.silhouette.area(), 1e-9);
}

TEST(ContextExtraction, FullyOccludedSphereHasNoOutline) {
  const auto s =
      fixture::scene_of({fixture::sphere("front", {0, 0, 2}, 0.4), fixture::sphere("back", {0, 0, 4}, 0.2)});
  const auto ctx = fixture::context(s);
  for (const auto& rec : ctx.targets) {
    if (rec.id == "back") EXPECT_FALSE(rec.visible());
    if (rec.id == "front") EXPECT_TRUE(rec.visible());
  }
}

TEST(ContextExtraction, HalfOccludedCubeMatchesRaster) {
  const auto s = fixture::scene_of(
      {fixture::cube("front", {-0.25, 0, 2}, 0.5), fixture::cube("back", {0.0, 0.0, 4.0}, 0.8)});
  const auto ctx = fixture::context(s);
  const sc::TargetRecord* back = nullptr;
  const sc::TargetRecord* front = nullptr;
  for (const auto& rec : ctx.targets) (rec.id == "back" ? back : front) = &rec;
  ASSERT_TRUE(back && front && back->visible());
  const auto stats = oracle::raster_difference_area(back->silhouette, std::span(&front->silhouette, 1), 1500);
  EXPECT_NEAR(back->outline.area(), stats, 0.01 * stats);
  const auto r = oracle::rasterize(back->outline, 1500);
  EXPECT_NEAR(back->centroid->h, r.centroid.h, 1e-2);
  EXPECT_NEAR(back->centroid->v, r.centroid.v, 1e-2);
  EXPECT_GT(back->centroid->h, 0.0);
}

TEST(Posture, FullExtensionIsCollinear) {
  const sc::ArmModel arm;
  auto p = fixture::pointer();
  const sc::ArmPosture base = sc::estimate_posture(p, arm);
  p.controller_position = base.shoulder + (arm.upper_arm.length + arm.forearm.length) * Vec3::UnitZ();
  const auto post = sc::estimate_posture(p, arm);
  const Vec3 a = post.elbow - post.shoulder;
  const Vec3 b = post.hand - post.elbow;
  EXPECT_NEAR(a.normalized().cross(b.normalized()).norm(), 0.0, 1e-6);
  EXPECT_FALSE(post.clamped);
}

TEST(Posture, HorizontalForearm) {
  const sc::ArmModel arm;
  auto p = fixture::pointer();
  const Vec3 shoulder = sc::estimate_posture(p, arm).shoulder;
  p.controller_position = shoulder + Vec3(0.0, -arm.upper_arm.length, arm.forearm.length);
  const auto post = sc::estimate_posture(p, arm);
  const Vec3 expected = post.hand - arm.forearm.length * p.pointing_direction;
  EXPECT_NEAR((post.elbow - expected).norm(), 0.0, 1e-9);
}

TEST(Posture, SegmentLengthsHoldForRandomPoses) {
  const sc::ArmModel arm;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vec3 shoulder = sc::estimate_posture(fixture::pointer(), arm).shoulder;
  for (int i = 0; i < 1000; ++i) {
    Vec3 d(u(rng), u(rng), u(rng));
    if (d.norm() < 1e-3) continue;
    const double reach = 0.1 + 0.49 * (0.5 + 0.5 * u(rng));
    auto p = fixture::pointer();
    p.controller_position = shoulder + reach * d.normalized();
    const auto post = sc::estimate_posture(p, arm);
    EXPECT_NEAR((post.elbow - post.shoulder).norm(), arm.upper_arm.length, 1e-3);
    EXPECT_NEAR((post.hand - post.elbow).norm(), arm.forearm.length, 1e-3);
  }
}

TEST(Posture, UnreachableIsClamped) {
  auto p = fixture::pointer();
  p.controller_position = Vec3(0.0, 0.0, 3.0);
  EXPECT_TRUE(sc::estimate_posture(p, sc::ArmModel{}).clamped);
}
