#include "adaptsel/techniques.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "adaptsel/simulator.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace tech = adaptsel::techniques;
namespace geo = adaptsel::geometry;
namespace sc = adaptsel::scene;
using geo::AngularPoint;
using geo::Polygon2D;
using geo::Vec3;

namespace {

constexpr double kRad = std::numbers::pi / 180.0;

Vec3 at_angle(double h_deg, double v_deg, double distance) {
  return distance * geo::angular_to_local_direction({h_deg, v_deg});
}

Polygon2D shifted_disk(double radius, AngularPoint centre) {
  Polygon2D p = geo::disk_polygon(radius);
  for (auto& v : p.vertices) v = v + centre;
  return p;
}

const tech::ActivationRegion& region_of(const std::vector<tech::ActivationRegion>& regions, const std::string& id) {
  return *std::find_if(regions.begin(), regions.end(), [&](const auto& r) { return r.target_id == id; });
}

}  // namespace

TEST(TechniqueNames, RoundTrip) {
  for (auto t : tech::kAllTechniques) EXPECT_EQ(tech::parse_technique(tech::technique_name(t)), t);
  EXPECT_FALSE(tech::parse_technique("Laser"));
}

TEST(MeasureRegion, CircleOffAxis) {
  const auto r = tech::measure_region("t", shifted_disk(1.25, {10.0, 0.0}));
  ASSERT_TRUE(r.selectable);
  EXPECT_NEAR(r.width, 2.5, 1e-6);
  EXPECT_NEAR(r.amplitude, 10.0, 1e-6);
  EXPECT_NEAR(r.box.x1, -1.25, 1e-6);
  EXPECT_NEAR(r.box.x2, 1.25, 1e-6);
  EXPECT_NEAR(r.box.y1, 1.25, 1e-6);
  EXPECT_NEAR(r.box.y2, -1.25, 1e-6);
}

TEST(MeasureRegion, EmptyIsUnselectable) {
  const auto r = tech::measure_region("t", {});
  EXPECT_FALSE(r.selectable);
  EXPECT_EQ(r.width, 0.0);
}

TEST(MeasureRegion, HalfOccludedCircleMatchesRaster) {
  const Polygon2D circle = shifted_disk(2.0, {8.0, 3.0});
  const Polygon2D cover{{{8.0, -5.0}, {15.0, -5.0}, {15.0, 10.0}, {8.0, 10.0}}, {}};
  const Polygon2D visible = geo::polygon_difference(circle, std::span(&cover, 1));
  const auto r = tech::measure_region("t", visible);
  const auto raster = oracle::rasterize(visible, 1500);
  EXPECT_NEAR(r.amplitude, std::hypot(raster.centroid.h, raster.centroid.v), 0.05);
  // Width by marching along the movement line through the raster centroid.
  const AngularPoint axis = (1.0 / std::hypot(raster.centroid.h, raster.centroid.v)) * raster.centroid;
  double lo = 1e9, hi = -1e9;
  for (double t = 0.0; t < 20.0; t += 1e-4)
    if (oracle::inside(visible, t * axis)) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  EXPECT_NEAR(r.width, hi - lo, 0.05);
}

TEST(StickyRayRegions, SingleTargetGetsDisk) {
  const auto s = fixture::scene_of({fixture::sphere("a", at_angle(5.0, 2.0, 3.0), 0.2)});
  const auto ctx = fixture::context(s);
  const auto regions = tech::stickyray_regions(ctx);
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_NEAR(regions[0].region.area(), geo::disk_polygon(20.0).area(), 1e-9);
  const auto hits = geo::line_region_intersections({0.0, 0.0}, regions[0].axis, geo::disk_polygon(20.0));
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_NEAR(regions[0].width, hits[1] - hits[0], 1e-9);
}

TEST(StickyRayRegions, SymmetricTargets) {
  const auto s = fixture::scene_of({fixture::sphere("l", at_angle(-6.0, 0.0, 3.0), 0.2),
                                    fixture::sphere("r", at_angle(6.0, 0.0, 3.0), 0.2)});
  const auto regions = tech::stickyray_regions(fixture::context(s));
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_NEAR(regions[0].region.area(), regions[1].region.area(), 1e-6);
  EXPECT_NEAR(regions[0].amplitude, regions[1].amplitude, 1e-6);
}

TEST(StickyRayRegions, FlatSceneCellsDominateOutlines) {
  using namespace adaptsel::sim;
  const auto spec = EnvironmentSpec::study(EnvironmentKind::flat, 2.5, 3);
  const auto s = generate_environment(spec);
  sc::PointerState p = fixture::pointer((spec.region_center() - Vec3(0.2, 1.3, 0.3)).normalized());
  p.controller_position = {0.2, 1.3, 0.3};
  p.hmd_position = spec.viewer;
  const auto ctx = fixture::context(s, p);
  const auto sticky = tech::stickyray_regions(ctx);
  const auto ray = tech::raycast_regions(ctx);
  int visible = 0, dominated = 0;
  for (std::size_t i = 0; i < ctx.targets.size(); ++i) {
    if (!ctx.targets[i].visible()) continue;
    ++visible;
    EXPECT_TRUE(geo::contains(sticky[i].region, *ctx.targets[i].centroid)) << ctx.targets[i].id;
    dominated += sticky[i].width >= ray[i].width - 1e-9;
  }
  ASSERT_GT(visible, 0);
  EXPECT_GE(dominated, 0.95 * visible);
}

TEST(RayCursorRegions, SingleTargetFillsCone) {
  const auto s = fixture::scene_of({fixture::sphere("a", at_angle(3.0, 1.0, 3.0), 0.2)});
  const auto regions = tech::raycursor_regions(fixture::context(s));
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_NEAR(regions[0].region.area(), geo::disk_polygon(20.0).area(), 1e-6);
}

TEST(RayCursorRegions, DepthDisambiguation) {
  const auto s =
      fixture::scene_of({fixture::sphere("front", {0, 0, 2}, 0.4), fixture::sphere("back", {0, 0, 4}, 0.2)});
  const auto ctx = fixture::context(s);
  const auto cursor = tech::raycursor_regions(ctx);
  const auto ray = tech::raycast_regions(ctx);
  EXPECT_TRUE(region_of(cursor, "front").selectable);
  EXPECT_TRUE(region_of(cursor, "back").selectable);
  EXPECT_FALSE(region_of(ray, "back").selectable);
}

TEST(RayCursorRegions, InteractionBoxEnclosesTargets) {
  const auto s = fixture::scene_of({fixture::sphere("a", at_angle(19.0, 0.0, 6.0), 0.3),
                                    fixture::sphere("b", at_angle(-3.0, 2.0, 1.0), 0.1)});
  const auto ctx = fixture::context(s);
  const auto box = tech::interaction_box(ctx, {});
  for (const auto& rec : ctx.targets) EXPECT_TRUE(box.contains(rec.position_local));
  EXPECT_NEAR(box.lo.z(), 0.1, 1e-12);
}

TEST(Highlight, RayCastingHitsContainingTarget) {
  const auto s = fixture::scene_of({fixture::sphere("a", {0, 0, 3}, 0.3), fixture::sphere("b", at_angle(8, 0, 3), 0.3)});
  tech::TechniqueState st;
  st.kind = tech::Technique::ray_casting;
  EXPECT_EQ(tech::highlight(st, fixture::context(s)).target_id, "a");
  const auto empty = fixture::scene_of({fixture::sphere("b", at_angle(8, 0, 3), 0.3)});
  EXPECT_FALSE(tech::highlight(st, fixture::context(empty)).target_id);
}

TEST(Highlight, StickyRayPicksNearestOutline) {
  const double r = 0.5;
  const double d = 3.0;
  const double diameter = 2.0 * d * std::sin(r * kRad);
  const auto s = fixture::scene_of({fixture::sphere("near", at_angle(2.0 + r, 0, d), diameter),
                                    fixture::sphere("far", at_angle(-5.0 - r, 0, d), diameter)});
  tech::TechniqueState st;
  st.kind = tech::Technique::sticky_ray;
  const auto h = tech::highlight(st, fixture::context(s));
  EXPECT_EQ(h.target_id, "near");
  ASSERT_TRUE(h.bent_ray_endpoint);
  EXPECT_GT(h.bent_ray_endpoint->h, 0.0);
}

TEST(Highlight, RayCursorReachesRearTarget) {
  const auto s =
      fixture::scene_of({fixture::sphere("front", {0, 0, 2}, 0.4), fixture::sphere("back", {0, 0, 4}, 0.2)});
  tech::TechniqueState st;
  st.kind = tech::Technique::ray_cursor;
  EXPECT_EQ(tech::highlight(st, fixture::context(s, fixture::pointer(Vec3::UnitZ(), 0.0))).target_id, "front");
  // Swipe forward, then release: snapping stays off for a second.
  auto p = fixture::pointer(Vec3::UnitZ(), 0.1);
  p.trackpad_delta = (4.0 - st.cursor_depth) / tech::cursor_gain(0.0);
  auto h = tech::highlight(st, fixture::context(s, p));
  EXPECT_NEAR(h.cursor_depth, 4.0, 1e-9);
  EXPECT_EQ(h.target_id, "back");
  h = tech::highlight(st, fixture::context(s, fixture::pointer(Vec3::UnitZ(), 0.2)));
  EXPECT_EQ(h.target_id, "back");
  EXPECT_FALSE(h.snapped);
  h = tech::highlight(st, fixture::context(s, fixture::pointer(Vec3::UnitZ(), 1.3)));
  EXPECT_TRUE(h.snapped);
  EXPECT_EQ(h.target_id, "front");
}

TEST(Highlight, CursorGainGrowsWithSpeed) {
  EXPECT_LT(tech::cursor_gain(0.0), tech::cursor_gain(45.0));
  EXPECT_EQ(tech::cursor_gain(tech::kCursorSpeedCap), tech::cursor_gain(10.0 * tech::kCursorSpeedCap));
}
