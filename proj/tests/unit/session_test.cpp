#include "adaptsel/session.hpp"

#include <gtest/gtest.h>

#include "adaptsel/simulator.hpp"
#include "fixtures.hpp"

namespace svc = adaptsel::service;
namespace ad = adaptsel::adapter;
namespace sim = adaptsel::sim;
using nlohmann::json;

namespace {

std::shared_ptr<const adaptsel::scene::Scene> sparse() {
  static const auto s = std::make_shared<const adaptsel::scene::Scene>(
      sim::generate_environment(sim::EnvironmentSpec::study(sim::EnvironmentKind::sparse, 2.5, 1)));
  return s;
}

json pointer_msg(const adaptsel::scene::PointerState& p) {
  return {{"v", 1}, {"type", "pointer_update"}, {"pointer", adaptsel::scene::pointer_to_json(p)}};
}

adaptsel::scene::PointerState toward_scene(double t = 0.0) {
  auto p = fixture::pointer(adaptsel::geometry::Vec3(0.05, 0.0, 1.0), t);
  p.controller_position = {0.2, 1.3, 0.3};
  p.hmd_position = {0.0, 1.6, 0.0};
  return p;
}

json without_index(json frame) {
  frame.erase("i");
  return frame;
}

}  // namespace

TEST(Session, OpensWithSceneSummary) {
  svc::Session s("s1", sparse(), ad::application_preset());
  const json hello = s.opened();
  EXPECT_EQ(hello["type"], "session");
  EXPECT_EQ(hello["targets"], 10);
  EXPECT_EQ(hello["technique"], "RayCasting");
  EXPECT_EQ(hello["config_hash"], ad::config_hash(ad::application_preset()));
}

TEST(Session, FrameBroadcastShape) {
  svc::Session s("s1", sparse(), ad::application_preset());
  const json f = s.handle(pointer_msg(toward_scene()));
  ASSERT_EQ(f["type"], "frame") << f.dump();
  EXPECT_EQ(f["i"], 0);
  EXPECT_EQ(f["decision"]["scores"].size(), 3u);
  EXPECT_TRUE(f["decision"]["scores"]["StickyRay"].contains("S_F"));
  EXPECT_FALSE(f["outlines"].empty());
  for (const auto& r : f["regions"]) EXPECT_TRUE(r.contains("aim_center"));
  EXPECT_EQ(s.frames(), 1u);
}

TEST(Session, IdenticalFramesReachFixedPoint) {
  svc::Session s("s1", sparse(), ad::application_preset());
  std::vector<json> frames;
  std::vector<int> switches;
  for (int i = 0; i < 100; ++i) {
    frames.push_back(without_index(s.handle(pointer_msg(toward_scene()))));
    if (frames.back()["decision"]["switched"].get<bool>()) switches.push_back(i);
  }
  // Smoothed scores are constant from the first frame, so the only change
  // a static pointer can cause is one switch once the window fills.
  ASSERT_LE(switches.size(), 1u);
  const int sw = switches.empty() ? 100 : switches[0];
  for (int i = 1; i < 100; ++i) {
    EXPECT_EQ(frames[i]["decision"]["scores"], frames[0]["decision"]["scores"]) << "frame " << i;
    if (i < sw) EXPECT_EQ(frames[i], frames[1]) << "frame " << i;
    if (i > sw + 1) EXPECT_EQ(frames[i], frames[sw + 1]) << "frame " << i;
  }
  if (!switches.empty()) EXPECT_EQ(sw, 14);
}

TEST(Session, SessionsAreIsolated) {
  svc::Session a("s1", sparse(), ad::application_preset());
  svc::Session b("s2", sparse(), ad::application_preset());
  svc::Session fresh("s3", sparse(), ad::application_preset());
  for (int i = 0; i < 30; ++i) a.handle(pointer_msg(toward_scene(i / 90.0)));
  const json fb = without_index(b.handle(pointer_msg(toward_scene())));
  const json ff = without_index(fresh.handle(pointer_msg(toward_scene())));
  json fb_anon = fb, ff_anon = ff;
  fb_anon.erase("session");
  ff_anon.erase("session");
  EXPECT_EQ(fb_anon, ff_anon);
  EXPECT_NE(a.id(), b.id());
}

TEST(Session, ZeroWeightsRejected) {
  svc::Session s("s1", sparse(), ad::application_preset());
  const json r = s.handle({{"v", 1},
                           {"type", "set_weights"},
                           {"weights", {{"speed", 0}, {"accuracy", 0}, {"comfort", 0}, {"familiarity", 0}}}});
  EXPECT_EQ(r["type"], "error");
  EXPECT_EQ(s.engine().config().weights.speed, 0.5);
  const json neg = s.handle({{"v", 1}, {"type", "set_weights"}, {"weights", {{"speed", -1}}}});
  EXPECT_EQ(neg["type"], "error");
  const json ok = s.handle({{"v", 1}, {"type", "set_weights"}, {"weights", {{"speed", 0.9}}}});
  EXPECT_EQ(ok["type"], "ack");
  EXPECT_EQ(s.engine().config().weights.speed, 0.9);
}

TEST(Session, ResetMatchesFreshOpen) {
  svc::Session used("s1", sparse(), ad::application_preset());
  svc::Session fresh("s1", sparse(), ad::application_preset());
  for (int i = 0; i < 40; ++i) used.handle(pointer_msg(toward_scene(i / 90.0)));
  EXPECT_EQ(used.handle({{"v", 1}, {"type", "reset"}})["type"], "ack");
  EXPECT_EQ(used.opened(), fresh.opened());
  EXPECT_EQ(used.handle(pointer_msg(toward_scene())), fresh.handle(pointer_msg(toward_scene())));
}

TEST(Session, MalformedMessagesKeepSessionAlive) {
  svc::Session s("s1", sparse(), ad::application_preset());
  EXPECT_EQ(json::parse(s.handle_text("{not json"))["type"], "error");
  EXPECT_EQ(s.handle({{"type", "reset"}})["type"], "error");
  EXPECT_EQ(s.handle({{"v", 2}, {"type", "reset"}})["type"], "error");
  EXPECT_EQ(s.handle({{"v", 1}, {"type", "teleport"}})["type"], "error");
  EXPECT_EQ(s.handle({{"v", 1}, {"type", "pointer_update"}})["type"], "error");
  EXPECT_EQ(s.handle({{"v", 1}, {"type", "set_preset"}, {"name", "bogus"}})["type"], "error");
  EXPECT_EQ(s.handle(pointer_msg(toward_scene()))["type"], "frame");
}

TEST(Session, PresetAndSceneChanges) {
  auto dense = std::make_shared<const adaptsel::scene::Scene>(
      fixture::scene_of({fixture::sphere("only", {0, 1.3, 3}, 0.3)}));
  svc::Session s("s1", sparse(), ad::application_preset(), [&](const std::string& name) {
    return name == "one" ? dense : nullptr;
  });
  json r = s.handle({{"v", 1}, {"type", "set_preset"}, {"name", "study"}});
  EXPECT_EQ(r["preset"], "study");
  EXPECT_EQ(r["technique"], "StickyRay");
  r = s.handle({{"v", 1}, {"type", "load_scene"}, {"name", "one"}});
  EXPECT_EQ(r["targets"], 1);
  EXPECT_EQ(s.handle({{"v", 1}, {"type", "load_scene"}, {"name", "missing"}})["type"], "error");
  r = s.handle({{"v", 1}, {"type", "load_scene"}, {"scene", adaptsel::scene::save_scene(*sparse())}});
  EXPECT_EQ(r["targets"], 10);
}
