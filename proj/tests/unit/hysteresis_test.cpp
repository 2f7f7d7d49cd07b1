#include <vector>

#include <gtest/gtest.h>

#include "adaptsel/adapter.hpp"

namespace ad = adaptsel::adapter;
using adaptsel::objectives::ObjectiveVector;
using adaptsel::techniques::Technique;

namespace {

constexpr Technique A = Technique::sticky_ray;
constexpr Technique B = Technique::ray_cursor;

ad::AdapterConfig config() {
  ad::AdapterConfig c = ad::study_preset();
  c.required = 15;
  c.window = 20;
  c.margin_threshold = 0.0;
  return c;
}

std::map<Technique, ObjectiveVector> frame(Technique favoured) {
  const ObjectiveVector hi{0.7, 0.7, 0.7, 0.7};
  const ObjectiveVector lo{0.4, 0.4, 0.4, 0.4};
  return {{A, favoured == A ? hi : lo}, {B, favoured == B ? hi : lo}};
}

// Runs a stream of favoured techniques; returns the frame indices that switched.
std::vector<int> run(const std::vector<Technique>& stream, const ad::AdapterConfig& c, ad::AdapterState& s) {
  std::vector<int> switches;
  for (int i = 0; i < static_cast<int>(stream.size()); ++i)
    if (ad::decide(s, frame(stream[i]), c).switched) switches.push_back(i);
  return switches;
}

// 20 frames in which B leads on exactly `b_frames` of them, B frames last.
std::vector<Technique> window_with(int b_frames) {
  std::vector<Technique> out(20 - b_frames, A);
  out.insert(out.end(), b_frames, B);
  return out;
}

}  // namespace

TEST(Hysteresis, SwitchesAtFifteenOfTwenty) {
  const auto c = config();
  ad::AdapterState s(c);
  // B leads on 15 of the 20 frames, interleaved with A frames.
  std::vector<Technique> stream;
  for (int i = 0; i < 20; ++i) stream.push_back(i % 4 == 0 ? A : B);
  const auto sw = run(stream, c, s);
  ASSERT_EQ(sw.size(), 1u);
  EXPECT_EQ(sw[0], 19);
  EXPECT_EQ(s.current, B);
}

TEST(Hysteresis, NoSwitchAtFourteen) {
  const auto c = config();
  ad::AdapterState s(c);
  EXPECT_TRUE(run(window_with(14), c, s).empty());
  EXPECT_EQ(s.current, A);
}

TEST(Hysteresis, SwitchOnTheFifteenthSupportingFrame) {
  const auto c = config();
  ad::AdapterState s(c);
  const auto sw = run(window_with(15), c, s);
  ASSERT_EQ(sw.size(), 1u);
  EXPECT_EQ(sw[0], 19);
}

TEST(Hysteresis, NoReswitchWithinFifteenFrames) {
  const auto c = config();
  ad::AdapterState s(c);
  std::vector<Technique> stream(15, B);
  stream.insert(stream.end(), 30, A);
  const auto sw = run(stream, c, s);
  ASSERT_EQ(sw.size(), 2u);
  EXPECT_EQ(sw[0], 14);
  EXPECT_EQ(sw[1] - sw[0], 15);
}

TEST(Hysteresis, MarginThresholdFiltersWeakLeads) {
  auto c = config();
  c.margin_threshold = 0.5;
  ad::AdapterState s(c);
  EXPECT_TRUE(run(std::vector<Technique>(40, B), c, s).empty());
}

TEST(Hysteresis, UniformWeightScalingIsInvariant) {
  const auto base = config();
  std::vector<Technique> stream;
  for (int i = 0; i < 200; ++i) stream.push_back((i / 7 + i / 13) % 3 == 0 ? A : B);
  for (double factor : {0.001, 0.5, 3.0, 1000.0}) {
    auto scaled = base;
    scaled.weights = base.weights.scaled(factor);
    ad::AdapterState s1(base), s2(scaled);
    for (Technique t : stream) {
      const auto d1 = ad::decide(s1, frame(t), base);
      const auto d2 = ad::decide(s2, frame(t), scaled);
      ASSERT_EQ(d1.optimal, d2.optimal);
      ASSERT_EQ(d1.switched, d2.switched);
      ASSERT_EQ(d1.active(), d2.active());
    }
  }
}
