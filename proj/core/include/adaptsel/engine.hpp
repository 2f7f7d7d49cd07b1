#pragma once

#include <memory>

#include "adaptsel/adapter.hpp"
#include "adaptsel/scene.hpp"
#include "adaptsel/techniques.hpp"

namespace adaptsel {

/// Everything one frame of the pipeline produces.
struct FrameResult {
  scene::ContextFrame context;
  adapter::RegionSet regions;
  adapter::FrameDecision decision;
  techniques::Highlight highlight;
};

/// Per-session pipeline: context extraction, activation regions, adapter
/// step and the highlight of the technique active after the step.
class Engine {
 public:
  Engine(std::shared_ptr<const scene::Scene> scene, adapter::AdapterConfig config);

  FrameResult process(const scene::PointerState& pointer);
  /// Back to the state of a freshly constructed engine.
  void reset();

  [[nodiscard]] const scene::Scene& scene() const { return *scene_; }
  [[nodiscard]] std::shared_ptr<const scene::Scene> scene_ptr() const { return scene_; }
  [[nodiscard]] const adapter::AdapterConfig& config() const { return config_; }
  [[nodiscard]] const adapter::AdapterState& state() const { return state_; }
  [[nodiscard]] const techniques::TechniqueState& technique_state() const { return technique_; }
  [[nodiscard]] techniques::Technique active() const { return state_.current; }

 private:
  std::shared_ptr<const scene::Scene> scene_;
  adapter::AdapterConfig config_;
  adapter::AdapterState state_;
  techniques::TechniqueState technique_;
};

}  // namespace adaptsel
