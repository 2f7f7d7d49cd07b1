#include "adaptsel/engine.hpp"

#include <stdexcept>

namespace adaptsel {

namespace {

techniques::TechniqueState initial_technique_state(const adapter::AdapterConfig& config) {
  techniques::TechniqueState t;
  t.kind = config.initial_technique();
  t.sticky_rule = config.sticky_highlight;
  return t;
}

}  // namespace

Engine::Engine(std::shared_ptr<const scene::Scene> scene, adapter::AdapterConfig config)
    : scene_(std::move(scene)),
      config_(std::move(config)),
      state_(config_),
      technique_(initial_technique_state(config_)) {
  if (!scene_) throw std::invalid_argument("Engine: scene is null");
  config_.validate();
}

FrameResult Engine::process(const scene::PointerState& pointer) {
  FrameResult out;
  out.context = scene::extract_context(*scene_, pointer, config_.arm, config_.cone_radius);
  out.regions = adapter::compute_regions(out.context, config_);
  out.decision = adapter::step(out.context, out.regions, config_, state_);
  technique_.kind = state_.current;
  out.highlight = techniques::highlight(technique_, out.context);
  return out;
}

void Engine::reset() {
  state_ = adapter::AdapterState(config_);
  technique_ = initial_technique_state(config_);
}

}  // namespace adaptsel
