#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "adaptsel/adapter.hpp"
#include "adaptsel/engine.hpp"
#include "adaptsel/scene.hpp"

namespace adaptsel::service {

inline constexpr int kProtocolVersion = 1;

/// Display colour announced for each technique.
std::string_view technique_color(techniques::Technique t);

/// Resolves a scene name from a load_scene message; returns null when unknown.
using SceneResolver = std::function<std::shared_ptr<const scene::Scene>(const std::string&)>;

/// Render geometry and decision summary for one processed pointer sample.
nlohmann::json frame_broadcast(const std::string& session_id, std::size_t index, const FrameResult& frame,
                               const adapter::AdapterConfig& config);

/// One client session. Messages are handled strictly in order; each call
/// returns exactly one reply (a frame, an acknowledgement or an error) and a
/// failed message never changes the session state.
class Session {
 public:
  Session(std::string id, std::shared_ptr<const scene::Scene> scene, adapter::AdapterConfig config,
          SceneResolver resolver = {});

  nlohmann::json handle(const nlohmann::json& message);
  /// Parses `text` first; malformed JSON yields an error reply.
  std::string handle_text(std::string_view text);

  /// Greeting sent when the session opens.
  [[nodiscard]] nlohmann::json opened() const;

  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] const Engine& engine() const { return *engine_; }
  [[nodiscard]] std::size_t frames() const { return frames_; }

 private:
  nlohmann::json on_pointer_update(const nlohmann::json& message);
  nlohmann::json on_set_preset(const nlohmann::json& message);
  nlohmann::json on_set_weights(const nlohmann::json& message);
  nlohmann::json on_load_scene(const nlohmann::json& message);
  nlohmann::json on_reset();
  nlohmann::json ack(std::string_view type) const;
  nlohmann::json error(std::string_view request, const std::string& message) const;
  void rebuild(std::shared_ptr<const scene::Scene> scene, adapter::AdapterConfig config);

  std::string id_;
  SceneResolver resolver_;
  std::unique_ptr<Engine> engine_;
  std::size_t frames_ = 0;
};

}  // namespace adaptsel::service
