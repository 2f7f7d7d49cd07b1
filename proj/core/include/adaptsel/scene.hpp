#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "adaptsel/geometry.hpp"

namespace adaptsel::scene {

using geometry::AngularPoint;
using geometry::Polygon2D;
using geometry::Vec3;

/// Raised for malformed scene documents; the message starts with a JSON path.
class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Target {
  std::string id;
  geometry::Shape shape = geometry::Shape::sphere;
  geometry::Pose pose;
  bool selectable = true;

  [[nodiscard]] double bounding_radius() const;
};

struct Scene {
  int version = 1;
  std::vector<Target> targets;
  /// Optional designated target carried by generated scenes.
  std::optional<std::string> designated_target;

  [[nodiscard]] const Target* find(std::string_view id) const;
  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view id) const;
};

std::string_view shape_name(geometry::Shape shape);
std::optional<geometry::Shape> parse_shape(std::string_view name);

Scene load_scene(const nlohmann::json& document);
Scene load_scene_file(const std::string& path);
nlohmann::json save_scene(const Scene& scene);
/// Canonical text form (two-space indent, trailing newline).
std::string dump_scene(const Scene& scene);
void save_scene_file(const Scene& scene, const std::string& path);

struct PointerState {
  Vec3 controller_position = Vec3::Zero();
  Vec3 pointing_direction = Vec3::UnitZ();
  Vec3 hmd_position = Vec3::Zero();
  Vec3 hmd_forward = Vec3::UnitZ();
  bool trigger = false;
  double trackpad_delta = 0.0;
  double timestamp = 0.0;
};

nlohmann::json pointer_to_json(const PointerState& p);
/// Throws SceneError (prefixed with `path`) on missing or non-unit vectors.
PointerState pointer_from_json(const nlohmann::json& j, const std::string& path = "pointer");

struct Segment {
  double length = 0.0;
  double mass = 0.0;
  double com_offset = 0.0;
};

/// Average adult arm: upper arm, forearm and hand segment data.
struct ArmModel {
  Segment upper_arm{0.33, 2.1, 0.132};
  Segment forearm{0.269, 1.2, 0.117};
  Segment hand{0.191, 0.4, 0.07};
  /// Lateral offset of the shoulder toward the dominant hand (+ = right).
  double shoulder_lateral = 0.19;
  double shoulder_drop = 0.22;

  [[nodiscard]] double total_mass() const;
  /// Throws std::invalid_argument if any segment is non-positive or its
  /// centre of mass lies beyond its length.
  void validate() const;
};

struct ArmPosture {
  Vec3 shoulder = Vec3::Zero();
  Vec3 elbow = Vec3::Zero();
  Vec3 hand = Vec3::Zero();
  /// Direction of the hand segment (the controller is held along the ray).
  Vec3 hand_direction = Vec3::UnitZ();
  bool clamped = false;
};

/// Shoulder placed from the HMD, elbow from the two-link closed form with a
/// vertical hinge plane (elbow down), hand at the controller.
ArmPosture estimate_posture(const PointerState& pointer, const ArmModel& arm);

struct TargetRecord {
  std::size_t index = 0;  ///< index into Scene::targets
  std::string id;
  Polygon2D silhouette;   ///< projected convex outline before any clipping
  Polygon2D outline;      ///< cone- and occlusion-clipped outline
  std::optional<AngularPoint> centroid;
  Vec3 position_local = Vec3::Zero();  ///< controller frame, meters
  double depth = 0.0;                  ///< distance controller -> centre
  double angular_distance = 0.0;       ///< degrees, origin -> centroid (or centre)
  double bounding_radius = 0.0;

  [[nodiscard]] bool visible() const { return centroid.has_value(); }
};

struct ContextFrame {
  geometry::ControllerFrame frame;
  std::vector<TargetRecord> targets;
  ArmPosture posture;
  PointerState pointer;
  double cone_radius = 20.0;
};

/// Indices of targets whose silhouette reaches into the cone of `cone_radius`.
std::vector<std::size_t> filter_interaction_space(const Scene& scene, const PointerState& pointer,
                                                  double cone_radius);

ContextFrame extract_context(const Scene& scene, const PointerState& pointer, const ArmModel& arm,
                             double cone_radius);

}  // namespace adaptsel::scene
