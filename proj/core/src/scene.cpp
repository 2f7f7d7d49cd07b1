#include "adaptsel/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace adaptsel::scene {

using nlohmann::json;
namespace geo = adaptsel::geometry;

double Target::bounding_radius() const {
  return geo::unit_bounding_radius(shape) * pose.scale.cwiseAbs().maxCoeff();
}

const Target* Scene::find(std::string_view id) const {
  for (const Target& t : targets)
    if (t.id == id) return &t;
  return nullptr;
}

std::optional<std::size_t> Scene::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < targets.size(); ++i)
    if (targets[i].id == id) return i;
  return std::nullopt;
}

std::string_view shape_name(geo::Shape shape) {
  switch (shape) {
    case geo::Shape::sphere: return "sphere";
    case geo::Shape::box: return "box";
    case geo::Shape::cylinder: return "cylinder";
    case geo::Shape::capsule: return "capsule";
  }
  return "sphere";
}

std::optional<geo::Shape> parse_shape(std::string_view name) {
  if (name == "sphere") return geo::Shape::sphere;
  if (name == "box" || name == "cube") return geo::Shape::box;
  if (name == "cylinder") return geo::Shape::cylinder;
  if (name == "capsule") return geo::Shape::capsule;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Document I/O

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SceneError(path + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

template <std::size_t N>
std::array<double, N> numbers(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != N) fail(path, "expected an array of " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = number(j[i], path + "[" + std::to_string(i) + "]");
  return out;
}

Vec3 vec3(const json& j, const std::string& path) {
  const auto a = numbers<3>(j, path);
  return {a[0], a[1], a[2]};
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

Scene load_scene(const json& document) {
  if (!document.is_object()) fail("$", "scene document must be an object");
  Scene scene;
  const json& version = member(document, "version", "$");
  if (!version.is_number_integer()) fail("$.version", "expected an integer");
  scene.version = version.get<int>();
  if (scene.version != 1) fail("$.version", "unsupported version " + std::to_string(scene.version));

  const json& targets = member(document, "targets", "$");
  if (!targets.is_array()) fail("$.targets", "expected an array");
  std::unordered_set<std::string> seen;
  scene.targets.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::string path = "$.targets[" + std::to_string(i) + "]";
    const json& t = targets[i];
    if (!t.is_object()) fail(path, "expected an object");
    Target target;
    const json& id = member(t, "id", path);
    if (!id.is_string() || id.get<std::string>().empty()) fail(path + ".id", "expected a non-empty string");
    target.id = id.get<std::string>();
    if (!seen.insert(target.id).second) fail(path + ".id", "duplicate target id '" + target.id + "'");

    const json& shape = member(t, "shape", path);
    if (!shape.is_string()) fail(path + ".shape", "expected a string");
    const auto parsed = parse_shape(shape.get<std::string>());
    if (!parsed) fail(path + ".shape", "unknown shape '" + shape.get<std::string>() + "'");
    target.shape = *parsed;

    target.pose.position = vec3(member(t, "position", path), path + ".position");
    const auto q = numbers<4>(member(t, "rotation_quaternion", path), path + ".rotation_quaternion");
    target.pose.rotation = geo::Quat(q[3], q[0], q[1], q[2]);
    const double qn = target.pose.rotation.norm();
    if (std::abs(qn - 1.0) > 1e-6) fail(path + ".rotation_quaternion", "must be unit length");
    target.pose.scale = vec3(member(t, "scale", path), path + ".scale");
    for (int k = 0; k < 3; ++k)
      if (target.pose.scale[k] <= 0.0) fail(path + ".scale[" + std::to_string(k) + "]", "must be > 0");
    if (auto it = t.find("selectable"); it != t.end()) {
      if (!it->is_boolean()) fail(path + ".selectable", "expected a boolean");
      target.selectable = it->get<bool>();
    }
    scene.targets.push_back(std::move(target));
  }
  if (auto it = document.find("designated_target"); it != document.end() && !it->is_null()) {
    if (!it->is_string()) fail("$.designated_target", "expected a string");
    const std::string id = it->get<std::string>();
    if (!seen.contains(id)) fail("$.designated_target", "unknown target id '" + id + "'");
    scene.designated_target = id;
  }
  return scene;
}

Scene load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError(path + ": cannot open file");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SceneError(path + ": " + e.what());
  }
  return load_scene(doc);
}

json save_scene(const Scene& scene) {
  json doc;
  doc["version"] = scene.version;
  json targets = json::array();
  for (const Target& t : scene.targets) {
    const auto& q = t.pose.rotation;
    targets.push_back({{"id", t.id},
                       {"shape", std::string(shape_name(t.shape))},
                       {"position", vec3_json(t.pose.position)},
                       {"rotation_quaternion", json::array({q.x(), q.y(), q.z(), q.w()})},
                       {"scale", vec3_json(t.pose.scale)},
                       {"selectable", t.selectable}});
  }
  doc["targets"] = std::move(targets);
  if (scene.designated_target) doc["designated_target"] = *scene.designated_target;
  return doc;
}

std::string dump_scene(const Scene& scene) { return save_scene(scene).dump(2) + "\n"; }

void save_scene_file(const Scene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SceneError(path + ": cannot open file for writing");
  out << dump_scene(scene);
}

json pointer_to_json(const PointerState& p) {
  return {{"controller_position", vec3_json(p.controller_position)},
          {"pointing_direction", vec3_json(p.pointing_direction)},
          {"hmd_position", vec3_json(p.hmd_position)},
          {"hmd_forward", vec3_json(p.hmd_forward)},
          {"trigger", p.trigger},
          {"trackpad_delta", p.trackpad_delta},
          {"timestamp", p.timestamp}};
}

PointerState pointer_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  PointerState p;
  p.controller_position = vec3(member(j, "controller_position", path), path + ".controller_position");
  p.pointing_direction = vec3(member(j, "pointing_direction", path), path + ".pointing_direction");
  p.hmd_position = vec3(member(j, "hmd_position", path), path + ".hmd_position");
  p.hmd_forward = vec3(member(j, "hmd_forward", path), path + ".hmd_forward");
  if (auto it = j.find("trigger"); it != j.end()) {
    if (!it->is_boolean()) fail(path + ".trigger", "expected a boolean");
    p.trigger = it->get<bool>();
  }
  if (auto it = j.find("trackpad_delta"); it != j.end()) p.trackpad_delta = number(*it, path + ".trackpad_delta");
  if (auto it = j.find("timestamp"); it != j.end()) p.timestamp = number(*it, path + ".timestamp");
  if (std::abs(p.pointing_direction.norm() - 1.0) > 1e-6) fail(path + ".pointing_direction", "must be unit length");
  if (std::abs(p.hmd_forward.norm() - 1.0) > 1e-6) fail(path + ".hmd_forward", "must be unit length");
  return p;
}

// ---------------------------------------------------------------------------
// Arm model

double ArmModel::total_mass() const { return upper_arm.mass + forearm.mass + hand.mass; }

void ArmModel::validate() const {
  for (const Segment* s : {&upper_arm, &forearm, &hand}) {
    if (!(s->length > 0.0) || !(s->mass > 0.0) || !(s->com_offset > 0.0))
      throw std::invalid_argument("arm segment values must be positive");
    if (s->com_offset > s->length) throw std::invalid_argument("arm segment centre of mass beyond its length");
  }
}

ArmPosture estimate_posture(const PointerState& pointer, const ArmModel& arm) {
  ArmPosture posture;
  Vec3 heading(pointer.hmd_forward.x(), 0.0, pointer.hmd_forward.z());
  if (heading.norm() < 1e-9) heading = Vec3::UnitZ();
  heading.normalize();
  const Vec3 lateral = Vec3::UnitY().cross(heading);  // right of the heading
  posture.shoulder = pointer.hmd_position + arm.shoulder_lateral * lateral - arm.shoulder_drop * Vec3::UnitY();

  const double lu = arm.upper_arm.length;
  const double lf = arm.forearm.length;
  Vec3 to_hand = pointer.controller_position - posture.shoulder;
  double reach = to_hand.norm();
  Vec3 dir = reach > 1e-12 ? Vec3(to_hand / reach) : heading;
  const double max_reach = lu + lf;
  const double min_reach = std::abs(lu - lf);
  if (reach > max_reach + 1e-9) {
    reach = max_reach;
    posture.clamped = true;
  } else if (reach < min_reach - 1e-9) {
    reach = min_reach;
    posture.clamped = true;
  }
  posture.hand = posture.shoulder + reach * dir;

  // Bend direction: downward within the vertical plane through the shoulder
  // and the hand; for a vertical reach fall back to "elbow behind".
  Vec3 bend = -(Vec3::UnitY() - Vec3::UnitY().dot(dir) * dir);
  if (bend.norm() < 1e-9) bend = -(heading - heading.dot(dir) * dir);
  bend.normalize();
  const double cos_a = std::clamp((lu * lu + reach * reach - lf * lf) / (2.0 * lu * reach), -1.0, 1.0);
  const double sin_a = std::sqrt(std::max(0.0, 1.0 - cos_a * cos_a));
  posture.elbow = posture.shoulder + lu * (cos_a * dir + sin_a * bend);
  posture.hand_direction = pointer.pointing_direction.normalized();
  return posture;
}

// ---------------------------------------------------------------------------
// Context extraction

namespace {

constexpr double kRadPerDeg = std::numbers::pi / 180.0;
constexpr double kDegPerRad = 180.0 / std::numbers::pi;

struct Coarse {
  Vec3 local;
  double depth = 0.0;
  double center_angle = 0.0;  // true angle from the pointing axis, degrees
  double angular_radius = 0.0;
  double bounding_radius = 0.0;
};

Coarse coarse_of(const Target& t, const geo::ControllerFrame& frame) {
  Coarse c;
  c.local = frame.to_local(t.pose.position);
  c.depth = c.local.norm();
  c.bounding_radius = t.bounding_radius();
  if (c.depth <= c.bounding_radius) {
    c.center_angle = 0.0;
    c.angular_radius = 180.0;
  } else {
    c.center_angle = std::acos(std::clamp(c.local.z() / c.depth, -1.0, 1.0)) * kDegPerRad;
    c.angular_radius = std::asin(c.bounding_radius / c.depth) * kDegPerRad;
  }
  return c;
}

// Angle between two directions given in controller coordinates.
double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b)) * kDegPerRad;
}

// Flat control-space distances overestimate true angles, so a true-angle
// separation beyond the radius (plus slack) safely culls.
constexpr double kCullSlack = 0.5;

}  // namespace

std::vector<std::size_t> filter_interaction_space(const Scene& scene, const PointerState& pointer,
                                                  double cone_radius) {
  const auto frame = geo::ControllerFrame::from_pointer(pointer.controller_position, pointer.pointing_direction);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scene.targets.size(); ++i) {
    const Target& t = scene.targets[i];
    const Coarse c = coarse_of(t, frame);
    if (c.center_angle - c.angular_radius > cone_radius + kCullSlack) continue;
    const Polygon2D silhouette = geo::project_primitive(t.shape, t.pose, frame);
    if (silhouette.empty()) continue;
    if (geo::intersects_disk(silhouette, cone_radius)) out.push_back(i);
  }
  return out;
}

ContextFrame extract_context(const Scene& scene, const PointerState& pointer, const ArmModel& arm,
                             double cone_radius) {
  ContextFrame ctx;
  ctx.frame = geo::ControllerFrame::from_pointer(pointer.controller_position, pointer.pointing_direction);
  ctx.pointer = pointer;
  ctx.cone_radius = cone_radius;
  ctx.posture = estimate_posture(pointer, arm);

  const std::size_t n = scene.targets.size();
  std::vector<Coarse> coarse(n);
  for (std::size_t i = 0; i < n; ++i) coarse[i] = coarse_of(scene.targets[i], ctx.frame);

  std::vector<std::optional<Polygon2D>> silhouettes(n);
  auto silhouette = [&](std::size_t i) -> const Polygon2D& {
    if (!silhouettes[i]) {
      const Target& t = scene.targets[i];
      silhouettes[i] = geo::project_primitive(t.shape, t.pose, ctx.frame);
    }
    return *silhouettes[i];
  };

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < n; ++i) {
    if (coarse[i].center_angle - coarse[i].angular_radius > cone_radius + kCullSlack) continue;
    const Polygon2D& s = silhouette(i);
    if (s.empty()) continue;
    if (geo::intersects_disk(s, cone_radius)) members.push_back(i);
  }

  // Occluders: strictly nearer centre, ties broken by id.
  auto nearer = [&](std::size_t a, std::size_t b) {
    if (coarse[a].depth != coarse[b].depth) return coarse[a].depth < coarse[b].depth;
    return scene.targets[a].id < scene.targets[b].id;
  };

  const Polygon2D disk = geo::disk_polygon(cone_radius);
  ctx.targets.reserve(members.size());
  std::vector<Polygon2D> clips;
  for (std::size_t i : members) {
    TargetRecord rec;
    rec.index = i;
    rec.id = scene.targets[i].id;
    rec.silhouette = silhouette(i);
    rec.position_local = coarse[i].local;
    rec.depth = coarse[i].depth;
    rec.bounding_radius = coarse[i].bounding_radius;

    Polygon2D outline = geo::clip_to_convex(rec.silhouette, disk);
    clips.clear();
    if (!outline.empty()) {
      const Vec3 dir_i = coarse[i].local.normalized();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !nearer(j, i)) continue;
        if (coarse[j].depth <= coarse[j].bounding_radius) continue;
        const double sep = angle_between(dir_i, coarse[j].local.normalized());
        if (sep > coarse[i].angular_radius + coarse[j].angular_radius + kCullSlack) continue;
        const Polygon2D& occluder = silhouette(j);
        if (occluder.vertices.size() >= 3) clips.push_back(occluder);
      }
      if (!clips.empty()) outline = geo::polygon_difference(outline, clips);
    }
    rec.outline = std::move(outline);
    rec.centroid = geo::centroid(rec.outline);
    if (rec.centroid) {
      rec.angular_distance = geo::length(*rec.centroid);
    } else {
      const auto p = geo::project_local(rec.position_local);
      rec.angular_distance = p.ok() ? geo::length(p.point) : 180.0;
    }
    ctx.targets.push_back(std::move(rec));
  }
  return ctx;
}

}  // namespace adaptsel::scene
