#include "adaptsel/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "adaptsel/engine.hpp"
#include "adaptsel/trace.hpp"

namespace adaptsel::sim {

using nlohmann::json;
using adapter::ConfigError;
namespace geo = adaptsel::geometry;
namespace tech = adaptsel::techniques;

namespace {

constexpr double kRadPerDeg = std::numbers::pi / 180.0;
constexpr double kDegPerRad = 180.0 / std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b)) * kDegPerRad;
}

// Rotates unit `from` toward unit `to` by at most `max_degrees`.
Vec3 rotate_toward(const Vec3& from, const Vec3& to, double max_degrees) {
  const double angle = angle_between(from, to);
  if (angle <= max_degrees) return to;
  Vec3 axis = from.cross(to);
  if (axis.norm() < 1e-12) {
    axis = from.unitOrthogonal();
  }
  return (Eigen::AngleAxisd(max_degrees * kRadPerDeg, axis.normalized()) * from).normalized();
}

}  // namespace

// ---------------------------------------------------------------------------
// Random numbers

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt + 0x632be59bd9b4e019ULL));
}

// ---------------------------------------------------------------------------
// Environments

std::string_view environment_name(EnvironmentKind kind) {
  switch (kind) {
    case EnvironmentKind::sparse: return "sparse";
    case EnvironmentKind::dense: return "dense";
    case EnvironmentKind::flat: return "flat";
    case EnvironmentKind::deep: return "deep";
  }
  return "sparse";
}

std::optional<EnvironmentKind> parse_environment(std::string_view name) {
  for (EnvironmentKind k : kAllEnvironments) {
    const auto canonical = environment_name(k);
    if (name.size() != canonical.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size(); ++i)
      same = same && std::tolower(static_cast<unsigned char>(name[i])) == canonical[i];
    if (same) return k;
  }
  return std::nullopt;
}

EnvironmentSpec EnvironmentSpec::study(EnvironmentKind kind, double target_size, std::uint64_t seed) {
  EnvironmentSpec s;
  s.kind = kind;
  s.target_size = target_size;
  s.seed = seed;
  switch (kind) {
    case EnvironmentKind::sparse:
      s.region_size = {3.0, 3.0, 3.0};
      s.object_count = 10;
      break;
    case EnvironmentKind::dense:
      s.region_size = {3.0, 3.0, 3.0};
      s.object_count = 240;
      break;
    case EnvironmentKind::flat:
      s.region_size = {3.0, 3.0, 1.0};
      s.object_count = 30;
      break;
    case EnvironmentKind::deep:
      s.region_size = {1.5, 1.5, 4.0};
      s.object_count = 30;
      break;
  }
  return s;
}

Vec3 EnvironmentSpec::region_center() const {
  return {viewer.x(), region_center_height, viewer.z() + distance + 0.5 * region_size.z()};
}

geo::Box3 EnvironmentSpec::region() const {
  const Vec3 c = region_center();
  return {c - 0.5 * region_size, c + 0.5 * region_size};
}

void EnvironmentSpec::validate() const {
  if (object_count < 1) throw GenerationError("object_count must be at least 1");
  if ((region_size.array() <= 0.0).any()) throw GenerationError("region dimensions must be positive");
  if (!(distance > 0.0)) throw GenerationError("distance must be positive");
  if (!(target_size > 0.0 && target_size < 90.0)) throw GenerationError("target_size must lie in (0, 90) degrees");
  if (!(distractor_min > 0.0 && distractor_min <= distractor_max && distractor_max < 90.0))
    throw GenerationError("distractor size range must satisfy 0 < min <= max < 90");
  if (boundary_margin < 0.0 || center_margin < 0.0) throw GenerationError("margins must be non-negative");
  if ((region_size.array() <= 2.0 * boundary_margin).any())
    throw GenerationError("boundary margin leaves no room for the target");
  if (max_attempts < 1) throw GenerationError("max_attempts must be positive");
}

double metric_size(double degrees, double distance) { return 2.0 * distance * std::tan(0.5 * degrees * kRadPerDeg); }

namespace {

geo::Quat random_rotation(Rng& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double t2 = 2.0 * std::numbers::pi * u2;
  const double t3 = 2.0 * std::numbers::pi * u3;
  return geo::Quat(b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3)).normalized();
}

Vec3 scale_for(geo::Shape shape, double size) {
  // Largest local extent equals `size` for every primitive.
  if (shape == geo::Shape::cylinder || shape == geo::Shape::capsule) return {size, 0.5 * size, size};
  return Vec3::Constant(size);
}

Vec3 uniform_in(Rng& rng, const geo::Box3& box) {
  const double x = rng.uniform(box.lo.x(), box.hi.x());
  const double y = rng.uniform(box.lo.y(), box.hi.y());
  const double z = rng.uniform(box.lo.z(), box.hi.z());
  return {x, y, z};
}

bool overlaps(const std::vector<scene::Target>& placed, const Vec3& p, double radius) {
  for (const auto& t : placed)
    if ((t.pose.position - p).norm() <= radius + t.bounding_radius()) return true;
  return false;
}

}  // namespace

scene::Scene generate_environment(const EnvironmentSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const geo::Box3 region = spec.region();
  const geo::Box3 inner{region.lo + Vec3::Constant(spec.boundary_margin),
                        region.hi - Vec3::Constant(spec.boundary_margin)};
  const Vec3 center = spec.region_center();

  scene::Scene out;
  out.targets.reserve(static_cast<std::size_t>(spec.object_count));

  scene::Target target;
  target.id = "target";
  target.shape = geo::Shape::sphere;
  bool placed = false;
  for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
    const Vec3 p = uniform_in(rng, inner);
    if ((p - center).norm() < spec.center_margin) continue;
    target.pose.position = p;
    target.pose.scale = Vec3::Constant(metric_size(spec.target_size, (p - spec.viewer).norm()));
    placed = true;
  }
  if (!placed) throw GenerationError("could not place the target");
  out.targets.push_back(target);

  for (int i = 1; i < spec.object_count; ++i) {
    scene::Target d;
    char id[16];
    std::snprintf(id, sizeof id, "d%03d", i);
    d.id = id;
    placed = false;
    for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
      d.shape = static_cast<geo::Shape>(rng.index(4));
      const double degrees = rng.uniform(spec.distractor_min, spec.distractor_max);
      const Vec3 p = uniform_in(rng, region);
      d.pose.position = p;
      d.pose.rotation = random_rotation(rng);
      d.pose.scale = scale_for(d.shape, metric_size(degrees, (p - spec.viewer).norm()));
      placed = !overlaps(out.targets, p, d.bounding_radius());
    }
    if (!placed)
      throw GenerationError("could not place object " + std::to_string(i) + " of " +
                            std::to_string(spec.object_count) + " without intersections");
    out.targets.push_back(std::move(d));
  }
  out.designated_target = "target";
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory parameters

void TrajectoryParams::validate() const {
  for (double v : {angular_speed, dwell, frame_rate, depth_speed, timeout, reposition_speed, arrival_angle})
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("trajectory: parameters must be positive");
  if (!(tremor_sigma >= 0.0) || !std::isfinite(tremor_sigma))
    throw ConfigError("trajectory: tremor_sigma must be non-negative");
  if (!(ready_duration >= 0.0)) throw ConfigError("trajectory: ready_duration must be non-negative");
}

json trajectory_to_json(const TrajectoryParams& p) {
  return {{"angular_speed", p.angular_speed},   {"tremor_sigma", p.tremor_sigma},
          {"dwell", p.dwell},                   {"frame_rate", p.frame_rate},
          {"depth_speed", p.depth_speed},       {"ready_duration", p.ready_duration},
          {"timeout", p.timeout},               {"reposition_speed", p.reposition_speed},
          {"arrival_angle", p.arrival_angle}};
}

TrajectoryParams trajectory_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  TrajectoryParams p;
  const std::pair<const char*, double*> fields[] = {
      {"angular_speed", &p.angular_speed}, {"tremor_sigma", &p.tremor_sigma},
      {"dwell", &p.dwell},                 {"frame_rate", &p.frame_rate},
      {"depth_speed", &p.depth_speed},     {"ready_duration", &p.ready_duration},
      {"timeout", &p.timeout},             {"reposition_speed", &p.reposition_speed},
      {"arrival_angle", &p.arrival_angle}};
  for (const auto& [key, out] : fields) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_number()) throw ConfigError(path + "." + key + ": expected a number");
      *out = it->get<double>();
    }
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& f : fields) known = known || key == f.first;
    if (!known) throw ConfigError(path + "." + key + ": unknown field");
  }
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return p;
}

// ---------------------------------------------------------------------------
// Trials

adapter::AdapterConfig effective_config(const TrialSpec& spec) {
  if (!spec.fixed) return spec.config;
  adapter::AdapterConfig c = spec.config;
  c.techniques = {*spec.fixed};
  if (!c.familiarity.contains(*spec.fixed))
    c.familiarity[*spec.fixed] = objectives::application_familiarity().at(*spec.fixed);
  return c;
}

namespace {

// Seated arm geometry: the elbow hangs below the shoulder and the controller
// sits at the end of the forearm along the pointing direction.
struct Body {
  Vec3 head;
  Vec3 hmd_forward;
  Vec3 elbow;
  double forearm = 0.0;

  [[nodiscard]] Vec3 controller(const Vec3& dir, const Vec3& offset) const { return elbow + offset + forearm * dir; }

  // Direction from the controller toward `point`, accounting for the
  // controller moving with the direction.
  [[nodiscard]] Vec3 direction_to(const Vec3& point, const Vec3& offset) const {
    Vec3 d = (point - (elbow + offset)).normalized();
    for (int i = 0; i < 6; ++i) d = (point - controller(d, offset)).normalized();
    return d;
  }
};

Body make_body(const scene::Scene& scene, const Vec3& viewer, const scene::ArmModel& arm, Vec3& scene_center) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& t : scene.targets) {
    lo = lo.cwiseMin(t.pose.position);
    hi = hi.cwiseMax(t.pose.position);
  }
  scene_center = 0.5 * (lo + hi);
  Body b;
  b.head = viewer;
  const Vec3 to_center = scene_center - viewer;
  b.hmd_forward = to_center.norm() > 1e-9 ? Vec3(to_center.normalized()) : Vec3(Vec3::UnitZ());
  Vec3 heading(b.hmd_forward.x(), 0.0, b.hmd_forward.z());
  if (heading.norm() < 1e-9) heading = Vec3::UnitZ();
  heading.normalize();
  const Vec3 lateral = Vec3::UnitY().cross(heading);
  const Vec3 shoulder = viewer + arm.shoulder_lateral * lateral - arm.shoulder_drop * Vec3::UnitY();
  b.elbow = shoulder - arm.upper_arm.length * Vec3::UnitY();
  b.forearm = arm.forearm.length;
  return b;
}

Vec3 apply_tremor(const Vec3& dir, double sigma, Rng& rng) {
  if (sigma <= 0.0) return dir;
  const auto frame = geo::ControllerFrame::from_pointer(Vec3::Zero(), dir);
  const double a = rng.normal() * sigma * kRadPerDeg;
  const double b = rng.normal() * sigma * kRadPerDeg;
  const Vec3 tilted = Eigen::AngleAxisd(a, frame.up) * (Eigen::AngleAxisd(b, frame.right) * dir);
  return tilted.normalized();
}

// Whether the target shows a non-empty clipped outline to a controller at
// `position` aimed at it.
bool visible_from(const scene::Scene& scene, std::size_t target_index, const Vec3& position, const Body& body,
                  const Vec3& offset, const adapter::AdapterConfig& config) {
  scene::PointerState probe;
  probe.controller_position = position;
  probe.pointing_direction = (scene.targets[target_index].pose.position - position).normalized();
  probe.hmd_position = body.head + offset;
  probe.hmd_forward = body.hmd_forward;
  const auto ctx = scene::extract_context(scene, probe, config.arm, config.cone_radius);
  for (const auto& rec : ctx.targets)
    if (rec.index == target_index) return rec.visible();
  return false;
}

// Smallest lateral or vertical body offset from which the target is visible.
std::optional<Vec3> find_vantage(const scene::Scene& scene, std::size_t target_index, const Body& body,
                                 const Vec3& current, const adapter::AdapterConfig& config) {
  const Vec3 right = Vec3::UnitY().cross(Vec3(body.hmd_forward.x(), 0.0, body.hmd_forward.z())).normalized();
  const Vec3 up = Vec3::UnitY();
  const Vec3 goal = scene.targets[target_index].pose.position;
  for (int step = 1; step <= 8; ++step) {
    const double m = 0.1 * step;
    for (const Vec3& dir : {Vec3(right), Vec3(-right), Vec3(up), Vec3(-up)}) {
      const Vec3 offset = current + m * dir;
      const Vec3 d = body.direction_to(goal, offset);
      if (visible_from(scene, target_index, body.controller(d, offset), body, offset, config)) return offset;
    }
  }
  return std::nullopt;
}

const scene::TargetRecord* find_record(const scene::ContextFrame& ctx, std::size_t index, std::size_t& slot) {
  for (std::size_t k = 0; k < ctx.targets.size(); ++k) {
    if (ctx.targets[k].index == index) {
      slot = k;
      return &ctx.targets[k];
    }
  }
  return nullptr;
}

}  // namespace

TrialResult run_trial(const TrialSpec& spec, std::ostream* trace_out) {
  if (!spec.scene) throw std::invalid_argument("run_trial: scene is null");
  const scene::Scene& scene = *spec.scene;
  const auto target_index = scene.index_of(spec.target_id);
  if (!target_index) throw std::invalid_argument("run_trial: unknown target '" + spec.target_id + "'");
  if (!scene.targets[*target_index].selectable)
    throw std::invalid_argument("run_trial: target '" + spec.target_id + "' is not selectable");
  const TrajectoryParams& p = spec.trajectory;
  p.validate();

  const adapter::AdapterConfig config = effective_config(spec);
  Engine engine(spec.scene, config);
  std::optional<trace::Writer> writer;
  if (trace_out) writer.emplace(*trace_out, trace::Header{spec.trial_id, config, scene, spec.verbose_trace});

  Rng rng(spec.seed);
  Vec3 scene_center;
  const Vec3 viewer(0.0, 1.6, 0.0);
  const Body body = make_body(scene, viewer, config.arm, scene_center);
  const Vec3 target_position = scene.targets[*target_index].pose.position;

  const double dt = 1.0 / p.frame_rate;
  const auto ready_frames = static_cast<std::size_t>(std::llround(p.ready_duration * p.frame_rate));
  const auto trial_frames = static_cast<std::size_t>(std::ceil(p.timeout * p.frame_rate - 1e-9));
  const double step_angle = p.angular_speed * dt;

  TrialResult result;
  result.trial_id = spec.trial_id;
  result.initial_technique = engine.active();

  Vec3 offset = Vec3::Zero();
  std::optional<Vec3> vantage;
  bool vantage_exhausted = false;
  Vec3 intended = body.direction_to(scene_center, offset);
  bool trigger_next = false;
  double depth_step_next = 0.0;
  double dwell = 0.0;
  double stall = 0.0;
  bool refine = false;
  Vec3 prev_dir = intended;
  Vec3 prev_pos = body.controller(intended, offset);
  tech::Technique last_active = engine.active();

  for (std::size_t f = 0; f < ready_frames + trial_frames; ++f) {
    const bool in_trial = f >= ready_frames;
    const Vec3 dir = apply_tremor(intended, p.tremor_sigma, rng);

    scene::PointerState pointer;
    pointer.controller_position = body.controller(dir, offset);
    pointer.pointing_direction = dir;
    pointer.hmd_position = body.head + offset;
    pointer.hmd_forward = body.hmd_forward;
    pointer.trigger = trigger_next;
    pointer.timestamp = static_cast<double>(f) * dt;
    if (depth_step_next != 0.0) {
      const double speed = f == 0 ? 0.0 : angle_between(prev_dir, dir) / dt;
      pointer.trackpad_delta = depth_step_next / tech::cursor_gain(speed);
    }

    const FrameResult frame = engine.process(pointer);
    if (writer) writer->write(pointer, frame);
    ++result.frames;

    const double t_rel = (static_cast<double>(f) - static_cast<double>(ready_frames)) * dt;
    if (frame.decision.switched)
      result.switches.push_back({t_rel, f, frame.decision.current, *frame.decision.new_technique});

    if (f + 1 == ready_frames || (ready_frames == 0 && f == 0)) {
      result.start_direction = dir;
      result.start_position = pointer.controller_position;
    }
    if (in_trial && f > 0) {
      result.rotational_movement += angle_between(prev_dir, dir);
      result.translational_movement += (pointer.controller_position - prev_pos).norm();
    }
    prev_dir = dir;
    prev_pos = pointer.controller_position;
    result.end_direction = dir;
    result.end_position = pointer.controller_position;

    const bool on_target = frame.highlight.target_id && *frame.highlight.target_id == spec.target_id;
    if (in_trial && pointer.trigger) {
      if (on_target) {
        result.success = true;
        result.selection_time = t_rel;
        break;
      }
      ++result.error_count;
      dwell = 0.0;
    }
    trigger_next = false;
    depth_step_next = 0.0;

    if (f + 1 < ready_frames) {
      intended = body.direction_to(scene_center, offset);
      continue;
    }

    // Plan the next frame of the trial.
    const tech::Technique active = engine.active();
    if (active != last_active) {
      refine = false;
      stall = 0.0;
      last_active = active;
    }
    const auto& ctx = frame.context;
    std::size_t slot = 0;
    const scene::TargetRecord* record = find_record(ctx, *target_index, slot);
    const Vec3 controller = pointer.controller_position;
    const Vec3 toward_center = (target_position - controller).normalized();

    Vec3 aim = toward_center;
    if (record && !refine) {
      const auto& region = frame.regions.at(active)[slot];
      if (region.selectable) aim = ctx.frame.direction_of(region.aim_center);
      else if (record->visible() && active != tech::Technique::ray_cursor) aim = ctx.frame.direction_of(*record->centroid);
    } else if (record && refine && record->visible() && active != tech::Technique::ray_cursor) {
      aim = ctx.frame.direction_of(*record->centroid);
    }

    const double remaining = angle_between(intended, aim);
    const bool arrived = remaining <= p.arrival_angle;

    if (in_trial && on_target) {
      dwell += dt;
      stall = 0.0;
      if (dwell >= p.dwell - 1e-9) {
        trigger_next = true;
        dwell = 0.0;
      }
    } else {
      dwell = 0.0;
      if (arrived && !on_target) stall += dt;
    }

    if (active == tech::Technique::ray_cursor) {
      if (record && arrived && !on_target) {
        const double diff = record->position_local.z() - frame.highlight.cursor_depth;
        const double max_step = p.depth_speed * dt;
        if (std::abs(diff) > 1e-3) depth_step_next = std::clamp(diff, -max_step, max_step);
      }
      if (stall > 0.5) refine = true;
    } else {
      const bool occluded = !record || !record->visible();
      if (in_trial && occluded && angle_between(intended, toward_center) <= p.arrival_angle) {
        if (!vantage && !vantage_exhausted) {
          vantage = find_vantage(scene, *target_index, body, offset, config);
          vantage_exhausted = !vantage;
        }
      }
      if (stall > 0.2) refine = true;
    }

    if (vantage) {
      const Vec3 delta = *vantage - offset;
      const double max_move = p.reposition_speed * dt;
      offset = delta.norm() <= max_move ? *vantage : Vec3(offset + max_move * delta.normalized());
      if (offset == *vantage) vantage.reset();
    }

    intended = rotate_toward(intended, aim, step_angle);
  }

  if (!result.success) {
    result.timeout = true;
    result.selection_time = p.timeout;
  }
  result.final_technique = engine.active();
  return result;
}

// ---------------------------------------------------------------------------
// Batches

void BatchConfig::validate() const {
  if (repetitions < 0) throw ConfigError("$.repetitions: must be non-negative");
  for (double s : target_sizes)
    if (!(s > 0.0 && s < 90.0)) throw ConfigError("$.target_sizes: sizes must lie in (0, 90) degrees");
  if (threads < 0) throw ConfigError("$.threads: must be non-negative");
  trajectory.validate();
}

std::string mode_name(const std::optional<Technique>& mode) {
  return mode ? std::string(tech::technique_name(*mode)) : std::string("adaptive");
}

std::string size_label(double target_size) {
  if (target_size == 2.5) return "large";
  if (target_size == 0.5) return "small";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gdeg", target_size);
  return buf;
}

json batch_to_json(const BatchConfig& c) {
  json envs = json::array();
  for (auto e : c.environments) envs.push_back(std::string(environment_name(e)));
  json modes = json::array();
  for (const auto& m : c.modes) modes.push_back(mode_name(m));
  return {{"environments", envs},
          {"target_sizes", c.target_sizes},
          {"repetitions", c.repetitions},
          {"modes", modes},
          {"seed", c.seed},
          {"trajectory", trajectory_to_json(c.trajectory)},
          {"threads", c.threads},
          {"traces", c.write_traces},
          {"verbose_traces", c.verbose_traces}};
}

BatchConfig batch_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("$: batch config must be an object");
  BatchConfig c;
  static const char* const kKnown[] = {"environments", "target_sizes", "repetitions", "modes", "seed",
                                       "trajectory",   "threads",      "traces",      "verbose_traces"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown))
      throw ConfigError("$." + key + ": unknown field");
  }
  if (auto it = j.find("environments"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("$.environments: expected an array");
    c.environments.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "$.environments[" + std::to_string(i) + "]";
      const auto& v = (*it)[i];
      const auto kind = v.is_string() ? parse_environment(v.get<std::string>()) : std::nullopt;
      if (!kind) throw ConfigError(path + ": expected one of sparse, dense, flat, deep");
      c.environments.push_back(*kind);
    }
  }
  if (auto it = j.find("target_sizes"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("$.target_sizes: expected an array");
    c.target_sizes.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_number()) throw ConfigError("$.target_sizes[" + std::to_string(i) + "]: expected a number");
      c.target_sizes.push_back((*it)[i].get<double>());
    }
  }
  if (auto it = j.find("repetitions"); it != j.end()) {
    if (!it->is_number_integer()) throw ConfigError("$.repetitions: expected an integer");
    c.repetitions = it->get<int>();
  }
  if (auto it = j.find("modes"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("$.modes: expected an array");
    c.modes.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "$.modes[" + std::to_string(i) + "]";
      if (!(*it)[i].is_string()) throw ConfigError(path + ": expected a string");
      const std::string name = (*it)[i].get<std::string>();
      if (name == "adaptive") {
        c.modes.emplace_back(std::nullopt);
        continue;
      }
      const auto t = tech::parse_technique(name);
      if (!t) throw ConfigError(path + ": unknown mode '" + name + "'");
      c.modes.emplace_back(*t);
    }
  }
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) throw ConfigError("$.seed: expected a non-negative integer");
    c.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("trajectory"); it != j.end()) c.trajectory = trajectory_from_json(*it);
  if (auto it = j.find("threads"); it != j.end()) {
    if (!it->is_number_integer()) throw ConfigError("$.threads: expected an integer");
    c.threads = it->get<int>();
  }
  if (auto it = j.find("traces"); it != j.end()) {
    if (!it->is_boolean()) throw ConfigError("$.traces: expected a boolean");
    c.write_traces = it->get<bool>();
  }
  if (auto it = j.find("verbose_traces"); it != j.end()) {
    if (!it->is_boolean()) throw ConfigError("$.verbose_traces: expected a boolean");
    c.verbose_traces = it->get<bool>();
  }
  c.validate();
  return c;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string trial_name(EnvironmentKind env, double size, int rep, const std::optional<Technique>& mode) {
  char rep_buf[16];
  std::snprintf(rep_buf, sizeof rep_buf, "r%02d", rep);
  return std::string(environment_name(env)) + "-" + size_label(size) + "-" + rep_buf + "-" + mode_name(mode);
}

std::string scene_name(EnvironmentKind env, double size, int rep) {
  char rep_buf[16];
  std::snprintf(rep_buf, sizeof rep_buf, "r%02d", rep);
  return std::string(environment_name(env)) + "-" + size_label(size) + "-" + rep_buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

BatchResult run_batch(const BatchConfig& batch, const adapter::AdapterConfig& config,
                      const std::optional<std::filesystem::path>& out_dir) {
  batch.validate();
  config.validate();

  struct SceneJob {
    EnvironmentKind env;
    std::size_t size_index;
    int rep;
    std::uint64_t seed;
    std::shared_ptr<const scene::Scene> scene;
  };
  std::vector<SceneJob> scenes;
  for (std::size_t e = 0; e < batch.environments.size(); ++e) {
    const auto env = batch.environments[e];
    for (std::size_t s = 0; s < batch.target_sizes.size(); ++s) {
      for (int r = 0; r < batch.repetitions; ++r) {
        const std::uint64_t seed =
            mix_seed(mix_seed(mix_seed(batch.seed, static_cast<std::uint64_t>(env)), s), static_cast<std::uint64_t>(r));
        scenes.push_back({env, s, r, seed, nullptr});
      }
    }
  }

  struct TrialJob {
    std::size_t scene;
    std::size_t mode;
  };
  std::vector<TrialJob> jobs;
  for (std::size_t i = 0; i < scenes.size(); ++i)
    for (std::size_t m = 0; m < batch.modes.size(); ++m) jobs.push_back({i, m});

  if (out_dir) {
    std::filesystem::create_directories(*out_dir / "scenes");
    if (batch.write_traces) std::filesystem::create_directories(*out_dir / "traces");
  }

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(batch.threads > 0 ? batch.threads : hw,
                                                     std::max(scenes.size(), jobs.size())));

  auto parallel = [&](std::size_t count, const auto& body) {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < count; i = next++) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = count;
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  };

  parallel(scenes.size(), [&](std::size_t i) {
    auto& job = scenes[i];
    auto spec = EnvironmentSpec::study(job.env, batch.target_sizes[job.size_index], job.seed);
    job.scene = std::make_shared<const scene::Scene>(generate_environment(spec));
    if (out_dir)
      write_text(*out_dir / "scenes" / (scene_name(job.env, spec.target_size, job.rep) + ".json"),
                 scene::dump_scene(*job.scene));
  });

  BatchResult result;
  result.trials.resize(jobs.size());
  parallel(jobs.size(), [&](std::size_t i) {
    const auto& job = jobs[i];
    const auto& sc = scenes[job.scene];
    const double size = batch.target_sizes[sc.size_index];
    TrialSpec spec;
    spec.trial_id = trial_name(sc.env, size, sc.rep, batch.modes[job.mode]);
    spec.scene = sc.scene;
    spec.target_id = *sc.scene->designated_target;
    spec.fixed = batch.modes[job.mode];
    spec.trajectory = batch.trajectory;
    spec.config = config;
    spec.seed = mix_seed(sc.seed, 0x74726961ULL);
    spec.verbose_trace = batch.verbose_traces;

    TrialRecord& rec = result.trials[i];
    rec.environment = sc.env;
    rec.target_size = size;
    rec.repetition = sc.rep;
    rec.mode = spec.fixed;
    rec.scene_seed = sc.seed;
    rec.trial_seed = spec.seed;
    if (out_dir && batch.write_traces) {
      std::ostringstream trace;
      rec.result = run_trial(spec, &trace);
      write_text(*out_dir / "traces" / (spec.trial_id + ".jsonl"), trace.str());
    } else {
      rec.result = run_trial(spec, nullptr);
    }
  });

  // Condition order follows the batch declaration; rows are reduced from the
  // job list, which is already in that order.
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> row_of;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& sc = scenes[jobs[i].scene];
    std::size_t env_pos = 0;
    while (batch.environments[env_pos] != sc.env) ++env_pos;
    const auto key = std::make_tuple(env_pos, sc.size_index, jobs[i].mode);
    auto [it, inserted] = row_of.try_emplace(key, result.summary.size());
    if (inserted) {
      SummaryRow row;
      row.environment = sc.env;
      row.target_size = batch.target_sizes[sc.size_index];
      row.mode = batch.modes[jobs[i].mode];
      result.summary.push_back(row);
    }
    SummaryRow& row = result.summary[it->second];
    const TrialResult& r = result.trials[i].result;
    ++row.trials;
    row.successes += r.success ? 1 : 0;
    row.timeouts += r.timeout ? 1 : 0;
    row.error_trials += (r.error_count > 0 || r.timeout) ? 1 : 0;
    row.mean_selection_time += r.selection_time;
    row.mean_translation += r.translational_movement;
    row.mean_rotation += r.rotational_movement;
    const int switches = static_cast<int>(r.switches.size());
    if (switches > 0) {
      ++row.switching_trials;
      row.mean_switches_switching += switches;
    }
    row.max_switches = std::max(row.max_switches, switches);
    ++row.final_counts[static_cast<int>(r.final_technique)];
  }
  for (auto& row : result.summary) {
    if (row.trials > 0) {
      row.mean_selection_time /= row.trials;
      row.mean_translation /= row.trials;
      row.mean_rotation /= row.trials;
    }
    if (row.switching_trials > 0) row.mean_switches_switching /= row.switching_trials;
  }

  std::sort(result.trials.begin(), result.trials.end(),
            [](const TrialRecord& a, const TrialRecord& b) { return a.result.trial_id < b.result.trial_id; });

  if (out_dir) {
    write_text(*out_dir / "summary.csv", summary_csv(result.summary));
    write_text(*out_dir / "trials.csv", trials_csv(result.trials));
  }
  return result;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "environment,target_size,mode,trials,successes,timeouts,error_trials,error_rate,mean_selection_time,"
         "mean_translation,mean_rotation,switching_trials,mean_switches_switching,max_switches,"
         "final_RayCasting,final_StickyRay,final_RayCursor\n";
  for (const auto& r : rows) {
    out << environment_name(r.environment) << ',' << fmt(r.target_size) << ',' << mode_name(r.mode) << ','
        << r.trials << ',' << r.successes << ',' << r.timeouts << ',' << r.error_trials << ','
        << fmt(r.trials > 0 ? static_cast<double>(r.error_trials) / r.trials : 0.0) << ','
        << fmt(r.mean_selection_time) << ',' << fmt(r.mean_translation) << ',' << fmt(r.mean_rotation) << ','
        << r.switching_trials << ',' << fmt(r.mean_switches_switching) << ',' << r.max_switches << ','
        << r.final_counts[0] << ',' << r.final_counts[1] << ',' << r.final_counts[2] << '\n';
  }
  return out.str();
}

std::string trials_csv(const std::vector<TrialRecord>& trials) {
  std::ostringstream out;
  out << "trial_id,environment,target_size,repetition,mode,scene_seed,trial_seed,success,timeout,selection_time,"
         "translation,rotation,errors,switches,initial_technique,final_technique,frames\n";
  for (const auto& t : trials) {
    const auto& r = t.result;
    out << r.trial_id << ',' << environment_name(t.environment) << ',' << fmt(t.target_size) << ','
        << t.repetition << ',' << mode_name(t.mode) << ',' << t.scene_seed << ',' << t.trial_seed << ','
        << (r.success ? 1 : 0) << ',' << (r.timeout ? 1 : 0) << ',' << fmt(r.selection_time) << ','
        << fmt(r.translational_movement) << ',' << fmt(r.rotational_movement) << ',' << r.error_count << ','
        << r.switches.size() << ',' << tech::technique_name(r.initial_technique) << ','
        << tech::technique_name(r.final_technique) << ',' << r.frames << '\n';
  }
  return out.str();
}

}  // namespace adaptsel::sim
