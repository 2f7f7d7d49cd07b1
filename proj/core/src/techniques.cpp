#include "adaptsel/techniques.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace adaptsel::techniques {

namespace geo = adaptsel::geometry;
using geo::Vec3;

std::string_view technique_name(Technique t) {
  switch (t) {
    case Technique::ray_casting: return "RayCasting";
    case Technique::sticky_ray: return "StickyRay";
    case Technique::ray_cursor: return "RayCursor";
  }
  return "RayCasting";
}

std::optional<Technique> parse_technique(std::string_view name) {
  for (Technique t : kAllTechniques)
    if (technique_name(t) == name) return t;
  if (name == "raycasting" || name == "ray_casting") return Technique::ray_casting;
  if (name == "stickyray" || name == "sticky_ray") return Technique::sticky_ray;
  if (name == "raycursor" || name == "ray_cursor") return Technique::ray_cursor;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Region measurement

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

// Interval of `intervals` containing `t`, else the one closest to it.
std::optional<geo::Interval> pick_interval(const std::vector<geo::Interval>& intervals, double t) {
  std::optional<geo::Interval> best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (const geo::Interval& iv : intervals) {
    const double gap = t < iv.lo ? iv.lo - t : (t > iv.hi ? t - iv.hi : 0.0);
    if (gap < best_gap) {
      best_gap = gap;
      best = iv;
    }
  }
  return best;
}

}  // namespace

ActivationRegion measure_region(std::string target_id, Polygon2D region) {
  ActivationRegion out;
  out.target_id = std::move(target_id);
  out.region = std::move(region);
  const auto aim = geo::centroid(out.region);
  if (!aim || out.region.area() < geo::kSliverArea) return out;

  out.aim_center = *aim;
  out.amplitude = geo::length(*aim);
  out.axis = out.amplitude > geo::kEpsilon ? (1.0 / out.amplitude) * *aim : AngularPoint{1.0, 0.0};

  const auto along = geo::line_inside_intervals({0.0, 0.0}, out.axis, out.region);
  const auto x = pick_interval(along, out.amplitude);
  if (!x) return out;
  out.box.x1 = x->lo - out.amplitude;
  out.box.x2 = x->hi - out.amplitude;
  out.width = out.box.x2 - out.box.x1;

  const AngularPoint perp{-out.axis.v, out.axis.h};
  const auto across = geo::line_inside_intervals(out.aim_center, perp, out.region);
  if (const auto y = pick_interval(across, 0.0)) {
    out.box.y1 = y->hi;
    out.box.y2 = y->lo;
  }
  out.selectable = out.width > geo::kEpsilon;
  return out;
}

std::vector<ActivationRegion> raycast_regions(const scene::ContextFrame& ctx) {
  std::vector<ActivationRegion> out;
  out.reserve(ctx.targets.size());
  for (const auto& rec : ctx.targets) out.push_back(measure_region(rec.id, rec.outline));
  return out;
}

std::vector<ActivationRegion> stickyray_regions(const scene::ContextFrame& ctx, StickySiteRule rule) {
  std::vector<AngularPoint> sites;
  std::vector<std::size_t> owners;
  for (std::size_t i = 0; i < ctx.targets.size(); ++i) {
    const auto& rec = ctx.targets[i];
    if (!rec.visible()) continue;
    AngularPoint site = *rec.centroid;
    if (rule == StickySiteRule::projected_center) {
      const auto p = geo::project_local(rec.position_local);
      if (p.ok()) site = p.point;
    }
    sites.push_back(site);
    owners.push_back(i);
  }
  const auto cells = geo::voronoi_cells_2d(sites, ctx.cone_radius);

  std::vector<Polygon2D> per_target(ctx.targets.size());
  for (std::size_t k = 0; k < owners.size(); ++k) per_target[owners[k]] = cells[k];

  std::vector<ActivationRegion> out;
  out.reserve(ctx.targets.size());
  for (std::size_t i = 0; i < ctx.targets.size(); ++i)
    out.push_back(measure_region(ctx.targets[i].id, std::move(per_target[i])));
  return out;
}

geo::Box3 interaction_box(const scene::ContextFrame& ctx, const RayCursorOptions& options) {
  double far = options.near_depth;
  for (const auto& rec : ctx.targets) far = std::max(far, rec.position_local.z());
  far += options.far_margin;
  const double half = far * std::tan(ctx.cone_radius / kDegPerRad);
  geo::Box3 box{{-half, -half, options.near_depth}, {half, half, far}};
  constexpr double kPad = 1e-6;
  for (const auto& rec : ctx.targets) {
    box.lo = box.lo.cwiseMin(rec.position_local - Vec3::Constant(kPad));
    box.hi = box.hi.cwiseMax(rec.position_local + Vec3::Constant(kPad));
  }
  return box;
}

std::vector<ActivationRegion> raycursor_regions(const scene::ContextFrame& ctx, const RayCursorOptions& options) {
  const geo::Box3 box = interaction_box(ctx, options);
  const std::size_t n = ctx.targets.size();
  std::vector<Vec3> sites(n);
  for (std::size_t i = 0; i < n; ++i) sites[i] = ctx.targets[i].position_local;

  std::vector<bool> duplicate(n, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i && !duplicate[i]; ++j)
      if (!duplicate[j] && (sites[i] - sites[j]).norm() <= geo::kEpsilon) duplicate[i] = true;

  const Polygon2D disk = geo::disk_polygon(ctx.cone_radius);
  const geo::ControllerFrame identity;
  std::vector<ActivationRegion> out;
  out.reserve(n);
  std::vector<Vec3> others;
  for (std::size_t i = 0; i < n; ++i) {
    if (duplicate[i]) {
      out.push_back(measure_region(ctx.targets[i].id, {}));
      continue;
    }
    others.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && !duplicate[j]) others.push_back(sites[j]);
    const geo::Polyhedron3D cell = geo::voronoi_cell_3d(sites[i], others, box);
    Polygon2D projected = geo::project_polyhedron(cell, identity);
    if (options.clip_to_cone) projected = geo::clip_to_convex(projected, disk);
    out.push_back(measure_region(ctx.targets[i].id, std::move(projected)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Highlight

double cursor_gain(double angular_speed) {
  return 0.5 + 2.0 * std::min(std::abs(angular_speed), kCursorSpeedCap) / kCursorSpeedCap;
}

double angular_speed(const TechniqueState& state, const scene::PointerState& pointer) {
  if (!state.has_previous) return 0.0;
  const double dt = pointer.timestamp - state.previous_timestamp;
  if (dt <= 0.0) return 0.0;
  const Vec3 a = state.previous_direction.normalized();
  const Vec3 b = pointer.pointing_direction.normalized();
  return std::atan2(a.cross(b).norm(), a.dot(b)) * kDegPerRad / dt;
}

namespace {

// Nearest record whose clipped outline contains the pointing axis.
std::optional<std::size_t> first_hit(const scene::ContextFrame& ctx) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < ctx.targets.size(); ++i) {
    const auto& rec = ctx.targets[i];
    if (!rec.visible() || !geo::contains(rec.outline, {0.0, 0.0})) continue;
    if (!best || rec.depth < ctx.targets[*best].depth) best = i;
  }
  return best;
}

// Depth along the pointing axis where it enters the record's bounding sphere.
double surface_depth(const scene::TargetRecord& rec) {
  const Vec3& c = rec.position_local;
  const double along = c.z();
  const double off2 = c.x() * c.x() + c.y() * c.y();
  const double r2 = rec.bounding_radius * rec.bounding_radius;
  const double depth = off2 < r2 ? along - std::sqrt(r2 - off2) : along;
  return std::max(depth, kMinCursorDepth);
}

}  // namespace

Highlight highlight(TechniqueState& state, const scene::ContextFrame& ctx) {
  Highlight out;
  const auto& pointer = ctx.pointer;
  switch (state.kind) {
    case Technique::ray_casting: {
      out.record = first_hit(ctx);
      break;
    }
    case Technique::sticky_ray: {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ctx.targets.size(); ++i) {
        const auto& rec = ctx.targets[i];
        if (!rec.visible()) continue;
        const double d = state.sticky_rule == StickyHighlightRule::outline_distance
                             ? geo::distance_to_region(rec.outline, {0.0, 0.0})
                             : geo::length(*rec.centroid);
        if (d < best || (d == best && out.record && rec.depth < ctx.targets[*out.record].depth)) {
          best = d;
          out.record = i;
        }
      }
      if (out.record) out.bent_ray_endpoint = ctx.targets[*out.record].centroid;
      break;
    }
    case Technique::ray_cursor: {
      const double speed = angular_speed(state, pointer);
      if (pointer.trackpad_delta != 0.0) {
        state.swiping = true;
        state.cursor_depth += pointer.trackpad_delta * cursor_gain(speed);
      } else if (state.swiping) {
        state.swiping = false;
        state.last_trackpad_release = pointer.timestamp;
      }
      const bool snapping = !state.swiping && pointer.timestamp - state.last_trackpad_release > kSnapReenableDelay;
      if (snapping) {
        if (const auto hit = first_hit(ctx)) {
          state.cursor_depth = surface_depth(ctx.targets[*hit]);
          out.snapped = true;
        }
      }
      state.cursor_depth = std::max(state.cursor_depth, kMinCursorDepth);
      const Vec3 cursor(0.0, 0.0, state.cursor_depth);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ctx.targets.size(); ++i) {
        const double d = (ctx.targets[i].position_local - cursor).squaredNorm();
        if (d < best) {
          best = d;
          out.record = i;
        }
      }
      break;
    }
  }
  out.cursor_depth = state.cursor_depth;
  if (out.record) out.target_id = ctx.targets[*out.record].id;
  state.has_previous = true;
  state.previous_timestamp = pointer.timestamp;
  state.previous_direction = pointer.pointing_direction;
  return out;
}

}  // namespace adaptsel::techniques
