#include "adaptsel/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>

#define BOOST_GEOMETRY_NO_ROBUSTNESS
#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/box.hpp>

namespace adaptsel::geometry {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;
constexpr double kRadPerDeg = std::numbers::pi / 180.0;

}  // namespace

double length(AngularPoint a) { return std::sqrt(a.h * a.h + a.v * a.v); }

double signed_area(std::span<const AngularPoint> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const AngularPoint& a = ring[i];
    const AngularPoint& b = ring[(i + 1) % n];
    twice += a.h * b.v - b.h * a.v;
  }
  return 0.5 * twice;
}

double Polygon2D::area() const {
  double a = std::abs(signed_area(vertices));
  for (const auto& hole : holes) a -= std::abs(signed_area(hole));
  return std::max(a, 0.0);
}

// ---------------------------------------------------------------------------
// Frames and projection

ControllerFrame ControllerFrame::from_pointer(const Vec3& origin, const Vec3& forward) {
  ControllerFrame f;
  f.origin = origin;
  f.forward = forward.normalized();
  Vec3 reference = Vec3::UnitY();
  if (std::abs(f.forward.dot(reference)) > std::cos(1.0 * kRadPerDeg)) reference = Vec3::UnitZ();
  f.up = (reference - reference.dot(f.forward) * f.forward).normalized();
  f.right = f.up.cross(f.forward);
  return f;
}

Vec3 ControllerFrame::to_local(const Vec3& world_point) const {
  const Vec3 d = world_point - origin;
  return {d.dot(right), d.dot(up), d.dot(forward)};
}

Vec3 ControllerFrame::to_world_direction(const Vec3& local_direction) const {
  return local_direction.x() * right + local_direction.y() * up + local_direction.z() * forward;
}

Vec3 ControllerFrame::direction_of(AngularPoint p) const {
  return to_world_direction(angular_to_local_direction(p));
}

Vec3 angular_to_local_direction(AngularPoint p) {
  const double h = p.h * kRadPerDeg;
  const double v = p.v * kRadPerDeg;
  return {std::cos(v) * std::sin(h), std::sin(v), std::cos(v) * std::cos(h)};
}

Projection project_local(const Vec3& local_point) {
  if (local_point.norm() < kEpsilon) return {{}, ProjectionStatus::degenerate};
  if (local_point.z() <= 0.0) return {{}, ProjectionStatus::behind};
  const double h = std::atan2(local_point.x(), local_point.z());
  const double v = std::atan2(local_point.y(), std::sqrt(local_point.x() * local_point.x() + local_point.z() * local_point.z()));
  return {{h * kDegPerRad, v * kDegPerRad}, ProjectionStatus::ok};
}

Projection project_point(const ControllerFrame& frame, const Vec3& world_point) {
  return project_local(frame.to_local(world_point));
}

// ---------------------------------------------------------------------------
// Primitive tessellation

Vec3 Pose::apply(const Vec3& local) const {
  return position + rotation * local.cwiseProduct(scale);
}

namespace {

std::vector<Vec3> make_icosphere() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int level = 0; level < 2; ++level) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoints.find(key); it != midpoints.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  for (auto& v : verts) v *= 0.5;
  return verts;
}

std::vector<Vec3> make_box() {
  std::vector<Vec3> verts;
  for (double x : {-0.5, 0.5})
    for (double y : {-0.5, 0.5})
      for (double z : {-0.5, 0.5}) verts.emplace_back(x, y, z);
  return verts;
}

void append_ring(std::vector<Vec3>& verts, double radius, double y) {
  constexpr int kRing = 32;
  for (int i = 0; i < kRing; ++i) {
    const double a = 2.0 * std::numbers::pi * i / kRing;
    verts.emplace_back(radius * std::cos(a), y, radius * std::sin(a));
  }
}

std::vector<Vec3> make_cylinder() {
  std::vector<Vec3> verts;
  append_ring(verts, 0.5, -1.0);
  append_ring(verts, 0.5, 1.0);
  return verts;
}

std::vector<Vec3> make_capsule() {
  std::vector<Vec3> verts;
  for (double lat_deg : {0.0, 22.5, 45.0, 67.5}) {
    const double lat = lat_deg * kRadPerDeg;
    append_ring(verts, 0.5 * std::cos(lat), 0.5 + 0.5 * std::sin(lat));
    append_ring(verts, 0.5 * std::cos(lat), -0.5 - 0.5 * std::sin(lat));
  }
  verts.emplace_back(0.0, 1.0, 0.0);
  verts.emplace_back(0.0, -1.0, 0.0);
  return verts;
}

}  // namespace

std::span<const Vec3> unit_tessellation(Shape shape) {
  static const std::vector<Vec3> sphere = make_icosphere();
  static const std::vector<Vec3> box = make_box();
  static const std::vector<Vec3> cylinder = make_cylinder();
  static const std::vector<Vec3> capsule = make_capsule();
  switch (shape) {
    case Shape::sphere: return sphere;
    case Shape::box: return box;
    case Shape::cylinder: return cylinder;
    case Shape::capsule: return capsule;
  }
  return sphere;
}

double unit_bounding_radius(Shape shape) {
  switch (shape) {
    case Shape::sphere: return 0.5;
    case Shape::box: return std::sqrt(3.0) / 2.0;
    case Shape::cylinder: return std::sqrt(1.25);
    case Shape::capsule: return 1.0;
  }
  return 1.0;
}

Polygon2D project_vertices(std::span<const Vec3> world_vertices, const ControllerFrame& frame) {
  std::vector<AngularPoint> pts;
  pts.reserve(world_vertices.size());
  for (const Vec3& w : world_vertices) {
    const Projection p = project_point(frame, w);
    if (p.ok()) pts.push_back(p.point);
  }
  if (pts.empty()) return {};
  return convex_hull(std::move(pts));
}

Polygon2D project_primitive(Shape shape, const Pose& pose, const ControllerFrame& frame) {
  const auto unit = unit_tessellation(shape);
  std::vector<Vec3> world;
  world.reserve(unit.size());
  for (const Vec3& v : unit) world.push_back(pose.apply(v));
  return project_vertices(world, frame);
}

// ---------------------------------------------------------------------------
// Hull

Polygon2D convex_hull(std::vector<AngularPoint> points) {
  if (points.empty()) return {};
  std::sort(points.begin(), points.end(), [](AngularPoint a, AngularPoint b) {
    return a.h < b.h || (a.h == b.h && a.v < b.v);
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() <= 2) return {std::move(points), {}};

  std::vector<AngularPoint> hull(2 * points.size());
  std::size_t k = 0;
  auto turn = [](AngularPoint o, AngularPoint a, AngularPoint b) { return cross(a - o, b - o); };
  for (const AngularPoint& p : points) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = points.rbegin() + 1; it != points.rend(); ++it) {
    while (k >= lower && turn(hull[k - 2], hull[k - 1], *it) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return {std::move(hull), {}};
}

// ---------------------------------------------------------------------------
// Clipping

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, false, true>;
using BgMulti = bg::model::multi_polygon<BgPolygon>;
using BgBox = bg::model::box<BgPoint>;

namespace {

void append_ring_bg(std::span<const AngularPoint> ring, BgPolygon::ring_type& out) {
  out.clear();
  for (const AngularPoint& p : ring) out.emplace_back(p.h, p.v);
  if (!ring.empty()) out.emplace_back(ring.front().h, ring.front().v);
}

BgPolygon to_bg(const Polygon2D& poly) {
  BgPolygon out;
  append_ring_bg(poly.vertices, out.outer());
  for (const auto& hole : poly.holes) {
    out.inners().emplace_back();
    append_ring_bg(hole, out.inners().back());
  }
  bg::correct(out);
  return out;
}

std::vector<AngularPoint> from_bg_ring(const BgPolygon::ring_type& ring) {
  std::vector<AngularPoint> out;
  out.reserve(ring.size());
  for (const BgPoint& p : ring) out.push_back({p.x(), p.y()});
  if (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

Polygon2D from_bg(const BgPolygon& poly) {
  Polygon2D out;
  out.vertices = from_bg_ring(poly.outer());
  for (const auto& inner : poly.inners()) {
    auto ring = from_bg_ring(inner);
    if (std::abs(signed_area(ring)) >= kSliverArea) out.holes.push_back(std::move(ring));
  }
  return out;
}

BgBox bounds_of(std::span<const AngularPoint> ring) {
  BgBox box(BgPoint(std::numeric_limits<double>::max(), std::numeric_limits<double>::max()),
            BgPoint(std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()));
  for (const AngularPoint& p : ring) bg::expand(box, BgPoint(p.h, p.v));
  return box;
}

}  // namespace

Polygon2D polygon_difference(const Polygon2D& subject, std::span<const Polygon2D> clips) {
  if (subject.vertices.size() < 3 || subject.area() < kSliverArea) return {};
  const BgBox subject_box = bounds_of(subject.vertices);

  BgMulti current;
  current.push_back(to_bg(subject));
  bool touched = false;
  for (const Polygon2D& clip : clips) {
    if (clip.vertices.size() < 3) continue;
    if (bg::disjoint(subject_box, bounds_of(clip.vertices))) continue;
    const BgPolygon clip_bg = to_bg(clip);
    BgMulti next;
    bg::difference(current, clip_bg, next);
    current = std::move(next);
    touched = true;
    if (current.empty()) return {};
  }
  if (!touched) return subject;

  const BgPolygon* best = nullptr;
  double best_area = kSliverArea;
  for (const BgPolygon& piece : current) {
    const double a = std::abs(bg::area(piece));
    if (a >= best_area) {
      best_area = a;
      best = &piece;
    }
  }
  if (best == nullptr) return {};
  return from_bg(*best);
}

Polygon2D clip_half_plane(const Polygon2D& convex, AngularPoint normal, double offset) {
  const auto& in = convex.vertices;
  const std::size_t n = in.size();
  if (n == 0) return {};
  std::vector<AngularPoint> out;
  out.reserve(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const AngularPoint a = in[i];
    const AngularPoint b = in[(i + 1) % n];
    const double da = dot(normal, a) - offset;
    const double db = dot(normal, b) - offset;
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  std::vector<AngularPoint> cleaned;
  cleaned.reserve(out.size());
  for (const AngularPoint& p : out) {
    if (cleaned.empty() || length(p - cleaned.back()) > kEpsilon) cleaned.push_back(p);
  }
  while (cleaned.size() > 1 && length(cleaned.front() - cleaned.back()) <= kEpsilon) cleaned.pop_back();
  if (cleaned.size() < 3 || std::abs(signed_area(cleaned)) < kSliverArea * 1e-3) return {};
  return {std::move(cleaned), {}};
}

Polygon2D clip_to_convex(const Polygon2D& subject, const Polygon2D& convex_clip) {
  if (subject.vertices.size() < 3 || convex_clip.vertices.size() < 3) return {};
  const auto& c = convex_clip.vertices;
  AngularPoint mid{0.0, 0.0};
  for (const AngularPoint& p : c) mid = mid + p;
  mid = AngularPoint{mid.h / static_cast<double>(c.size()), mid.v / static_cast<double>(c.size())};
  double inscribed = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const AngularPoint edge = c[(i + 1) % c.size()] - c[i];
    const double len = std::sqrt(dot(edge, edge));
    if (len > 0.0) inscribed = std::min(inscribed, std::abs(edge.h * (mid.v - c[i].v) - edge.v * (mid.h - c[i].h)) / len);
  }
  const bool inside = std::all_of(subject.vertices.begin(), subject.vertices.end(), [&](AngularPoint p) {
    const AngularPoint d = p - mid;
    return dot(d, d) < inscribed * inscribed;
  });
  Polygon2D current{subject.vertices, {}};
  if (inside) return std::abs(signed_area(current.vertices)) < kSliverArea * 1e-3 ? Polygon2D{} : current;
  bool clipped = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const AngularPoint a = c[i];
    const AngularPoint b = c[(i + 1) % c.size()];
    // Interior of a CCW edge lies to its left: cross(b - a, p - a) >= 0.
    const AngularPoint edge = b - a;
    const AngularPoint normal{edge.v, -edge.h};
    const double offset = dot(normal, a);
    const bool crosses = std::any_of(current.vertices.begin(), current.vertices.end(),
                                     [&](AngularPoint p) { return dot(normal, p) > offset; });
    if (!crosses) continue;
    current = clip_half_plane(current, normal, offset);
    clipped = true;
    if (current.empty()) return {};
  }
  if (!clipped && std::abs(signed_area(current.vertices)) < kSliverArea * 1e-3) return {};
  return current;
}

// ---------------------------------------------------------------------------
// Measures and queries

std::optional<AngularPoint> centroid(const Polygon2D& polygon) {
  double area_sum = 0.0;
  double ch = 0.0;
  double cv = 0.0;
  auto accumulate = [&](std::span<const AngularPoint> ring, double sign) {
    const std::size_t n = ring.size();
    if (n < 3) return;
    // Orient each ring so that outer counts positive and holes negative.
    const double ring_sign = signed_area(ring) >= 0.0 ? sign : -sign;
    // Offset by the first vertex to limit cancellation.
    const AngularPoint o = ring[0];
    for (std::size_t i = 0; i < n; ++i) {
      const AngularPoint a = ring[i] - o;
      const AngularPoint b = ring[(i + 1) % n] - o;
      const double w = (a.h * b.v - b.h * a.v) * ring_sign;
      area_sum += w;
      ch += (a.h + b.h + 3.0 * o.h) * w;
      cv += (a.v + b.v + 3.0 * o.v) * w;
    }
  };
  accumulate(polygon.vertices, 1.0);
  for (const auto& hole : polygon.holes) accumulate(hole, -1.0);
  if (0.5 * area_sum < kSliverArea * 1e-3) return std::nullopt;
  return AngularPoint{ch / (3.0 * area_sum), cv / (3.0 * area_sum)};
}

namespace {

template <typename Fn>
void for_each_edge(const Polygon2D& polygon, Fn&& fn) {
  auto ring_edges = [&](std::span<const AngularPoint> ring) {
    const std::size_t n = ring.size();
    if (n < 2) return;
    for (std::size_t i = 0; i < n; ++i) fn(ring[i], ring[(i + 1) % n]);
  };
  ring_edges(polygon.vertices);
  for (const auto& hole : polygon.holes) ring_edges(hole);
}

bool ring_contains(std::span<const AngularPoint> ring, AngularPoint p, bool& on_boundary) {
  const std::size_t n = ring.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const AngularPoint a = ring[j];
    const AngularPoint b = ring[i];
    const AngularPoint ab = b - a;
    const AngularPoint ap = p - a;
    const double len2 = dot(ab, ab);
    if (std::abs(cross(ab, ap)) <= kEpsilon * std::max(1.0, std::sqrt(len2))) {
      const double t = len2 > 0.0 ? dot(ap, ab) / len2 : 0.0;
      if (t >= -kEpsilon && t <= 1.0 + kEpsilon) {
        on_boundary = true;
        return true;
      }
    }
    if ((a.v > p.v) != (b.v > p.v)) {
      const double x = a.h + (p.v - a.v) * ab.h / ab.v;
      if (p.h < x) inside = !inside;
    }
  }
  return inside;
}

double segment_distance(AngularPoint p, AngularPoint a, AngularPoint b) {
  const AngularPoint ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return length(p - (a + t * ab));
}

}  // namespace

bool contains(const Polygon2D& polygon, AngularPoint p) {
  if (polygon.vertices.size() < 3) return false;
  bool boundary = false;
  if (!ring_contains(polygon.vertices, p, boundary)) return false;
  if (boundary) return true;
  for (const auto& hole : polygon.holes) {
    bool hole_boundary = false;
    if (ring_contains(hole, p, hole_boundary) && !hole_boundary) return false;
  }
  return true;
}

double distance_to_region(const Polygon2D& polygon, AngularPoint p) {
  if (polygon.vertices.empty()) return std::numeric_limits<double>::infinity();
  if (contains(polygon, p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  if (polygon.vertices.size() == 1) return length(p - polygon.vertices[0]);
  for_each_edge(polygon, [&](AngularPoint a, AngularPoint b) {
    best = std::min(best, segment_distance(p, a, b));
  });
  return best;
}

bool intersects_disk(const Polygon2D& polygon, double radius) {
  return distance_to_region(polygon, {0.0, 0.0}) <= radius;
}

std::vector<double> line_region_intersections(AngularPoint origin, AngularPoint direction,
                                              const Polygon2D& polygon) {
  std::vector<double> ts;
  if (polygon.vertices.size() < 3) return ts;
  for_each_edge(polygon, [&](AngularPoint a, AngularPoint b) {
    const AngularPoint e = b - a;
    const double denom = cross(direction, e);
    const AngularPoint ao = a - origin;
    const double scale = std::max(1.0, length(e));
    if (std::abs(denom) <= kEpsilon * scale) {
      // Parallel: only a collinear edge contributes (its endpoints).
      if (std::abs(cross(direction, ao)) <= kEpsilon * scale) {
        ts.push_back(dot(a - origin, direction));
        ts.push_back(dot(b - origin, direction));
      }
      return;
    }
    const double s = cross(ao, direction) / denom;
    if (s < -kEpsilon || s > 1.0 + kEpsilon) return;
    ts.push_back(cross(ao, e) / denom);
  });
  std::sort(ts.begin(), ts.end());
  std::vector<double> merged;
  merged.reserve(ts.size());
  for (double t : ts) {
    if (merged.empty() || t - merged.back() > 1e-9 * std::max(1.0, std::abs(t))) merged.push_back(t);
  }
  return merged;
}

std::vector<Interval> line_inside_intervals(AngularPoint origin, AngularPoint direction,
                                            const Polygon2D& polygon) {
  const auto ts = line_region_intersections(origin, direction, polygon);
  std::vector<Interval> out;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double mid = 0.5 * (ts[i] + ts[i + 1]);
    if (!contains(polygon, origin + mid * direction)) continue;
    if (!out.empty() && std::abs(out.back().hi - ts[i]) <= 1e-12) {
      out.back().hi = ts[i + 1];
    } else {
      out.push_back({ts[i], ts[i + 1]});
    }
  }
  return out;
}

Polygon2D disk_polygon(double radius, int segments) {
  Polygon2D out;
  out.vertices.reserve(static_cast<std::size_t>(segments));
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / segments;
    out.vertices.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  return out;
}

std::vector<Polygon2D> voronoi_cells_2d(std::span<const AngularPoint> sites, double clip_radius) {
  const std::size_t n = sites.size();
  std::vector<Polygon2D> cells(n);
  if (n == 0) return cells;
  const Polygon2D disk = disk_polygon(clip_radius);

  std::vector<bool> duplicate(n, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i && !duplicate[i]; ++j)
      if (!duplicate[j] && length(sites[i] - sites[j]) <= kEpsilon) duplicate[i] = true;

  std::vector<std::size_t> order(n);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (duplicate[i]) continue;
    const AngularPoint s = sites[i];
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || duplicate[j]) continue;
      dist[j] = length(sites[j] - s);
      order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

    Polygon2D cell = disk;
    auto reach = [&] {
      double r = 0.0;
      for (const AngularPoint& v : cell.vertices) r = std::max(r, length(v - s));
      return r;
    };
    double radius = reach();
    for (std::size_t j : order) {
      if (cell.empty()) break;
      if (0.5 * dist[j] > radius + kEpsilon) break;
      const AngularPoint other = sites[j];
      const AngularPoint normal = other - s;
      const double offset = 0.5 * (dot(other, other) - dot(s, s));
      cell = clip_half_plane(cell, normal, offset);
      radius = reach();
    }
    cells[i] = std::move(cell);
  }
  return cells;
}

// ---------------------------------------------------------------------------
// 3D cells

bool Box3::contains(const Vec3& p, double tol) const {
  return (p.array() >= lo.array() - tol).all() && (p.array() <= hi.array() + tol).all();
}

double Box3::volume() const { return (hi - lo).cwiseMax(0.0).prod(); }

Polyhedron3D Polyhedron3D::from_box(const Box3& box) {
  Polyhedron3D p;
  const Vec3& a = box.lo;
  const Vec3& b = box.hi;
  auto corner = [&](int x, int y, int z) {
    return Vec3(x ? b.x() : a.x(), y ? b.y() : a.y(), z ? b.z() : a.z());
  };
  p.faces = {
      {corner(0, 0, 0), corner(0, 1, 0), corner(0, 1, 1), corner(0, 0, 1)},
      {corner(1, 0, 0), corner(1, 0, 1), corner(1, 1, 1), corner(1, 1, 0)},
      {corner(0, 0, 0), corner(0, 0, 1), corner(1, 0, 1), corner(1, 0, 0)},
      {corner(0, 1, 0), corner(1, 1, 0), corner(1, 1, 1), corner(0, 1, 1)},
      {corner(0, 0, 0), corner(1, 0, 0), corner(1, 1, 0), corner(0, 1, 0)},
      {corner(0, 0, 1), corner(0, 1, 1), corner(1, 1, 1), corner(1, 0, 1)},
  };
  p.planes = {{-Vec3::UnitX(), -a.x()}, {Vec3::UnitX(), b.x()}, {-Vec3::UnitY(), -a.y()},
              {Vec3::UnitY(), b.y()},   {-Vec3::UnitZ(), -a.z()}, {Vec3::UnitZ(), b.z()}};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) p.vertices.push_back(corner(x, y, z));
  p.degenerate = box.volume() <= 0.0;
  return p;
}

double Polyhedron3D::volume() const {
  if (faces.empty() || vertices.empty()) return 0.0;
  Vec3 inner = Vec3::Zero();
  for (const Vec3& v : vertices) inner += v;
  inner /= static_cast<double>(vertices.size());
  double vol = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& face = faces[f];
    if (face.size() < 3) continue;
    Vec3 area_vec = Vec3::Zero();
    for (std::size_t i = 1; i + 1 < face.size(); ++i)
      area_vec += (face[i] - face[0]).cross(face[i + 1] - face[0]);
    const double face_area = 0.5 * area_vec.norm();
    const double height = planes[f].offset - planes[f].normal.dot(inner);
    vol += face_area * std::abs(height) / 3.0;
  }
  return vol;
}

bool Polyhedron3D::contains(const Vec3& p, double tol) const {
  if (faces.empty()) return false;
  for (const Plane& pl : planes)
    if (pl.normal.dot(p) > pl.offset + tol) return false;
  return true;
}

namespace {

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

// Edge-plane intersection evaluated in a canonical endpoint order so that the
// two faces sharing an edge produce the identical point.
Vec3 edge_cut(const Vec3& a, double da, const Vec3& b, double db) {
  if (lex_less(b, a)) return edge_cut(b, db, a, da);
  const double t = da / (da - db);
  return a + t * (b - a);
}

// Sorts and removes exact duplicates. Edge cuts are computed canonically, so
// a point shared by several faces is bit-identical in each.
void sort_unique(std::vector<Vec3>& pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) { return lex_less(a, b); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
}

}  // namespace

void Polyhedron3D::clip(const Plane& plane) {
  if (faces.empty()) return;
  const double tol = 1e-12 * std::max(1.0, std::abs(plane.offset));
  bool any_out = false;
  bool any_in = false;
  for (const Vec3& v : vertices) {
    const double d = plane.normal.dot(v) - plane.offset;
    if (d > tol) any_out = true;
    if (d < -tol) any_in = true;
  }
  if (!any_out) return;
  if (!any_in) {
    faces.clear();
    planes.clear();
    vertices.clear();
    degenerate = true;
    return;
  }

  std::vector<std::vector<Vec3>> new_faces;
  std::vector<Plane> new_planes;
  new_faces.reserve(faces.size() + 1);
  new_planes.reserve(faces.size() + 1);
  std::vector<Vec3> cap;
  cap.reserve(2 * faces.size());
  std::vector<Vec3> cuts;
  cuts.reserve(2 * faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    auto& face = faces[f];
    bool face_out = false;
    bool face_in = false;
    for (const Vec3& v : face) {
      const double d = plane.normal.dot(v) - plane.offset;
      if (d > tol) face_out = true;
      else if (d < -tol) face_in = true;
      else cap.push_back(v);
    }
    if (!face_out) {
      new_faces.push_back(std::move(face));
      new_planes.push_back(planes[f]);
      continue;
    }
    if (!face_in) continue;
    std::vector<Vec3> out;
    const std::size_t n = face.size();
    out.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3& a = face[i];
      const Vec3& b = face[(i + 1) % n];
      double da = plane.normal.dot(a) - plane.offset;
      double db = plane.normal.dot(b) - plane.offset;
      if (std::abs(da) <= tol) da = 0.0;
      if (std::abs(db) <= tol) db = 0.0;
      if (da <= 0.0) out.push_back(a);
      if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
        const Vec3 p = edge_cut(a, da, b, db);
        out.push_back(p);
        cap.push_back(p);
        cuts.push_back(p);
      }
    }
    if (out.size() >= 3) {
      new_faces.push_back(std::move(out));
      new_planes.push_back(planes[f]);
    }
  }

  sort_unique(cap);
  if (cap.size() >= 3) {
    Vec3 center = Vec3::Zero();
    for (const Vec3& p : cap) center += p;
    center /= static_cast<double>(cap.size());
    const Vec3 n = plane.normal.normalized();
    const Vec3 u = n.unitOrthogonal();
    const Vec3 w = n.cross(u);
    std::vector<std::pair<double, Vec3>> sorted;
    sorted.reserve(cap.size());
    for (const Vec3& p : cap) {
      const Vec3 d = p - center;
      sorted.emplace_back(std::atan2(d.dot(w), d.dot(u)), p);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Vec3> face;
    face.reserve(sorted.size());
    for (auto& entry : sorted) face.push_back(entry.second);
    new_faces.push_back(std::move(face));
    new_planes.push_back(plane);
  }

  faces = std::move(new_faces);
  planes = std::move(new_planes);
  // Surviving vertices plus the new edge cuts (each cut is produced by both
  // faces sharing the edge, bit-identically).
  std::erase_if(vertices, [&](const Vec3& v) { return plane.normal.dot(v) - plane.offset > tol; });
  sort_unique(cuts);
  vertices.insert(vertices.end(), cuts.begin(), cuts.end());
  degenerate = faces.size() < 4;
}

Polyhedron3D voronoi_cell_3d(const Vec3& site, std::span<const Vec3> other_sites,
                             const Box3& clip_box) {
  if (!clip_box.contains(site)) throw std::invalid_argument("voronoi_cell_3d: site outside clip box");
  Polyhedron3D cell = Polyhedron3D::from_box(clip_box);

  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(other_sites.size());
  for (std::size_t j = 0; j < other_sites.size(); ++j)
    order.emplace_back((other_sites[j] - site).norm(), j);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  auto reach = [&] {
    double r = 0.0;
    for (const Vec3& v : cell.vertices) r = std::max(r, (v - site).norm());
    return r;
  };
  double radius = reach();
  for (const auto& [d, j] : order) {
    if (d <= kEpsilon) continue;
    if (cell.faces.empty()) break;
    if (0.5 * d > radius + kEpsilon) break;
    const Vec3& other = other_sites[j];
    const Vec3 normal = (other - site) / d;
    cell.clip({normal, normal.dot(0.5 * (other + site))});
    radius = reach();
  }
  cell.degenerate = cell.faces.size() < 4 || cell.volume() <= 0.0;
  return cell;
}

Polygon2D project_polyhedron(const Polyhedron3D& poly, const ControllerFrame& frame) {
  return project_vertices(poly.vertices, frame);
}

}  // namespace adaptsel::geometry
