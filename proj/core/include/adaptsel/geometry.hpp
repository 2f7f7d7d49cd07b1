#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace adaptsel::geometry {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// Tolerance for incidence tests, in the units of the operands.
inline constexpr double kEpsilon = 1e-9;
/// Pieces of a clipped polygon smaller than this (square degrees) are dropped.
inline constexpr double kSliverArea = 1e-6;
/// Vertex count of the polygon standing in for the interaction-cone disk.
inline constexpr int kDiskSegments = 128;

/// A direction in the controller's control space: azimuth `h` and elevation
/// `v` in degrees, both measured from the pointing axis.
struct AngularPoint {
  double h = 0.0;
  double v = 0.0;

  friend bool operator==(const AngularPoint&, const AngularPoint&) = default;
};

inline AngularPoint operator+(AngularPoint a, AngularPoint b) { return {a.h + b.h, a.v + b.v}; }
inline AngularPoint operator-(AngularPoint a, AngularPoint b) { return {a.h - b.h, a.v - b.v}; }
inline AngularPoint operator*(double s, AngularPoint a) { return {s * a.h, s * a.v}; }
inline double dot(AngularPoint a, AngularPoint b) { return a.h * b.h + a.v * b.v; }
inline double cross(AngularPoint a, AngularPoint b) { return a.h * b.v - a.v * b.h; }
double length(AngularPoint a);

/// Simple polygon in control space. The outer ring is counter-clockwise and
/// stored open (first vertex not repeated). Holes only arise from occlusion
/// clipping, when a nearer silhouette lies strictly inside a farther one.
struct Polygon2D {
  std::vector<AngularPoint> vertices;
  std::vector<std::vector<AngularPoint>> holes;

  [[nodiscard]] bool empty() const { return vertices.empty(); }
  /// Shoelace area of the outer ring minus the holes; never negative.
  [[nodiscard]] double area() const;
};

/// Signed shoelace area of an open ring (positive when counter-clockwise).
double signed_area(std::span<const AngularPoint> ring);

/// Orthonormal controller frame. `right = up x forward` (x right, y up,
/// z forward, as in a left-handed engine convention).
struct ControllerFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 forward = Vec3::UnitZ();
  Vec3 up = Vec3::UnitY();
  Vec3 right = Vec3::UnitX();

  /// Builds the frame from a position and pointing direction. The up axis is
  /// world-up projected off `forward`; within 1 degree of world-up, world-z is
  /// used as the reference instead.
  static ControllerFrame from_pointer(const Vec3& origin, const Vec3& forward);

  [[nodiscard]] Vec3 to_local(const Vec3& world_point) const;
  [[nodiscard]] Vec3 to_world_direction(const Vec3& local_direction) const;
  /// World-space unit direction of a control-space point.
  [[nodiscard]] Vec3 direction_of(AngularPoint p) const;
};

/// Unit direction (controller-local) for azimuth/elevation in degrees.
Vec3 angular_to_local_direction(AngularPoint p);

enum class ProjectionStatus : std::uint8_t { ok, behind, degenerate };

struct Projection {
  AngularPoint point;
  ProjectionStatus status = ProjectionStatus::ok;

  [[nodiscard]] bool ok() const { return status == ProjectionStatus::ok; }
};

Projection project_point(const ControllerFrame& frame, const Vec3& world_point);
/// Same as project_point, for a point already expressed in the controller frame.
Projection project_local(const Vec3& local_point);

enum class Shape : std::uint8_t { sphere, box, cylinder, capsule };

/// Unit primitives: sphere and cube span [-0.5, 0.5]; cylinder and capsule
/// have radius 0.5 and span [-1, 1] along local y.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat rotation = Quat::Identity();
  Vec3 scale = Vec3::Ones();

  [[nodiscard]] Vec3 apply(const Vec3& local) const;
};

/// Fixed tessellation of a unit primitive (sphere: 162-vertex icosphere,
/// box: 8 corners, cylinder/capsule: 32-gon rings).
std::span<const Vec3> unit_tessellation(Shape shape);
/// Radius of the unit primitive's bounding sphere.
double unit_bounding_radius(Shape shape);

Polygon2D project_vertices(std::span<const Vec3> world_vertices, const ControllerFrame& frame);
Polygon2D project_primitive(Shape shape, const Pose& pose, const ControllerFrame& frame);

/// Counter-clockwise hull with collinear points removed. One or two distinct
/// points give a zero-area polygon.
Polygon2D convex_hull(std::vector<AngularPoint> points);

/// `subject` minus the union of `clips`, reduced to its largest piece.
Polygon2D polygon_difference(const Polygon2D& subject, std::span<const Polygon2D> clips);

/// Intersection of a hole-free polygon with a convex polygon.
Polygon2D clip_to_convex(const Polygon2D& subject, const Polygon2D& convex_clip);

/// Keeps the part of a convex polygon where dot(normal, p) <= offset.
Polygon2D clip_half_plane(const Polygon2D& convex, AngularPoint normal, double offset);

/// Area centroid; empty when the polygon has no area.
std::optional<AngularPoint> centroid(const Polygon2D& polygon);

/// Sorted parameters `t` at which `origin + t * direction` crosses the region
/// boundary (all rings), with coincident hits merged.
std::vector<double> line_region_intersections(AngularPoint origin, AngularPoint direction,
                                              const Polygon2D& polygon);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Maximal parameter intervals of the line that lie inside the region.
std::vector<Interval> line_inside_intervals(AngularPoint origin, AngularPoint direction,
                                            const Polygon2D& polygon);

/// Boundary-inclusive point membership (holes excluded).
bool contains(const Polygon2D& polygon, AngularPoint p);
/// Euclidean control-space distance from `p` to the region; 0 inside.
double distance_to_region(const Polygon2D& polygon, AngularPoint p);
/// Whether the polygon reaches within `radius` of the origin.
bool intersects_disk(const Polygon2D& polygon, double radius);

/// Regular polygon inscribed in the disk of `radius` about the origin.
Polygon2D disk_polygon(double radius, int segments = kDiskSegments);

/// Point-site Voronoi cells clipped to the disk of `clip_radius`. Sites that
/// coincide (within kEpsilon) with a lower-index site get an empty cell.
std::vector<Polygon2D> voronoi_cells_2d(std::span<const AngularPoint> sites, double clip_radius);

/// Half-space `dot(normal, x) <= offset`.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
};

struct Box3 {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  [[nodiscard]] bool contains(const Vec3& p, double tol = kEpsilon) const;
  [[nodiscard]] double volume() const;
};

/// Convex polyhedron stored by its faces; `vertices` and `planes` are derived.
struct Polyhedron3D {
  std::vector<Vec3> vertices;
  std::vector<Plane> planes;
  std::vector<std::vector<Vec3>> faces;
  bool degenerate = false;

  static Polyhedron3D from_box(const Box3& box);

  [[nodiscard]] double volume() const;
  [[nodiscard]] bool contains(const Vec3& p, double tol = 1e-9) const;
  /// Cuts away the part with dot(normal, x) > offset.
  void clip(const Plane& plane);
};

/// Voronoi cell of `site` against `other_sites`, bounded by `clip_box`.
/// Throws std::invalid_argument when the site lies outside the box. A site
/// coincident with one of `other_sites` is treated as the lower-index owner,
/// i.e. the coincident neighbour is ignored.
Polyhedron3D voronoi_cell_3d(const Vec3& site, std::span<const Vec3> other_sites,
                             const Box3& clip_box);

/// Hull of the projected polyhedron vertices; vertices behind the controller
/// are dropped.
Polygon2D project_polyhedron(const Polyhedron3D& poly, const ControllerFrame& frame);

}  // namespace adaptsel::geometry
