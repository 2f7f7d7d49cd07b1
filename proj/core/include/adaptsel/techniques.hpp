#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adaptsel/geometry.hpp"
#include "adaptsel/scene.hpp"

namespace adaptsel::techniques {

using geometry::AngularPoint;
using geometry::Polygon2D;

enum class Technique : std::uint8_t { ray_casting, sticky_ray, ray_cursor };

inline constexpr std::array<Technique, 3> kAllTechniques = {
    Technique::ray_casting, Technique::sticky_ray, Technique::ray_cursor};

std::string_view technique_name(Technique t);
std::optional<Technique> parse_technique(std::string_view name);

/// Bounds of the activation region in the movement-aligned frame centred on
/// the aim centre: x along the movement line, y perpendicular (y1 >= y2).
struct MovementBox {
  double x1 = 0.0;
  double x2 = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;
};

struct ActivationRegion {
  std::string target_id;
  Polygon2D region;
  double width = 0.0;      ///< W, degrees along the movement line
  double amplitude = 0.0;  ///< A, degrees from the pointing axis to the aim centre
  MovementBox box;
  AngularPoint aim_center;
  AngularPoint axis{1.0, 0.0};  ///< unit movement direction
  bool selectable = false;
};

/// W, A and box of `region` for movement from the pointing axis toward the
/// region's centroid. Regions without area (or without a chord along the
/// movement line) come back unselectable with W = 0.
ActivationRegion measure_region(std::string target_id, Polygon2D region);

/// Occlusion-clipped outlines taken as they are.
std::vector<ActivationRegion> raycast_regions(const scene::ContextFrame& ctx);

enum class StickySiteRule : std::uint8_t {
  outline_centroid,  ///< centroid of the clipped outline
  projected_center,  ///< projection of the 3D centre
};

/// 2D Voronoi cells of the visible targets, clipped to the cone disk.
std::vector<ActivationRegion> stickyray_regions(const scene::ContextFrame& ctx,
                                                StickySiteRule rule = StickySiteRule::outline_centroid);

struct RayCursorOptions {
  double near_depth = 0.1;   ///< meters
  double far_margin = 1.0;   ///< meters beyond the deepest target
  bool clip_to_cone = true;
};

/// Axis-aligned box in the controller frame that encloses the cone between
/// the near depth and the far limit, grown to contain every target centre.
geometry::Box3 interaction_box(const scene::ContextFrame& ctx, const RayCursorOptions& options);

/// Projected 3D Voronoi cells of the target centres; occlusion is ignored.
std::vector<ActivationRegion> raycursor_regions(const scene::ContextFrame& ctx,
                                                const RayCursorOptions& options = {});

// ---------------------------------------------------------------------------
// Runtime highlight

enum class StickyHighlightRule : std::uint8_t { outline_distance, centroid_distance };

struct TechniqueState {
  Technique kind = Technique::ray_casting;
  double cursor_depth = 1.0;
  double last_trackpad_release = -std::numeric_limits<double>::infinity();
  bool swiping = false;
  bool has_previous = false;
  double previous_timestamp = 0.0;
  geometry::Vec3 previous_direction = geometry::Vec3::UnitZ();
  StickyHighlightRule sticky_rule = StickyHighlightRule::outline_distance;
};

/// Minimum depth the cursor may take.
inline constexpr double kMinCursorDepth = 0.05;
/// Seconds the trackpad must be released before snapping re-engages.
inline constexpr double kSnapReenableDelay = 1.0;
/// Angular speed (deg/s) at which the cursor transfer gain saturates.
inline constexpr double kCursorSpeedCap = 90.0;

/// Meters of cursor travel per unit of trackpad swipe at the given controller
/// angular speed (deg/s).
double cursor_gain(double angular_speed);

/// Controller angular speed implied by the previous and the given pointer.
double angular_speed(const TechniqueState& state, const scene::PointerState& pointer);

struct Highlight {
  std::optional<std::size_t> record;  ///< index into ctx.targets
  std::optional<std::string> target_id;
  /// End point of the bent secondary ray (StickyRay only).
  std::optional<AngularPoint> bent_ray_endpoint;
  double cursor_depth = 0.0;
  bool snapped = false;
};

/// Advances `state` by one frame and reports the highlighted target.
Highlight highlight(TechniqueState& state, const scene::ContextFrame& ctx);

}  // namespace adaptsel::techniques
