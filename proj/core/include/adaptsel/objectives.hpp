#pragma once

#include <map>
#include <stdexcept>

#include "adaptsel/geometry.hpp"
#include "adaptsel/scene.hpp"
#include "adaptsel/techniques.hpp"

namespace adaptsel::objectives {

using geometry::AngularPoint;
using techniques::Technique;

/// Raw or normalized per-target objective scores. Raw speed and comfort are
/// non-positive; accuracy and familiarity live in [0, 1].
struct ObjectiveVector {
  double speed = 0.0;
  double accuracy = 0.0;
  double comfort = 0.0;
  double familiarity = 0.0;

  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
};

enum class Objective { speed, accuracy, comfort, familiarity };

/// c_amplitude * A + c_width * W + c_constant, with A and W in degrees.
struct LinearModel {
  double amplitude = 0.0;
  double width = 0.0;
  double constant = 0.0;

  [[nodiscard]] double operator()(double a, double w) const { return amplitude * a + width * w + constant; }
};

/// Endpoint-distribution regressions (degrees in, degrees out).
struct EDModelParams {
  LinearModel mu{0.0, -0.1441, 0.2649};
  LinearModel sigma_x{0.0066, 0.1025, 0.2663};
  LinearModel sigma_y{0.0085, 0.0679, 0.1437};
  /// +1 places mu along the movement direction, -1 against it.
  double mu_sign = 1.0;
};

struct Bounds {
  double min = 0.0;
  double max = 1.0;
};

struct NormalizationBounds {
  Bounds speed;
  Bounds accuracy{0.0, 1.0};
  Bounds comfort;
  Bounds familiarity{0.0, 1.0};

  /// Limits derived from the cone radius, the narrowest displayable width
  /// and the most strenuous full-cone sweep.
  static NormalizationBounds derive(double cone_radius, double min_width, double beta,
                                    const scene::ArmModel& arm);
  void validate() const;
};

/// -log2(A / W + 1).
double score_speed(double amplitude, double width);
/// Throws std::invalid_argument for unselectable regions (the caller assigns
/// the minimum instead).
double score_speed(const techniques::ActivationRegion& region);

/// Error function, odd-symmetric.
double erf(double x);
/// Mass of N(mean, sigma^2) over [lo, hi] (order of the bounds irrelevant).
double normal_interval_mass(double lo, double hi, double mean, double sigma);

/// Mass of the endpoint distribution over the region's movement box; 0 for
/// unselectable regions.
double score_accuracy(const techniques::ActivationRegion& region, const EDModelParams& params);
double score_accuracy_box(const techniques::MovementBox& box, double mu, double sigma_x, double sigma_y);

/// Magnitude of the gravitational torque about the shoulder.
double shoulder_torque(const scene::ArmPosture& posture, const scene::ArmModel& arm);
/// Torque with the arm fully extended horizontally.
double max_horizontal_torque(const scene::ArmModel& arm);

/// Posture after rotating forearm and hand about the fixed elbow by `angle`
/// degrees around `axis`.
scene::ArmPosture rotate_forearm(const scene::ArmPosture& posture, const geometry::Vec3& axis, double angle);

/// Negated torque sum along the forearm sweep from the current pointing
/// direction to `aim_center`, sampled every `beta` degrees (both ends included).
double score_comfort(const scene::ArmPosture& posture, const geometry::ControllerFrame& frame,
                     AngularPoint aim_center, const scene::ArmModel& arm, double beta);
/// Sample angles (degrees) used by score_comfort for a sweep of `total`.
std::vector<double> sweep_samples(double total, double beta);

using FamiliarityTable = std::map<Technique, double>;

FamiliarityTable application_familiarity();
FamiliarityTable study_familiarity();
/// Throws std::out_of_range for techniques missing from the table.
double score_familiarity(Technique technique, const FamiliarityTable& table);

double normalize(double raw, const Bounds& bounds);
double normalize(Objective objective, double raw, const NormalizationBounds& bounds);

}  // namespace adaptsel::objectives
