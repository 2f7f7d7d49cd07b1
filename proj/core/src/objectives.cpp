#include "adaptsel/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace adaptsel::objectives {

namespace geo = adaptsel::geometry;
using geo::Vec3;

namespace {

constexpr double kRadPerDeg = std::numbers::pi / 180.0;
constexpr double kDegPerRad = 180.0 / std::numbers::pi;
const Vec3 kGravity(0.0, -9.81, 0.0);

}  // namespace

// ---------------------------------------------------------------------------
// Speed

double score_speed(double amplitude, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("score_speed: width must be positive");
  return -std::log2(std::max(amplitude, 0.0) / width + 1.0);
}

double score_speed(const techniques::ActivationRegion& region) {
  if (!region.selectable || !(region.width > 0.0))
    throw std::invalid_argument("score_speed: region is not selectable");
  return score_speed(region.amplitude, region.width);
}

// ---------------------------------------------------------------------------
// Accuracy

double erf(double x) {
  const double y = std::erf(std::abs(x));
  return x < 0.0 ? -y : y;
}

double normal_interval_mass(double lo, double hi, double mean, double sigma) {
  const double scale = 1.0 / (std::numbers::sqrt2 * sigma);
  return 0.5 * std::abs(erf((hi - mean) * scale) - erf((lo - mean) * scale));
}

double score_accuracy_box(const techniques::MovementBox& box, double mu, double sigma_x, double sigma_y) {
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) throw std::invalid_argument("score_accuracy: sigma must be positive");
  const double px = normal_interval_mass(box.x1, box.x2, mu, sigma_x);
  const double py = normal_interval_mass(box.y2, box.y1, 0.0, sigma_y);
  return std::clamp(px * py, 0.0, 1.0);
}

double score_accuracy(const techniques::ActivationRegion& region, const EDModelParams& params) {
  if (!region.selectable) return 0.0;
  const double a = region.amplitude;
  const double w = region.width;
  const double mu = params.mu_sign * params.mu(a, w);
  return score_accuracy_box(region.box, mu, params.sigma_x(a, w), params.sigma_y(a, w));
}

// ---------------------------------------------------------------------------
// Comfort

double shoulder_torque(const scene::ArmPosture& posture, const scene::ArmModel& arm) {
  const Vec3 upper = posture.elbow - posture.shoulder;
  const Vec3 fore = posture.hand - posture.elbow;
  const Vec3 upper_dir = upper.norm() > 0.0 ? Vec3(upper.normalized()) : Vec3(-Vec3::UnitY());
  const Vec3 fore_dir = fore.norm() > 0.0 ? Vec3(fore.normalized()) : upper_dir;
  const Vec3 hand_dir = posture.hand_direction.normalized();

  const Vec3 c_upper = posture.shoulder + arm.upper_arm.com_offset * upper_dir;
  const Vec3 c_fore = posture.elbow + arm.forearm.com_offset * fore_dir;
  const Vec3 c_hand = posture.hand + arm.hand.com_offset * hand_dir;
  const double mass = arm.total_mass();
  const Vec3 com =
      (arm.upper_arm.mass * c_upper + arm.forearm.mass * c_fore + arm.hand.mass * c_hand) / mass;
  const Vec3 r = com - posture.shoulder;
  return r.cross(mass * kGravity).norm();
}

double max_horizontal_torque(const scene::ArmModel& arm) {
  scene::ArmPosture extended;
  extended.shoulder = Vec3::Zero();
  extended.elbow = arm.upper_arm.length * Vec3::UnitZ();
  extended.hand = (arm.upper_arm.length + arm.forearm.length) * Vec3::UnitZ();
  extended.hand_direction = Vec3::UnitZ();
  return shoulder_torque(extended, arm);
}

scene::ArmPosture rotate_forearm(const scene::ArmPosture& posture, const Vec3& axis, double angle) {
  if (angle == 0.0 || axis.norm() == 0.0) return posture;
  const Eigen::AngleAxisd rot(angle * kRadPerDeg, axis.normalized());
  scene::ArmPosture out = posture;
  out.hand = posture.elbow + rot * (posture.hand - posture.elbow);
  out.hand_direction = rot * posture.hand_direction;
  return out;
}

std::vector<double> sweep_samples(double total, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("sweep_samples: beta must be positive");
  std::vector<double> out;
  const double tol = 1e-9 * std::max(1.0, total);
  for (int k = 0;; ++k) {
    const double a = k * beta;
    if (a >= total - tol) break;
    out.push_back(a);
  }
  out.push_back(std::max(total, 0.0));
  return out;
}

double score_comfort(const scene::ArmPosture& posture, const geo::ControllerFrame& frame,
                     AngularPoint aim_center, const scene::ArmModel& arm, double beta) {
  const Vec3 from = posture.hand_direction.normalized();
  const Vec3 to = frame.direction_of(aim_center);
  const Vec3 axis = from.cross(to);
  const double total = std::atan2(axis.norm(), from.dot(to)) * kDegPerRad;
  double sum = 0.0;
  for (double angle : sweep_samples(total, beta)) sum += shoulder_torque(rotate_forearm(posture, axis, angle), arm);
  return -sum;
}

// ---------------------------------------------------------------------------
// Familiarity and normalization

FamiliarityTable application_familiarity() {
  return {{Technique::ray_casting, 0.57}, {Technique::sticky_ray, 0.33}, {Technique::ray_cursor, 0.1}};
}

FamiliarityTable study_familiarity() {
  return {{Technique::sticky_ray, 0.7}, {Technique::ray_cursor, 0.3}};
}

double score_familiarity(Technique technique, const FamiliarityTable& table) {
  const auto it = table.find(technique);
  if (it == table.end())
    throw std::out_of_range("no familiarity score for " + std::string(techniques::technique_name(technique)));
  return it->second;
}

NormalizationBounds NormalizationBounds::derive(double cone_radius, double min_width, double beta,
                                                const scene::ArmModel& arm) {
  NormalizationBounds b;
  b.speed = {score_speed(cone_radius, min_width), 0.0};
  b.comfort = {-max_horizontal_torque(arm) * (cone_radius / beta + 1.0), 0.0};
  return b;
}

void NormalizationBounds::validate() const {
  for (const Bounds* b : {&speed, &accuracy, &comfort, &familiarity})
    if (!(b->min < b->max)) throw std::invalid_argument("normalization bounds need min < max");
}

double normalize(double raw, const Bounds& bounds) {
  return std::clamp((raw - bounds.min) / (bounds.max - bounds.min), 0.0, 1.0);
}

double normalize(Objective objective, double raw, const NormalizationBounds& bounds) {
  switch (objective) {
    case Objective::speed: return normalize(raw, bounds.speed);
    case Objective::accuracy: return normalize(raw, bounds.accuracy);
    case Objective::comfort: return normalize(raw, bounds.comfort);
    case Objective::familiarity: return normalize(raw, bounds.familiarity);
  }
  return 0.0;
}

}  // namespace adaptsel::objectives
