#pragma once

#include <deque>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adaptsel/objectives.hpp"
#include "adaptsel/scene.hpp"
#include "adaptsel/techniques.hpp"

namespace adaptsel::adapter {

using objectives::ObjectiveVector;
using techniques::ActivationRegion;
using techniques::Technique;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Weights {
  double speed = 0.5;
  double accuracy = 0.2;
  double comfort = 0.15;
  double familiarity = 0.15;

  [[nodiscard]] double sum() const { return speed + accuracy + comfort + familiarity; }
  [[nodiscard]] double combine(const ObjectiveVector& s) const {
    return speed * s.speed + accuracy * s.accuracy + comfort * s.comfort + familiarity * s.familiarity;
  }
  [[nodiscard]] Weights scaled(double factor) const {
    return {speed * factor, accuracy * factor, comfort * factor, familiarity * factor};
  }
};

struct AdapterConfig {
  std::string name = "application";
  /// Candidate techniques in declaration order; the first is the initial one.
  std::vector<Technique> techniques{Technique::ray_casting, Technique::sticky_ray, Technique::ray_cursor};
  Weights weights;
  double cone_radius = 20.0;  ///< degrees
  double alpha = 0.8;
  int window = 20;
  int required = 15;
  double margin_threshold = 0.0;
  double beta = 1.0;        ///< comfort sampling step, degrees
  double min_width = 0.05;  ///< narrowest displayable width, degrees
  objectives::FamiliarityTable familiarity = objectives::application_familiarity();
  objectives::EDModelParams edmodel;
  scene::ArmModel arm;
  std::optional<objectives::NormalizationBounds> bounds_override;
  techniques::StickySiteRule sticky_sites = techniques::StickySiteRule::outline_centroid;
  techniques::StickyHighlightRule sticky_highlight = techniques::StickyHighlightRule::outline_distance;
  techniques::RayCursorOptions ray_cursor;

  [[nodiscard]] objectives::NormalizationBounds bounds() const;
  [[nodiscard]] Technique initial_technique() const { return techniques.front(); }
  /// Throws ConfigError describing the first violated invariant.
  void validate() const;
};

AdapterConfig application_preset();
AdapterConfig study_preset();
/// Built-in preset by name, or `<dir>/<name>.json` when ADAPTSEL_PRESET_DIR
/// names a directory holding such a file. Throws ConfigError if unknown.
AdapterConfig load_preset(const std::string& name);

nlohmann::json config_to_json(const AdapterConfig& config);
/// Missing fields keep the values of `base`.
AdapterConfig config_from_json(const nlohmann::json& j, const AdapterConfig& base = application_preset());
/// FNV-1a of the canonical JSON form, as 16 hex digits.
std::string config_hash(const AdapterConfig& config);

struct WindowEntry {
  Technique optimal = Technique::ray_casting;
  double margin = 0.0;
};

/// Per-session adapter state: smoothed aggregates, the switching window and
/// the active technique.
struct AdapterState {
  explicit AdapterState(Technique initial) : current(initial) {}
  explicit AdapterState(const AdapterConfig& config) : current(config.initial_technique()) {}

  Technique current;
  std::map<Technique, ObjectiveVector> smoothed;
  std::deque<WindowEntry> window;

  [[nodiscard]] bool initialized() const { return !smoothed.empty(); }
};

struct TargetScore {
  std::string target_id;
  ObjectiveVector raw;
  ObjectiveVector normalized;
  double width = 0.0;
  double amplitude = 0.0;
  bool selectable = false;
};

struct TechniqueScore {
  Technique technique = Technique::ray_casting;
  ObjectiveVector aggregate;
  ObjectiveVector smoothed;
  double overall = 0.0;
  std::vector<TargetScore> targets;
};

struct FrameDecision {
  std::vector<TechniqueScore> scores;  ///< in configured technique order
  Technique optimal = Technique::ray_casting;
  Technique current = Technique::ray_casting;  ///< technique active when the frame started
  double margin = 0.0;
  bool switched = false;
  std::optional<Technique> new_technique;
  bool empty_space = false;

  [[nodiscard]] Technique active() const { return new_technique.value_or(current); }
  [[nodiscard]] const TechniqueScore* score_of(Technique t) const;
};

/// Unweighted per-objective mean; nullopt for an empty input.
std::optional<ObjectiveVector> aggregate(std::span<const ObjectiveVector> scores);

/// Exponential smoothing of per-technique aggregates. The first frame seeds
/// the state with the aggregate itself.
std::map<Technique, ObjectiveVector> smooth(const std::map<Technique, ObjectiveVector>& aggregates,
                                            AdapterState& state, double alpha);

/// Weighted-sum argmax plus the n-of-w switching rule.
FrameDecision decide(AdapterState& state, const std::map<Technique, ObjectiveVector>& smoothed,
                     const AdapterConfig& config);

/// Regions of every configured technique over one frame.
using RegionSet = std::map<Technique, std::vector<ActivationRegion>>;

RegionSet compute_regions(const scene::ContextFrame& ctx, const AdapterConfig& config);

/// Raw and normalized objectives of one target under one technique.
TargetScore score_target(Technique technique, const ActivationRegion& region, const scene::ContextFrame& ctx,
                         const AdapterConfig& config);

/// Full per-frame pipeline: score, normalize, aggregate, smooth, decide.
FrameDecision step(const scene::ContextFrame& ctx, const RegionSet& regions, const AdapterConfig& config,
                   AdapterState& state);

}  // namespace adaptsel::adapter
