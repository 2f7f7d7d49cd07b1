#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "adaptsel/adapter.hpp"
#include "adaptsel/geometry.hpp"
#include "adaptsel/scene.hpp"
#include "adaptsel/techniques.hpp"

namespace adaptsel::sim {

using geometry::Vec3;
using techniques::Technique;

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Portable seeded generator: splitmix64 seeding a 64-bit Mersenne twister,
/// with distributions computed here so streams match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  double uniform();                    ///< [0, 1)
  double uniform(double lo, double hi);
  double normal();                     ///< standard normal (Box-Muller)
  std::size_t index(std::size_t n);    ///< [0, n)

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

enum class EnvironmentKind : std::uint8_t { sparse, dense, flat, deep };

inline constexpr EnvironmentKind kAllEnvironments[] = {EnvironmentKind::sparse, EnvironmentKind::dense,
                                                       EnvironmentKind::flat, EnvironmentKind::deep};

std::string_view environment_name(EnvironmentKind kind);
std::optional<EnvironmentKind> parse_environment(std::string_view name);

/// Standing viewer: eye height and the spawn region laid out in front of it
/// along +z.
struct EnvironmentSpec {
  EnvironmentKind kind = EnvironmentKind::sparse;
  Vec3 region_size{3.0, 3.0, 3.0};  ///< width (x), height (y), depth (z), meters
  double distance = 2.0;            ///< viewer to the region's front face, meters
  double region_center_height = 1.5;
  int object_count = 10;            ///< including the target
  double target_size = 2.5;         ///< visual angle, degrees
  double distractor_min = 2.0;      ///< degrees
  double distractor_max = 4.0;      ///< degrees
  double boundary_margin = 0.4;     ///< target to region boundary, meters
  double center_margin = 0.2;       ///< target to region centre, meters
  Vec3 viewer{0.0, 1.6, 0.0};
  std::uint64_t seed = 1;
  int max_attempts = 20000;         ///< placement retries per object

  static EnvironmentSpec study(EnvironmentKind kind, double target_size, std::uint64_t seed);

  [[nodiscard]] Vec3 region_center() const;
  [[nodiscard]] geometry::Box3 region() const;
  void validate() const;
};

/// Metric size of an object subtending `degrees` at `distance` meters.
double metric_size(double degrees, double distance);

/// Seeded scene: a sphere target (id "target", recorded as the designated
/// target) and non-intersecting distractors of random primitive, size and
/// rotation. Throws GenerationError when placement fails.
scene::Scene generate_environment(const EnvironmentSpec& spec);

struct TrajectoryParams {
  double angular_speed = 90.0;  ///< deg/s
  double tremor_sigma = 0.2;    ///< deg per axis, per frame
  double dwell = 0.15;          ///< s with the target highlighted before the trigger
  double frame_rate = 90.0;     ///< Hz
  double depth_speed = 2.0;     ///< m/s of cursor travel while swiping
  double ready_duration = 0.5;  ///< s spent on the ready panel before the trial starts
  double timeout = 15.0;        ///< s
  double reposition_speed = 0.5;  ///< m/s of lateral head and hand motion
  double arrival_angle = 0.5;   ///< deg; closer than this counts as arrived

  void validate() const;
};

nlohmann::json trajectory_to_json(const TrajectoryParams& p);
TrajectoryParams trajectory_from_json(const nlohmann::json& j, const std::string& path = "$.trajectory");

struct SwitchEvent {
  double t = 0.0;  ///< seconds from trial start (negative during the ready phase)
  std::size_t frame = 0;
  Technique from = Technique::ray_casting;
  Technique to = Technique::ray_casting;
};

struct TrialResult {
  std::string trial_id;
  bool success = false;
  bool timeout = false;
  double selection_time = 0.0;         ///< s
  double translational_movement = 0.0; ///< m, controller path length during the trial
  double rotational_movement = 0.0;    ///< deg, summed pointer rotation during the trial
  int error_count = 0;
  std::vector<SwitchEvent> switches;
  Technique initial_technique = Technique::ray_casting;
  Technique final_technique = Technique::ray_casting;
  std::size_t frames = 0;
  Vec3 start_direction = Vec3::UnitZ();
  Vec3 end_direction = Vec3::UnitZ();
  Vec3 start_position = Vec3::Zero();
  Vec3 end_position = Vec3::Zero();
};

struct TrialSpec {
  std::string trial_id = "trial";
  std::shared_ptr<const scene::Scene> scene;
  std::string target_id;
  /// Fixed technique, or nullopt for adaptive switching.
  std::optional<Technique> fixed;
  TrajectoryParams trajectory;
  adapter::AdapterConfig config;
  std::uint64_t seed = 1;
  bool verbose_trace = false;
};

/// Config the engine actually runs for `spec`: the adapter config itself in
/// adaptive mode, or a single-technique variant of it in fixed mode.
adapter::AdapterConfig effective_config(const TrialSpec& spec);

/// Scripted trial; writes a replayable trace to `trace` when given. Throws
/// std::invalid_argument when the target is missing or unselectable.
TrialResult run_trial(const TrialSpec& spec, std::ostream* trace = nullptr);

struct BatchConfig {
  std::vector<EnvironmentKind> environments{std::begin(kAllEnvironments), std::end(kAllEnvironments)};
  std::vector<double> target_sizes{2.5, 0.5};
  int repetitions = 8;
  /// nullopt = adaptive.
  std::vector<std::optional<Technique>> modes{std::nullopt, Technique::sticky_ray, Technique::ray_cursor};
  std::uint64_t seed = 1;
  TrajectoryParams trajectory;
  int threads = 0;  ///< 0 = hardware concurrency
  bool write_traces = true;
  bool verbose_traces = false;

  void validate() const;
};

nlohmann::json batch_to_json(const BatchConfig& c);
/// Throws adapter::ConfigError with a JSON path on invalid input.
BatchConfig batch_from_json(const nlohmann::json& j);

std::string mode_name(const std::optional<Technique>& mode);
std::string size_label(double target_size);

struct TrialRecord {
  EnvironmentKind environment = EnvironmentKind::sparse;
  double target_size = 0.0;
  int repetition = 0;
  std::optional<Technique> mode;
  std::uint64_t scene_seed = 0;
  std::uint64_t trial_seed = 0;
  TrialResult result;
};

struct SummaryRow {
  EnvironmentKind environment = EnvironmentKind::sparse;
  double target_size = 0.0;
  std::optional<Technique> mode;
  int trials = 0;
  int successes = 0;
  int timeouts = 0;
  int error_trials = 0;
  double mean_selection_time = 0.0;
  double mean_translation = 0.0;
  double mean_rotation = 0.0;
  int switching_trials = 0;
  double mean_switches_switching = 0.0;
  int max_switches = 0;
  int final_counts[3] = {0, 0, 0};  ///< indexed by Technique
};

struct BatchResult {
  std::vector<TrialRecord> trials;  ///< sorted by trial id
  std::vector<SummaryRow> summary;
};

/// Runs every (environment, size, repetition, mode) trial. When `out_dir` is
/// given, writes summary.csv, trials.csv, scenes/ and (optionally) traces/.
BatchResult run_batch(const BatchConfig& batch, const adapter::AdapterConfig& config,
                      const std::optional<std::filesystem::path>& out_dir = std::nullopt);

std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string trials_csv(const std::vector<TrialRecord>& trials);

}  // namespace adaptsel::sim
