#include "adaptsel/adapter.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace adaptsel::adapter {

using nlohmann::json;
namespace obj = adaptsel::objectives;
namespace tech = adaptsel::techniques;

// ---------------------------------------------------------------------------
// Configuration

obj::NormalizationBounds AdapterConfig::bounds() const {
  if (bounds_override) return *bounds_override;
  return obj::NormalizationBounds::derive(cone_radius, min_width, beta, arm);
}

void AdapterConfig::validate() const {
  if (techniques.empty()) throw ConfigError("techniques: at least one technique is required");
  for (std::size_t i = 0; i < techniques.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (techniques[i] == techniques[j]) throw ConfigError("techniques: duplicate entry");
    if (!familiarity.contains(techniques[i]))
      throw ConfigError("familiarity: missing score for " + std::string(tech::technique_name(techniques[i])));
  }
  for (double k : {weights.speed, weights.accuracy, weights.comfort, weights.familiarity})
    if (!std::isfinite(k) || k < 0.0) throw ConfigError("weights: must be finite and non-negative");
  if (!(weights.sum() > 0.0)) throw ConfigError("weights: sum must be positive");
  if (!(cone_radius > 0.0 && cone_radius < 90.0)) throw ConfigError("cone_radius: must lie in (0, 90)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha: must lie in (0, 1]");
  if (window < 1) throw ConfigError("window: must be at least 1");
  if (required < 1 || required > window) throw ConfigError("required: must lie in [1, window]");
  if (!std::isfinite(margin_threshold)) throw ConfigError("margin_threshold: must be finite");
  if (!(beta > 0.0)) throw ConfigError("beta: must be positive");
  if (!(min_width > 0.0)) throw ConfigError("min_width: must be positive");
  for (const auto& [t, f] : familiarity)
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("familiarity: scores must lie in [0, 1]");
  if (edmodel.mu_sign != 1.0 && edmodel.mu_sign != -1.0) throw ConfigError("edmodel.mu_sign: must be +1 or -1");
  try {
    arm.validate();
    bounds().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(ray_cursor.near_depth > 0.0) || ray_cursor.far_margin < 0.0)
    throw ConfigError("ray_cursor: near_depth must be positive and far_margin non-negative");
}

AdapterConfig application_preset() { return AdapterConfig{}; }

AdapterConfig study_preset() {
  AdapterConfig c;
  c.name = "study";
  c.techniques = {Technique::sticky_ray, Technique::ray_cursor};
  c.weights = {0.5, 0.2, 0.2, 0.1};
  c.familiarity = obj::study_familiarity();
  return c;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

void read_number(const json& obj, const char* key, double& out, const std::string& path) {
  if (auto it = obj.find(key); it != obj.end()) out = get_number(*it, path + "." + key);
}

json linear_json(const obj::LinearModel& m) { return json::array({m.amplitude, m.width, m.constant}); }

obj::LinearModel linear_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected [amplitude, width, constant]");
  return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]"), get_number(j[2], path + "[2]")};
}

json segment_json(const scene::Segment& s) {
  return {{"length", s.length}, {"mass", s.mass}, {"com_offset", s.com_offset}};
}

void read_segment(const json& j, scene::Segment& s, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  read_number(j, "length", s.length, path);
  read_number(j, "mass", s.mass, path);
  read_number(j, "com_offset", s.com_offset, path);
}

json bounds_json(const obj::Bounds& b) { return json::array({b.min, b.max}); }

obj::Bounds bounds_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [min, max]");
  return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]")};
}

std::string_view site_rule_name(tech::StickySiteRule r) {
  return r == tech::StickySiteRule::outline_centroid ? "outline_centroid" : "projected_center";
}

std::string_view highlight_rule_name(tech::StickyHighlightRule r) {
  return r == tech::StickyHighlightRule::outline_distance ? "outline_distance" : "centroid_distance";
}

}  // namespace

json config_to_json(const AdapterConfig& c) {
  json techniques = json::array();
  for (Technique t : c.techniques) techniques.push_back(std::string(tech::technique_name(t)));
  json familiarity = json::object();
  for (const auto& [t, f] : c.familiarity) familiarity[std::string(tech::technique_name(t))] = f;
  json j = {
      {"name", c.name},
      {"techniques", techniques},
      {"weights",
       {{"speed", c.weights.speed},
        {"accuracy", c.weights.accuracy},
        {"comfort", c.weights.comfort},
        {"familiarity", c.weights.familiarity}}},
      {"cone_radius", c.cone_radius},
      {"alpha", c.alpha},
      {"window", c.window},
      {"required", c.required},
      {"margin_threshold", c.margin_threshold},
      {"beta", c.beta},
      {"min_width", c.min_width},
      {"familiarity", familiarity},
      {"edmodel",
       {{"mu", linear_json(c.edmodel.mu)},
        {"sigma_x", linear_json(c.edmodel.sigma_x)},
        {"sigma_y", linear_json(c.edmodel.sigma_y)},
        {"mu_sign", c.edmodel.mu_sign}}},
      {"arm",
       {{"upper_arm", segment_json(c.arm.upper_arm)},
        {"forearm", segment_json(c.arm.forearm)},
        {"hand", segment_json(c.arm.hand)},
        {"shoulder_lateral", c.arm.shoulder_lateral},
        {"shoulder_drop", c.arm.shoulder_drop}}},
      {"sticky_sites", std::string(site_rule_name(c.sticky_sites))},
      {"sticky_highlight", std::string(highlight_rule_name(c.sticky_highlight))},
      {"ray_cursor",
       {{"near_depth", c.ray_cursor.near_depth},
        {"far_margin", c.ray_cursor.far_margin},
        {"clip_to_cone", c.ray_cursor.clip_to_cone}}},
  };
  if (c.bounds_override) {
    const auto& b = *c.bounds_override;
    j["bounds"] = {{"speed", bounds_json(b.speed)},
                   {"accuracy", bounds_json(b.accuracy)},
                   {"comfort", bounds_json(b.comfort)},
                   {"familiarity", bounds_json(b.familiarity)}};
  } else {
    j["bounds"] = nullptr;
  }
  return j;
}

AdapterConfig config_from_json(const json& j, const AdapterConfig& base) {
  if (!j.is_object()) fail("$", "config must be an object");
  AdapterConfig c = base;
  if (auto it = j.find("name"); it != j.end()) {
    if (!it->is_string()) fail("$.name", "expected a string");
    c.name = it->get<std::string>();
  }
  if (auto it = j.find("techniques"); it != j.end()) {
    if (!it->is_array()) fail("$.techniques", "expected an array");
    c.techniques.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "$.techniques[" + std::to_string(i) + "]";
      if (!(*it)[i].is_string()) fail(path, "expected a technique name");
      const auto t = tech::parse_technique((*it)[i].get<std::string>());
      if (!t) fail(path, "unknown technique '" + (*it)[i].get<std::string>() + "'");
      c.techniques.push_back(*t);
    }
  }
  if (auto it = j.find("weights"); it != j.end()) {
    if (it->is_array()) {
      if (it->size() != 4) fail("$.weights", "expected four weights");
      c.weights = {get_number((*it)[0], "$.weights[0]"), get_number((*it)[1], "$.weights[1]"),
                   get_number((*it)[2], "$.weights[2]"), get_number((*it)[3], "$.weights[3]")};
    } else if (it->is_object()) {
      read_number(*it, "speed", c.weights.speed, "$.weights");
      read_number(*it, "accuracy", c.weights.accuracy, "$.weights");
      read_number(*it, "comfort", c.weights.comfort, "$.weights");
      read_number(*it, "familiarity", c.weights.familiarity, "$.weights");
    } else {
      fail("$.weights", "expected an object or an array");
    }
  }
  read_number(j, "cone_radius", c.cone_radius, "$");
  read_number(j, "alpha", c.alpha, "$");
  if (auto it = j.find("window"); it != j.end()) c.window = get_int(*it, "$.window");
  if (auto it = j.find("required"); it != j.end()) c.required = get_int(*it, "$.required");
  read_number(j, "margin_threshold", c.margin_threshold, "$");
  read_number(j, "beta", c.beta, "$");
  read_number(j, "min_width", c.min_width, "$");
  if (auto it = j.find("familiarity"); it != j.end()) {
    if (!it->is_object()) fail("$.familiarity", "expected an object");
    c.familiarity.clear();
    for (const auto& [key, value] : it->items()) {
      const auto t = tech::parse_technique(key);
      if (!t) fail("$.familiarity." + key, "unknown technique");
      c.familiarity[*t] = get_number(value, "$.familiarity." + key);
    }
  }
  if (auto it = j.find("edmodel"); it != j.end()) {
    if (!it->is_object()) fail("$.edmodel", "expected an object");
    if (auto m = it->find("mu"); m != it->end()) c.edmodel.mu = linear_from(*m, "$.edmodel.mu");
    if (auto m = it->find("sigma_x"); m != it->end()) c.edmodel.sigma_x = linear_from(*m, "$.edmodel.sigma_x");
    if (auto m = it->find("sigma_y"); m != it->end()) c.edmodel.sigma_y = linear_from(*m, "$.edmodel.sigma_y");
    read_number(*it, "mu_sign", c.edmodel.mu_sign, "$.edmodel");
  }
  if (auto it = j.find("arm"); it != j.end()) {
    if (!it->is_object()) fail("$.arm", "expected an object");
    if (auto s = it->find("upper_arm"); s != it->end()) read_segment(*s, c.arm.upper_arm, "$.arm.upper_arm");
    if (auto s = it->find("forearm"); s != it->end()) read_segment(*s, c.arm.forearm, "$.arm.forearm");
    if (auto s = it->find("hand"); s != it->end()) read_segment(*s, c.arm.hand, "$.arm.hand");
    read_number(*it, "shoulder_lateral", c.arm.shoulder_lateral, "$.arm");
    read_number(*it, "shoulder_drop", c.arm.shoulder_drop, "$.arm");
  }
  if (auto it = j.find("bounds"); it != j.end()) {
    if (it->is_null()) {
      c.bounds_override.reset();
    } else {
      if (!it->is_object()) fail("$.bounds", "expected an object or null");
      obj::NormalizationBounds b = c.bounds();
      if (auto f = it->find("speed"); f != it->end()) b.speed = bounds_from(*f, "$.bounds.speed");
      if (auto f = it->find("accuracy"); f != it->end()) b.accuracy = bounds_from(*f, "$.bounds.accuracy");
      if (auto f = it->find("comfort"); f != it->end()) b.comfort = bounds_from(*f, "$.bounds.comfort");
      if (auto f = it->find("familiarity"); f != it->end()) b.familiarity = bounds_from(*f, "$.bounds.familiarity");
      c.bounds_override = b;
    }
  }
  if (auto it = j.find("sticky_sites"); it != j.end()) {
    const std::string v = it->is_string() ? it->get<std::string>() : "";
    if (v == "outline_centroid") c.sticky_sites = tech::StickySiteRule::outline_centroid;
    else if (v == "projected_center") c.sticky_sites = tech::StickySiteRule::projected_center;
    else fail("$.sticky_sites", "expected outline_centroid or projected_center");
  }
  if (auto it = j.find("sticky_highlight"); it != j.end()) {
    const std::string v = it->is_string() ? it->get<std::string>() : "";
    if (v == "outline_distance") c.sticky_highlight = tech::StickyHighlightRule::outline_distance;
    else if (v == "centroid_distance") c.sticky_highlight = tech::StickyHighlightRule::centroid_distance;
    else fail("$.sticky_highlight", "expected outline_distance or centroid_distance");
  }
  if (auto it = j.find("ray_cursor"); it != j.end()) {
    if (!it->is_object()) fail("$.ray_cursor", "expected an object");
    read_number(*it, "near_depth", c.ray_cursor.near_depth, "$.ray_cursor");
    read_number(*it, "far_margin", c.ray_cursor.far_margin, "$.ray_cursor");
    if (auto f = it->find("clip_to_cone"); f != it->end()) {
      if (!f->is_boolean()) fail("$.ray_cursor.clip_to_cone", "expected a boolean");
      c.ray_cursor.clip_to_cone = f->get<bool>();
    }
  }
  c.validate();
  return c;
}

std::string config_hash(const AdapterConfig& config) {
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

AdapterConfig load_preset(const std::string& name) {
  if (const char* dir = std::getenv("ADAPTSEL_PRESET_DIR"); dir != nullptr && *dir != '\0') {
    const std::filesystem::path file = std::filesystem::path(dir) / (name + ".json");
    if (std::filesystem::exists(file)) {
      std::ifstream in(file);
      json doc;
      try {
        in >> doc;
      } catch (const json::parse_error& e) {
        throw ConfigError(file.string() + ": " + e.what());
      }
      const AdapterConfig base = name == "study" ? study_preset() : application_preset();
      return config_from_json(doc, base);
    }
  }
  if (name == "application") return application_preset();
  if (name == "study") return study_preset();
  throw ConfigError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Pipeline

const TechniqueScore* FrameDecision::score_of(Technique t) const {
  for (const auto& s : scores)
    if (s.technique == t) return &s;
  return nullptr;
}

std::optional<ObjectiveVector> aggregate(std::span<const ObjectiveVector> scores) {
  if (scores.empty()) return std::nullopt;
  ObjectiveVector sum;
  for (const auto& s : scores) {
    sum.speed += s.speed;
    sum.accuracy += s.accuracy;
    sum.comfort += s.comfort;
    sum.familiarity += s.familiarity;
  }
  const double n = static_cast<double>(scores.size());
  return ObjectiveVector{sum.speed / n, sum.accuracy / n, sum.comfort / n, sum.familiarity / n};
}

namespace {

// Exponential smoothing step; a repeated input is a fixed point bit for bit.
double blend(double x, double previous, double alpha) {
  return x == previous ? previous : alpha * x + (1.0 - alpha) * previous;
}

}  // namespace

std::map<Technique, ObjectiveVector> smooth(const std::map<Technique, ObjectiveVector>& aggregates,
                                            AdapterState& state, double alpha) {
  for (const auto& [t, agg] : aggregates) {
    auto it = state.smoothed.find(t);
    if (it == state.smoothed.end()) {
      state.smoothed.emplace(t, agg);
      continue;
    }
    ObjectiveVector& s = it->second;
    s.speed = blend(agg.speed, s.speed, alpha);
    s.accuracy = blend(agg.accuracy, s.accuracy, alpha);
    s.comfort = blend(agg.comfort, s.comfort, alpha);
    s.familiarity = blend(agg.familiarity, s.familiarity, alpha);
  }
  return state.smoothed;
}

FrameDecision decide(AdapterState& state, const std::map<Technique, ObjectiveVector>& smoothed,
                     const AdapterConfig& config) {
  FrameDecision d;
  d.current = state.current;
  std::map<Technique, double> overall;
  for (Technique t : config.techniques) {
    TechniqueScore score;
    score.technique = t;
    if (auto it = smoothed.find(t); it != smoothed.end()) score.smoothed = it->second;
    score.overall = config.weights.combine(score.smoothed);
    overall[t] = score.overall;
    d.scores.push_back(std::move(score));
  }

  // Current technique wins ties, then declaration order.
  Technique best = state.current;
  bool have_best = overall.contains(best);
  for (Technique t : config.techniques) {
    if (!have_best || overall[t] > overall[best]) {
      best = t;
      have_best = true;
    }
  }
  d.optimal = best;
  const double current_score = overall.contains(state.current) ? overall[state.current] : 0.0;
  d.margin = overall[best] - current_score;

  state.window.push_back({best, d.margin});
  while (static_cast<int>(state.window.size()) > config.window) state.window.pop_front();

  if (best != state.current) {
    int support = 0;
    for (const WindowEntry& e : state.window)
      if (e.optimal == best && e.margin > config.margin_threshold) ++support;
    if (support >= config.required) {
      d.switched = true;
      d.new_technique = best;
      state.current = best;
      state.window.clear();
    }
  }
  return d;
}

RegionSet compute_regions(const scene::ContextFrame& ctx, const AdapterConfig& config) {
  RegionSet regions;
  for (Technique t : config.techniques) {
    switch (t) {
      case Technique::ray_casting: regions[t] = tech::raycast_regions(ctx); break;
      case Technique::sticky_ray: regions[t] = tech::stickyray_regions(ctx, config.sticky_sites); break;
      case Technique::ray_cursor: regions[t] = tech::raycursor_regions(ctx, config.ray_cursor); break;
    }
  }
  return regions;
}

TargetScore score_target(Technique technique, const ActivationRegion& region, const scene::ContextFrame& ctx,
                         const AdapterConfig& config) {
  const obj::NormalizationBounds bounds = config.bounds();
  TargetScore s;
  s.target_id = region.target_id;
  s.width = region.width;
  s.amplitude = region.amplitude;
  s.selectable = region.selectable;
  s.raw.familiarity = obj::score_familiarity(technique, config.familiarity);
  s.normalized.familiarity = obj::normalize(obj::Objective::familiarity, s.raw.familiarity, bounds);
  if (!region.selectable) {
    // Unselectable: every performance objective takes its minimum.
    s.raw.speed = bounds.speed.min;
    s.raw.accuracy = bounds.accuracy.min;
    s.raw.comfort = bounds.comfort.min;
    return s;
  }
  s.raw.speed = obj::score_speed(region);
  s.raw.accuracy = obj::score_accuracy(region, config.edmodel);
  s.raw.comfort = obj::score_comfort(ctx.posture, ctx.frame, region.aim_center, config.arm, config.beta);
  s.normalized.speed = obj::normalize(obj::Objective::speed, s.raw.speed, bounds);
  s.normalized.accuracy = obj::normalize(obj::Objective::accuracy, s.raw.accuracy, bounds);
  s.normalized.comfort = obj::normalize(obj::Objective::comfort, s.raw.comfort, bounds);
  return s;
}

FrameDecision step(const scene::ContextFrame& ctx, const RegionSet& regions, const AdapterConfig& config,
                   AdapterState& state) {
  if (ctx.targets.empty()) {
    FrameDecision d;
    d.empty_space = true;
    d.current = state.current;
    d.optimal = state.current;
    for (Technique t : config.techniques) {
      TechniqueScore score;
      score.technique = t;
      if (auto it = state.smoothed.find(t); it != state.smoothed.end()) score.smoothed = it->second;
      score.overall = config.weights.combine(score.smoothed);
      d.scores.push_back(std::move(score));
    }
    return d;
  }

  std::map<Technique, ObjectiveVector> aggregates;
  std::map<Technique, std::vector<TargetScore>> per_target;
  std::vector<ObjectiveVector> normalized;
  for (Technique t : config.techniques) {
    const auto it = regions.find(t);
    if (it == regions.end() || it->second.size() != ctx.targets.size())
      throw std::invalid_argument("step: regions missing for " + std::string(tech::technique_name(t)));
    auto& scores = per_target[t];
    scores.reserve(it->second.size());
    normalized.clear();
    for (const ActivationRegion& region : it->second) {
      scores.push_back(score_target(t, region, ctx, config));
      normalized.push_back(scores.back().normalized);
    }
    aggregates[t] = *aggregate(normalized);
  }

  const auto smoothed = smooth(aggregates, state, config.alpha);
  FrameDecision d = decide(state, smoothed, config);
  for (auto& score : d.scores) {
    score.aggregate = aggregates[score.technique];
    score.targets = std::move(per_target[score.technique]);
  }
  return d;
}

}  // namespace adaptsel::adapter
