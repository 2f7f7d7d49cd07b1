#include "adaptsel/trace.hpp"

#include <fstream>
#include <istream>
#include <memory>
#include <ostream>

namespace adaptsel::trace {

using nlohmann::json;
namespace tech = adaptsel::techniques;

namespace {

json objectives_json(const objectives::ObjectiveVector& v) {
  return json::array({v.speed, v.accuracy, v.comfort, v.familiarity});
}

}  // namespace

json header_to_json(const Header& header) {
  return {{"type", "header"},
          {"v", kTraceVersion},
          {"trial_id", header.trial_id},
          {"config", adapter::config_to_json(header.config)},
          {"config_hash", adapter::config_hash(header.config)},
          {"scene", scene::save_scene(header.scene)},
          {"verbose", header.verbose}};
}

json frame_to_json(std::size_t index, const scene::PointerState& pointer, const FrameResult& frame, bool verbose) {
  const auto& d = frame.decision;
  json techniques = json::object();
  for (const auto& s : d.scores) {
    techniques[std::string(tech::technique_name(s.technique))] = {{"overall", s.overall},
                                                                  {"S_S", s.smoothed.speed},
                                                                  {"S_A", s.smoothed.accuracy},
                                                                  {"S_C", s.smoothed.comfort},
                                                                  {"S_F", s.smoothed.familiarity}};
  }
  json j = {{"type", "frame"},
            {"i", index},
            {"t", pointer.timestamp},
            {"pointer", scene::pointer_to_json(pointer)},
            {"techniques", techniques},
            {"optimal", std::string(tech::technique_name(d.optimal))},
            {"current", std::string(tech::technique_name(d.current))},
            {"margin", d.margin},
            {"switched", d.switched},
            {"new_technique",
             d.new_technique ? json(std::string(tech::technique_name(*d.new_technique))) : json(nullptr)},
            {"empty", d.empty_space},
            {"targets_in_cone", frame.context.targets.size()},
            {"highlight", frame.highlight.target_id ? json(*frame.highlight.target_id) : json(nullptr)},
            {"cursor_depth", frame.highlight.cursor_depth}};
  if (verbose) {
    json breakdown = json::object();
    for (const auto& s : d.scores) {
      json rows = json::array();
      for (const auto& t : s.targets)
        rows.push_back({{"id", t.target_id},
                        {"W", t.width},
                        {"A", t.amplitude},
                        {"selectable", t.selectable},
                        {"raw", objectives_json(t.raw)},
                        {"normalized", objectives_json(t.normalized)}});
      breakdown[std::string(tech::technique_name(s.technique))] = {{"aggregate", objectives_json(s.aggregate)},
                                                                   {"targets", rows}};
    }
    j["breakdown"] = breakdown;
  }
  return j;
}

Writer::Writer(std::ostream& out, const Header& header) : out_(out), verbose_(header.verbose) {
  out_ << header_to_json(header).dump() << '\n';
}

void Writer::write(const scene::PointerState& pointer, const FrameResult& frame) {
  out_ << frame_to_json(frames_, pointer, frame, verbose_).dump() << '\n';
  ++frames_;
}

ReplayResult replay(std::istream& in, const std::optional<adapter::AdapterConfig>& expected) {
  ReplayResult result;
  auto fail = [&](ReplayStatus status, std::string message) {
    result.status = status;
    result.message = std::move(message);
    return result;
  };

  std::string line;
  if (!std::getline(in, line)) return fail(ReplayStatus::parse_error, "trace is empty");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    return fail(ReplayStatus::parse_error, std::string("header: ") + e.what());
  }
  if (!header.is_object() || header.value("type", "") != "header")
    return fail(ReplayStatus::parse_error, "first line is not a trace header");
  if (header.value("v", 0) != kTraceVersion)
    return fail(ReplayStatus::parse_error, "unsupported trace version");

  adapter::AdapterConfig config;
  std::shared_ptr<const scene::Scene> scene;
  bool verbose = false;
  try {
    config = adapter::config_from_json(header.at("config"));
    scene = std::make_shared<const scene::Scene>(scene::load_scene(header.at("scene")));
    verbose = header.value("verbose", false);
  } catch (const std::exception& e) {
    return fail(ReplayStatus::parse_error, std::string("header: ") + e.what());
  }
  const std::string recorded_hash = header.value("config_hash", "");
  const std::string actual_hash = adapter::config_hash(config);
  if (recorded_hash != actual_hash)
    return fail(ReplayStatus::config_mismatch,
                "config hash mismatch: trace records " + recorded_hash + ", its config hashes to " + actual_hash);
  if (expected) {
    const std::string expected_hash = adapter::config_hash(*expected);
    if (expected_hash != recorded_hash)
      return fail(ReplayStatus::config_mismatch,
                  "config hash mismatch: trace " + recorded_hash + ", expected " + expected_hash);
  }

  Engine engine(scene, config);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json recorded;
    scene::PointerState pointer;
    try {
      recorded = json::parse(line);
      pointer = scene::pointer_from_json(recorded.at("pointer"));
    } catch (const std::exception& e) {
      return fail(ReplayStatus::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
    }
    const FrameResult frame = engine.process(pointer);
    const json actual = frame_to_json(result.frames, pointer, frame, verbose);
    if (actual != recorded) {
      const json patch = json::diff(recorded, actual);
      result.divergent_frame = result.frames;
      result.field = patch.empty() ? "" : patch.front().value("path", "");
      return fail(ReplayStatus::divergence,
                  "frame " + std::to_string(result.frames) + " diverges at " + result.field);
    }
    ++result.frames;
  }
  return result;
}

ReplayResult replay_file(const std::string& path, const std::optional<adapter::AdapterConfig>& expected) {
  std::ifstream in(path);
  if (!in) {
    ReplayResult r;
    r.status = ReplayStatus::parse_error;
    r.message = "cannot open " + path;
    return r;
  }
  return replay(in, expected);
}

}  // namespace adaptsel::trace
