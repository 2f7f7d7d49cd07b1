#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "adaptsel/adapter.hpp"
#include "adaptsel/engine.hpp"
#include "adaptsel/scene.hpp"

namespace adaptsel::trace {

inline constexpr int kTraceVersion = 1;

/// First line of a trace: everything needed to re-run the frames.
struct Header {
  std::string trial_id;
  adapter::AdapterConfig config;
  scene::Scene scene;
  bool verbose = false;
};

nlohmann::json header_to_json(const Header& header);

/// One decision record. The per-target breakdown is included when `verbose`.
nlohmann::json frame_to_json(std::size_t index, const scene::PointerState& pointer, const FrameResult& frame,
                             bool verbose);

/// Writes a header followed by one JSON line per frame.
class Writer {
 public:
  Writer(std::ostream& out, const Header& header);
  void write(const scene::PointerState& pointer, const FrameResult& frame);
  [[nodiscard]] std::size_t frames() const { return frames_; }

 private:
  std::ostream& out_;
  bool verbose_;
  std::size_t frames_ = 0;
};

enum class ReplayStatus { ok, divergence, config_mismatch, parse_error };

struct ReplayResult {
  ReplayStatus status = ReplayStatus::ok;
  std::size_t frames = 0;
  std::optional<std::size_t> divergent_frame;
  /// First differing field as a JSON pointer, e.g. "/techniques/StickyRay/S_S".
  std::string field;
  std::string message;
};

/// Re-runs every recorded pointer sample through a fresh engine and compares
/// the decision records exactly. When `expected` is given, its hash must
/// match the trace header.
ReplayResult replay(std::istream& in, const std::optional<adapter::AdapterConfig>& expected = std::nullopt);
ReplayResult replay_file(const std::string& path,
                         const std::optional<adapter::AdapterConfig>& expected = std::nullopt);

}  // namespace adaptsel::trace
