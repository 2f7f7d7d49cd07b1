#include "adaptsel/session.hpp"

#include <cmath>
#include <stdexcept>

namespace adaptsel::service {

using nlohmann::json;
namespace tech = adaptsel::techniques;

std::string_view technique_color(tech::Technique t) {
  switch (t) {
    case tech::Technique::ray_casting: return "#4f8fe6";
    case tech::Technique::sticky_ray: return "#f29e38";
    case tech::Technique::ray_cursor: return "#3fb58b";
  }
  return "#ffffff";
}

namespace {

json point_json(geometry::AngularPoint p) { return json::array({p.h, p.v}); }

json ring_json(const std::vector<geometry::AngularPoint>& ring) {
  json out = json::array();
  for (const auto& p : ring) out.push_back(point_json(p));
  return out;
}

json polygon_json(const geometry::Polygon2D& polygon) {
  json holes = json::array();
  for (const auto& h : polygon.holes) holes.push_back(ring_json(h));
  return {{"outer", ring_json(polygon.vertices)}, {"holes", holes}};
}

std::string name_of(tech::Technique t) { return std::string(tech::technique_name(t)); }

}  // namespace

json frame_broadcast(const std::string& session_id, std::size_t index, const FrameResult& frame,
                     const adapter::AdapterConfig& config) {
  const auto& d = frame.decision;
  const tech::Technique active = d.active();

  json scores = json::object();
  for (const auto& s : d.scores)
    scores[name_of(s.technique)] = {{"overall", s.overall},
                                    {"S_S", s.smoothed.speed},
                                    {"S_A", s.smoothed.accuracy},
                                    {"S_C", s.smoothed.comfort},
                                    {"S_F", s.smoothed.familiarity}};

  json outlines = json::array();
  for (const auto& rec : frame.context.targets)
    outlines.push_back({{"id", rec.id}, {"visible", rec.visible()}, {"polygon", polygon_json(rec.outline)}});

  json regions = json::array();
  if (auto it = frame.regions.find(active); it != frame.regions.end()) {
    for (const auto& r : it->second)
      regions.push_back({{"id", r.target_id},
                         {"selectable", r.selectable},
                         {"W", r.width},
                         {"A", r.amplitude},
                         {"aim_center", point_json(r.aim_center)},
                         {"polygon", polygon_json(r.region)}});
  }

  const auto& h = frame.highlight;
  return {{"v", kProtocolVersion},
          {"type", "frame"},
          {"session", session_id},
          {"i", index},
          {"t", frame.context.pointer.timestamp},
          {"technique", name_of(active)},
          {"color", std::string(technique_color(active))},
          {"cone_radius", config.cone_radius},
          {"decision",
           {{"optimal", name_of(d.optimal)},
            {"current", name_of(d.current)},
            {"margin", d.margin},
            {"switched", d.switched},
            {"new_technique", d.new_technique ? json(name_of(*d.new_technique)) : json(nullptr)},
            {"empty", d.empty_space},
            {"scores", scores}}},
          {"highlight",
           {{"id", h.target_id ? json(*h.target_id) : json(nullptr)},
            {"bent_ray_endpoint", h.bent_ray_endpoint ? point_json(*h.bent_ray_endpoint) : json(nullptr)},
            {"cursor_depth", h.cursor_depth},
            {"snapped", h.snapped}}},
          {"outlines", outlines},
          {"regions", regions}};
}

Session::Session(std::string id, std::shared_ptr<const scene::Scene> scene, adapter::AdapterConfig config,
                 SceneResolver resolver)
    : id_(std::move(id)), resolver_(std::move(resolver)) {
  if (!scene) throw std::invalid_argument("session needs a scene");
  config.validate();
  engine_ = std::make_unique<Engine>(std::move(scene), std::move(config));
}

void Session::rebuild(std::shared_ptr<const scene::Scene> scene, adapter::AdapterConfig config) {
  engine_ = std::make_unique<Engine>(std::move(scene), std::move(config));
  frames_ = 0;
}

json Session::opened() const {
  return {{"v", kProtocolVersion},
          {"type", "session"},
          {"session", id_},
          {"preset", engine_->config().name},
          {"config_hash", adapter::config_hash(engine_->config())},
          {"targets", engine_->scene().targets.size()},
          {"technique", name_of(engine_->active())},
          {"color", std::string(technique_color(engine_->active()))}};
}

json Session::ack(std::string_view type) const {
  json out = opened();
  out["type"] = "ack";
  out["request"] = std::string(type);
  return out;
}

json Session::error(std::string_view request, const std::string& message) const {
  return {{"v", kProtocolVersion},
          {"type", "error"},
          {"session", id_},
          {"request", request.empty() ? json(nullptr) : json(std::string(request))},
          {"message", message}};
}

json Session::handle(const json& message) {
  if (!message.is_object()) return error("", "message must be a JSON object");
  const auto type_it = message.find("type");
  if (type_it == message.end() || !type_it->is_string()) return error("", "$.type: expected a string");
  const std::string type = type_it->get<std::string>();
  const auto v_it = message.find("v");
  if (v_it == message.end() || !v_it->is_number_integer() || v_it->get<int>() != kProtocolVersion)
    return error(type, "$.v: expected protocol version " + std::to_string(kProtocolVersion));
  try {
    if (type == "pointer_update") return on_pointer_update(message);
    if (type == "set_preset") return on_set_preset(message);
    if (type == "set_weights") return on_set_weights(message);
    if (type == "load_scene") return on_load_scene(message);
    if (type == "reset") return on_reset();
  } catch (const std::exception& e) {
    return error(type, e.what());
  }
  return error(type, "$.type: unknown message type '" + type + "'");
}

std::string Session::handle_text(std::string_view text) {
  json message;
  try {
    message = json::parse(text);
  } catch (const json::parse_error& e) {
    return error("", std::string("malformed JSON: ") + e.what()).dump();
  }
  return handle(message).dump();
}

json Session::on_pointer_update(const json& message) {
  const auto it = message.find("pointer");
  if (it == message.end()) throw std::invalid_argument("$.pointer: missing");
  const scene::PointerState pointer = scene::pointer_from_json(*it, "$.pointer");
  const FrameResult frame = engine_->process(pointer);
  return frame_broadcast(id_, frames_++, frame, engine_->config());
}

json Session::on_set_preset(const json& message) {
  const auto it = message.find("name");
  if (it == message.end() || !it->is_string()) throw std::invalid_argument("$.name: expected a string");
  adapter::AdapterConfig config = adapter::load_preset(it->get<std::string>());
  config.validate();
  rebuild(engine_->scene_ptr(), std::move(config));
  return ack("set_preset");
}

json Session::on_set_weights(const json& message) {
  const auto it = message.find("weights");
  if (it == message.end() || !it->is_object()) throw std::invalid_argument("$.weights: expected an object");
  adapter::AdapterConfig config = engine_->config();
  adapter::Weights& w = config.weights;
  const std::pair<const char*, double*> fields[] = {
      {"speed", &w.speed}, {"accuracy", &w.accuracy}, {"comfort", &w.comfort}, {"familiarity", &w.familiarity}};
  for (const auto& [key, value] : it->items()) {
    double* slot = nullptr;
    for (const auto& [name, ptr] : fields)
      if (key == name) slot = ptr;
    if (!slot) throw std::invalid_argument("$.weights." + key + ": unknown objective");
    if (!value.is_number()) throw std::invalid_argument("$.weights." + key + ": expected a number");
    const double x = value.get<double>();
    if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("$.weights." + key + ": must be finite and >= 0");
    *slot = x;
  }
  if (!(w.sum() > 0.0)) throw std::invalid_argument("$.weights: sum must be positive");
  config.validate();
  rebuild(engine_->scene_ptr(), std::move(config));
  return ack("set_weights");
}

json Session::on_load_scene(const json& message) {
  std::shared_ptr<const scene::Scene> next;
  if (auto it = message.find("scene"); it != message.end()) {
    next = std::make_shared<const scene::Scene>(scene::load_scene(*it));
  } else if (auto name = message.find("name"); name != message.end() && name->is_string()) {
    if (resolver_) next = resolver_(name->get<std::string>());
    if (!next) throw std::invalid_argument("$.name: unknown scene '" + name->get<std::string>() + "'");
  } else {
    throw std::invalid_argument("$: expected 'scene' document or 'name'");
  }
  rebuild(std::move(next), engine_->config());
  return ack("load_scene");
}

json Session::on_reset() {
  engine_->reset();
  frames_ = 0;
  return ack("reset");
}

}  // namespace adaptsel::service
