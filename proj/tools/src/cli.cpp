#include "adaptsel/cli.hpp"

#include <signal.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adaptsel/adapter.hpp"
#include "adaptsel/scene.hpp"
#include "adaptsel/server.hpp"
#include "adaptsel/simulator.hpp"
#include "adaptsel/trace.hpp"

#ifndef ADAPTSEL_SCENE_DIR
#define ADAPTSEL_SCENE_DIR ""
#endif
#ifndef ADAPTSEL_UI_DIR
#define ADAPTSEL_UI_DIR ""
#endif

namespace adaptsel::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw adapter::ConfigError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw adapter::ConfigError(path + ": " + e.what());
  }
}

adapter::AdapterConfig resolve_preset(const std::string& name) {
  bool known = name == "application" || name == "study";
  if (const char* dir = std::getenv("ADAPTSEL_PRESET_DIR"); dir != nullptr && *dir != '\0')
    known = known || fs::exists(fs::path(dir) / (name + ".json"));
  if (!known) throw UsageError("unknown preset '" + name + "' (expected application or study)");
  adapter::AdapterConfig config = adapter::load_preset(name);
  config.validate();
  return config;
}

std::optional<techniques::Technique> parse_mode(const std::string& mode) {
  if (mode == "adaptive") return std::nullopt;
  if (auto t = techniques::parse_technique(mode)) return *t;
  throw UsageError("unknown mode '" + mode + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json result_json(const sim::TrialResult& r) {
  json switches = json::array();
  for (const auto& s : r.switches)
    switches.push_back({{"t", s.t},
                        {"frame", s.frame},
                        {"from", std::string(techniques::technique_name(s.from))},
                        {"to", std::string(techniques::technique_name(s.to))}});
  return {{"trial_id", r.trial_id},
          {"success", r.success},
          {"timeout", r.timeout},
          {"selection_time", r.selection_time},
          {"translational_movement", r.translational_movement},
          {"rotational_movement", r.rotational_movement},
          {"errors", r.error_count},
          {"switches", switches},
          {"initial_technique", std::string(techniques::technique_name(r.initial_technique))},
          {"final_technique", std::string(techniques::technique_name(r.final_technique))},
          {"frames", r.frames}};
}

// Blocks SIGINT/SIGTERM on the calling thread (inherited by workers) and
// stops the server from a waiter thread when one arrives.
int serve(service::ServerOptions options, std::ostream& out) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::Server server(std::move(options));
  out << "listening on port " << server.port() << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  server.stop();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive pointing-technique engine: scene generation, simulation, replay and live sessions"};
  app.name("adaptsel");
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string("adaptsel ") + ADAPTSEL_VERSION_STRING);

  const std::vector<std::string> env_names{"sparse", "dense", "flat", "deep"};

  // generate
  auto* generate = app.add_subcommand("generate", "Generate a seeded study environment");
  std::string gen_env;
  std::uint64_t gen_seed = 1;
  double gen_size = 2.5;
  std::string gen_out;
  generate->add_option("--env", gen_env, "Environment kind")->required()->check(CLI::IsMember(env_names));
  generate->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  generate->add_option("--target-size", gen_size, "Target visual angle in degrees")->capture_default_str();
  generate->add_option("--out", gen_out, "Scene file to write")->required();

  // trial
  auto* trial = app.add_subcommand("trial", "Run one scripted trial");
  std::string trial_scene;
  std::string trial_target;
  std::string trial_mode = "adaptive";
  std::string trial_preset = "application";
  std::uint64_t trial_seed = 1;
  std::string trial_trace;
  bool trial_verbose = false;
  trial->add_option("--scene", trial_scene, "Scene file")->required();
  trial->add_option("--target", trial_target, "Target id (defaults to the scene's designated target)");
  trial->add_option("--mode", trial_mode, "adaptive, RayCasting, StickyRay or RayCursor")->capture_default_str();
  trial->add_option("--preset", trial_preset, "Adapter preset")->capture_default_str();
  trial->add_option("--seed", trial_seed, "Trial seed")->capture_default_str();
  trial->add_option("--trace", trial_trace, "Write a replayable trace here");
  trial->add_flag("--verbose-trace", trial_verbose, "Include per-target breakdowns in the trace");

  // batch
  auto* batch = app.add_subcommand("batch", "Run a simulated study batch");
  std::string batch_config;
  std::string batch_preset = "study";
  std::string batch_out;
  int batch_threads = -1;
  batch->add_option("--config", batch_config, "Batch configuration JSON");
  batch->add_option("--preset", batch_preset, "Adapter preset")->capture_default_str();
  batch->add_option("--out", batch_out, "Output directory")->required();
  batch->add_option("--threads", batch_threads, "Worker threads (0 = all cores)");

  // replay
  auto* replay = app.add_subcommand("replay", "Re-run a trace and compare every decision");
  std::string replay_trace;
  std::string replay_preset;
  replay->add_option("--trace", replay_trace, "Trace file")->required();
  replay->add_option("--preset", replay_preset, "Require the trace to use this preset");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Host live sessions over HTTP and WebSocket");
  std::uint16_t serve_port = 8080;
  std::string serve_address = "127.0.0.1";
  std::string serve_scene;
  std::string serve_preset = "application";
  std::string serve_scenes = ADAPTSEL_SCENE_DIR;
  std::string serve_static = ADAPTSEL_UI_DIR;
  serve_cmd->add_option("--port", serve_port, "TCP port (0 picks a free one)")->capture_default_str();
  serve_cmd->add_option("--address", serve_address, "Listen address")->capture_default_str();
  serve_cmd->add_option("--scene", serve_scene, "Scene file opened by new sessions")->required();
  serve_cmd->add_option("--preset", serve_preset, "Adapter preset")->capture_default_str();
  serve_cmd->add_option("--scenes-dir", serve_scenes, "Directory of bundled scenes");
  serve_cmd->add_option("--static", serve_static, "Directory served as the UI bundle");

  // validate
  auto* validate = app.add_subcommand("validate", "Check scene, adapter and batch documents");
  std::vector<std::string> val_scenes;
  std::vector<std::string> val_configs;
  std::vector<std::string> val_batches;
  validate->add_option("--scene", val_scenes, "Scene file");
  validate->add_option("--config", val_configs, "Adapter configuration file");
  validate->add_option("--batch", val_batches, "Batch configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*generate) {
      const auto kind = *sim::parse_environment(gen_env);
      const auto spec = sim::EnvironmentSpec::study(kind, gen_size, gen_seed);
      spec.validate();
      const scene::Scene sc = sim::generate_environment(spec);
      write_text(gen_out, scene::dump_scene(sc));
      out << *sc.designated_target << '\n';
      return kOk;
    }

    if (*trial) {
      sim::TrialSpec spec;
      spec.scene = std::make_shared<const scene::Scene>(scene::load_scene_file(trial_scene));
      spec.target_id = trial_target.empty() ? spec.scene->designated_target.value_or("") : trial_target;
      if (spec.target_id.empty()) throw UsageError("--target is required for scenes without a designated target");
      spec.fixed = parse_mode(trial_mode);
      spec.config = resolve_preset(trial_preset);
      spec.seed = trial_seed;
      spec.verbose_trace = trial_verbose;
      spec.trial_id = fs::path(trial_scene).stem().string() + "-" + sim::mode_name(spec.fixed);
      sim::TrialResult result;
      if (!trial_trace.empty()) {
        std::ostringstream trace;
        result = sim::run_trial(spec, &trace);
        write_text(trial_trace, trace.str());
      } else {
        result = sim::run_trial(spec, nullptr);
      }
      out << result_json(result).dump(2) << '\n';
      return kOk;
    }

    if (*batch) {
      const adapter::AdapterConfig config = resolve_preset(batch_preset);
      sim::BatchConfig b = batch_config.empty() ? sim::BatchConfig{} : sim::batch_from_json(read_json(batch_config));
      if (batch_threads >= 0) b.threads = batch_threads;
      b.validate();
      const sim::BatchResult result = sim::run_batch(b, config, fs::path(batch_out));
      out << sim::summary_csv(result.summary);
      return kOk;
    }

    if (*replay) {
      std::optional<adapter::AdapterConfig> expected;
      if (!replay_preset.empty()) expected = resolve_preset(replay_preset);
      const trace::ReplayResult r = trace::replay_file(replay_trace, expected);
      switch (r.status) {
        case trace::ReplayStatus::ok:
          out << "ok: " << r.frames << " frames match\n";
          return kOk;
        case trace::ReplayStatus::divergence:
          err << "divergence at frame " << *r.divergent_frame << ": " << r.field << '\n';
          return kDivergence;
        case trace::ReplayStatus::config_mismatch:
          err << "config mismatch: " << r.message << '\n';
          return kConfig;
        case trace::ReplayStatus::parse_error:
          err << "invalid trace: " << r.message << '\n';
          return kConfig;
      }
      return kConfig;
    }

    if (*serve_cmd) {
      service::ServerOptions options;
      options.address = serve_address;
      options.port = serve_port;
      options.scene = std::make_shared<const scene::Scene>(scene::load_scene_file(serve_scene));
      options.scene_name = fs::path(serve_scene).stem().string();
      options.config = resolve_preset(serve_preset);
      if (!serve_scenes.empty()) options.bundled = service::load_scene_directory(serve_scenes);
      if (!serve_static.empty() && fs::is_directory(serve_static)) options.static_dir = serve_static;
      return serve(std::move(options), out);
    }

    if (*validate) {
      if (val_scenes.empty() && val_configs.empty() && val_batches.empty())
        throw UsageError("validate needs at least one of --scene, --config, --batch");
      for (const auto& path : val_scenes) {
        const scene::Scene sc = scene::load_scene_file(path);
        out << path << ": ok (" << sc.targets.size() << " targets)\n";
      }
      for (const auto& path : val_configs) {
        const adapter::AdapterConfig config = adapter::config_from_json(read_json(path));
        config.validate();
        out << path << ": ok (hash " << adapter::config_hash(config) << ")\n";
      }
      for (const auto& path : val_batches) {
        sim::batch_from_json(read_json(path)).validate();
        out << path << ": ok\n";
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const adapter::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const scene::SceneError& e) {
    err << "scene error: " << e.what() << '\n';
    return kConfig;
  } catch (const sim::GenerationError& e) {
    err << "generation error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace adaptsel::cli
