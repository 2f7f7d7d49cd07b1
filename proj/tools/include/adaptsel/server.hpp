#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "adaptsel/adapter.hpp"
#include "adaptsel/scene.hpp"

namespace adaptsel::service {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  ///< 0 picks a free port
  std::string scene_name = "scene";
  std::shared_ptr<const scene::Scene> scene;
  adapter::AdapterConfig config;
  /// Scenes listed by GET /scenes and loadable by name.
  std::map<std::string, std::shared_ptr<const scene::Scene>> bundled;
  /// Root of the static UI bundle; empty disables the route.
  std::filesystem::path static_dir;
};

/// Loads every `*.json` scene in `dir`, keyed by file stem. Unreadable files
/// are skipped.
std::map<std::string, std::shared_ptr<const scene::Scene>> load_scene_directory(const std::filesystem::path& dir);

/// HTTP + WebSocket front end. Each connection runs on its own thread; a
/// WebSocket upgrade on /session opens one independent session.
class Server {
 public:
  /// Binds and listens; throws std::runtime_error when the port is busy.
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  [[nodiscard]] std::uint16_t port() const { return port_; }

  /// Accepts connections until stop() is called.
  void run();
  /// Closes the listener and every open connection, then joins the workers.
  void stop();

 private:
  struct Impl;
  void serve_connection(int fd);

  ServerOptions options_;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> next_session_{1};
  std::mutex mutex_;
  std::vector<int> open_fds_;
  std::vector<std::thread> workers_;
};

}  // namespace adaptsel::service
