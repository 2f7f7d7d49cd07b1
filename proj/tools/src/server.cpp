#include "adaptsel/server.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/version.hpp>
#include <boost/beast/websocket.hpp>

#include "adaptsel/session.hpp"

#ifndef ADAPTSEL_VERSION
#define ADAPTSEL_VERSION "0.0.0"
#endif

namespace adaptsel::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

std::map<std::string, std::shared_ptr<const scene::Scene>> load_scene_directory(const std::filesystem::path& dir) {
  std::map<std::string, std::shared_ptr<const scene::Scene>> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    try {
      out[entry.path().stem().string()] =
          std::make_shared<const scene::Scene>(scene::load_scene_file(entry.path().string()));
    } catch (const std::exception&) {
    }
  }
  return out;
}

struct Server::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
  tcp protocol = tcp::v4();
};

namespace {

std::string_view mime_type(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".wav") return "audio/wav";
  return "application/octet-stream";
}

http::response<http::string_body> make_response(const http::request<http::string_body>& req, http::status status,
                                                 std::string body, std::string_view type) {
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::server, "adaptsel/" ADAPTSEL_VERSION);
  res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

}  // namespace

Server::Server(ServerOptions options) : options_(std::move(options)), impl_(std::make_unique<Impl>()) {
  if (!options_.scene) throw std::invalid_argument("server needs a scene");
  options_.config.validate();
  beast::error_code ec;
  const auto address = asio::ip::make_address(options_.address, ec);
  if (ec) throw std::runtime_error("invalid address '" + options_.address + "'");
  const tcp::endpoint endpoint{address, options_.port};
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec)
    throw std::runtime_error("cannot listen on " + options_.address + ":" + std::to_string(options_.port) + ": " +
                             ec.message());
  port_ = impl_->acceptor.local_endpoint().port();
  impl_->protocol = endpoint.protocol();
}

Server::~Server() { stop(); }

void Server::run() {
  while (!stopping_) {
    tcp::socket socket{impl_->io};
    beast::error_code ec;
    impl_->acceptor.accept(socket, ec);
    if (ec) {
      if (stopping_) break;
      continue;
    }
    const int fd = socket.release(ec);
    if (ec) continue;
    std::lock_guard lock(mutex_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    open_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void Server::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(impl_->acceptor.native_handle(), SHUT_RDWR);
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mutex_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers)
    if (t.joinable()) t.join();
  beast::error_code ec;
  impl_->acceptor.close(ec);
}

void Server::serve_connection(int fd) {
  asio::io_context io;
  tcp::socket socket{io};
  beast::error_code ec;
  socket.assign(impl_->protocol, fd, ec);
  auto forget = [&] {
    std::lock_guard lock(mutex_);
    open_fds_.erase(std::remove(open_fds_.begin(), open_fds_.end(), fd), open_fds_.end());
  };
  if (ec) {
    forget();
    ::close(fd);
    return;
  }

  beast::flat_buffer buffer;
  for (;;) {
    http::request<http::string_body> req;
    http::read(socket, buffer, req, ec);
    if (ec) break;

    if (websocket::is_upgrade(req)) {
      if (req.target() != "/session") {
        http::write(socket, make_response(req, http::status::not_found, "unknown socket endpoint\n", "text/plain"),
                    ec);
        break;
      }
      websocket::stream<tcp::socket&> ws{socket};
      ws.accept(req, ec);
      if (ec) break;
      const std::string id = "s" + std::to_string(next_session_++);
      SceneResolver resolver = [this](const std::string& name) -> std::shared_ptr<const scene::Scene> {
        if (name == options_.scene_name) return options_.scene;
        auto it = options_.bundled.find(name);
        return it == options_.bundled.end() ? nullptr : it->second;
      };
      Session session(id, options_.scene, options_.config, resolver);
      ws.text(true);
      ws.write(asio::buffer(session.opened().dump()), ec);
      beast::flat_buffer frames;
      while (!ec) {
        ws.read(frames, ec);
        if (ec) break;
        const std::string reply = session.handle_text(beast::buffers_to_string(frames.data()));
        frames.consume(frames.size());
        ws.write(asio::buffer(reply), ec);
      }
      break;
    }

    const std::string target(req.target());
    http::response<http::string_body> res;
    if (req.method() != http::verb::get) {
      res = make_response(req, http::status::method_not_allowed, "GET only\n", "text/plain");
    } else if (target == "/health") {
      const json body = {{"status", "ok"},
                         {"v", kProtocolVersion},
                         {"build", "adaptsel " ADAPTSEL_VERSION},
                         {"preset", options_.config.name},
                         {"config_hash", adapter::config_hash(options_.config)}};
      res = make_response(req, http::status::ok, body.dump(), "application/json");
    } else if (target == "/scenes") {
      json list = json::array();
      list.push_back({{"name", options_.scene_name}, {"targets", options_.scene->targets.size()}, {"loaded", true}});
      for (const auto& [name, sc] : options_.bundled)
        if (name != options_.scene_name)
          list.push_back({{"name", name}, {"targets", sc->targets.size()}, {"loaded", false}});
      res = make_response(req, http::status::ok, json{{"v", kProtocolVersion}, {"scenes", list}}.dump(),
                          "application/json");
    } else {
      std::string rel = target.substr(0, target.find('?'));
      if (rel == "/") rel = "/index.html";
      const std::filesystem::path file = options_.static_dir / rel.substr(1);
      const bool safe = !options_.static_dir.empty() && rel.find("..") == std::string::npos;
      std::ifstream in(file, std::ios::binary);
      if (safe && in) {
        std::ostringstream body;
        body << in.rdbuf();
        res = make_response(req, http::status::ok, body.str(), mime_type(file));
      } else {
        res = make_response(req, http::status::not_found, "not found\n", "text/plain");
      }
    }
    const bool keep = res.keep_alive();
    http::write(socket, res, ec);
    if (ec || !keep) break;
  }
  forget();
  socket.shutdown(tcp::socket::shutdown_both, ec);
  socket.close(ec);
}

}  // namespace adaptsel::service
