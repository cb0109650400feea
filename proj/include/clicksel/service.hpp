#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "clicksel/backend.hpp"
#include "clicksel/click_encoding.hpp"
#include "clicksel/graphcut.hpp"

namespace clicksel {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  int max_image_dim = 1024;
  std::chrono::seconds session_ttl{30 * 60};
  EnergyParams energy;
  bool use_graphcut = true;
  std::filesystem::path static_dir;  // optional web client assets
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

/// In-memory interactive sessions over HTTP/1.1 + JSON:
///   POST   /sessions                    {"image": base64 PNG}
///   POST   /sessions/{id}/clicks        {"row", "col", "polarity"}
///   DELETE /sessions/{id}/clicks/last
///   GET    /sessions/{id}
/// Requests within one session are serialized; sessions are independent.
class SegService {
 public:
  SegService(std::shared_ptr<const ProbabilityBackend> backend, ServiceConfig config);
  ~SegService();

  SegService(const SegService&) = delete;
  SegService& operator=(const SegService&) = delete;

  ServiceResponse create_session(const std::string& body);
  ServiceResponse add_click(const std::string& id, const std::string& body);
  ServiceResponse undo_click(const std::string& id);
  ServiceResponse get_session(const std::string& id);

  /// Mask the pipeline produces for `clicks` on `image` (all-background for no clicks).
  BinaryMask segment(const Image& image, const ClickSet& clicks) const;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start();
  /// Binds and serves on the calling thread.
  bool listen();
  void stop();

  std::size_t session_count() const;

 private:
  struct Session {
    std::string id;
    Image image;
    ClickSet clicks;
    BinaryMask mask;
    ProbabilityMap probability;
    std::chrono::steady_clock::time_point created;
    std::chrono::steady_clock::time_point last_used;  // guarded by the session map mutex
    std::mutex mutex;
  };

  std::shared_ptr<Session> find(const std::string& id);
  void purge_expired();
  void recompute(Session& session) const;
  std::string new_id();
  void install_routes();

  std::shared_ptr<const ProbabilityBackend> backend_;
  ServiceConfig config_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;

  struct Http;
  std::unique_ptr<Http> http_;
};

}  // namespace clicksel
