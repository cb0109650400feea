#include "clicksel/service.hpp"

#include <random>
#include <thread>

#include <httplib.h>

#include "clicksel/click_io.hpp"
#include "clicksel/image_io.hpp"
#include "clicksel/simulator.hpp"

namespace clicksel {

using nlohmann::json;

struct SegService::Http {
  httplib::Server server;
  std::thread thread;
};

SegService::SegService(std::shared_ptr<const ProbabilityBackend> backend, ServiceConfig config)
    : backend_(std::move(backend)), config_(std::move(config)), http_(std::make_unique<Http>()) {
  config_.energy.validate();
  install_routes();
}

SegService::~SegService() { stop(); }

namespace {

ServiceResponse error_response(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

std::string mask_base64(const BinaryMask& mask) { return base64_encode(encode_png(mask)); }

}  // namespace

BinaryMask SegService::segment(const Image& image, const ClickSet& clicks) const {
  if (clicks.empty()) return BinaryMask(image.height(), image.width());
  const auto q = predict_clicks(*backend_, image, clicks);
  return config_.use_graphcut ? refine(image, q, clicks, config_.energy) : q.threshold(0.5f);
}

void SegService::recompute(Session& s) const {
  if (s.clicks.empty()) {
    s.mask = BinaryMask(s.image.height(), s.image.width());
    s.probability = ProbabilityMap(s.image.height(), s.image.width(), 0.5f);
    return;
  }
  s.probability = predict_clicks(*backend_, s.image, s.clicks);
  s.mask = config_.use_graphcut ? refine(s.image, s.probability, s.clicks, config_.energy)
                                : s.probability.threshold(0.5f);
}

std::string SegService::new_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

void SegService::purge_expired() {
  const auto now = std::chrono::steady_clock::now();
  std::lock_guard lock(sessions_mutex_);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second->last_used > config_.session_ttl)
      it = sessions_.erase(it);
    else
      ++it;
  }
}

std::shared_ptr<SegService::Session> SegService::find(const std::string& id) {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  const auto now = std::chrono::steady_clock::now();
  if (now - it->second->last_used > config_.session_ttl) {
    sessions_.erase(it);
    return nullptr;
  }
  it->second->last_used = now;
  return it->second;
}

std::size_t SegService::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

ServiceResponse SegService::create_session(const std::string& body) {
  purge_expired();
  Image image;
  try {
    const auto j = json::parse(body);
    const auto bytes = base64_decode(j.at("image").get<std::string>());
    image = decode_image(bytes);
  } catch (const json::exception& e) {
    return error_response(400, std::string("bad request: ") + e.what());
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
  if (image.empty()) return error_response(400, "image is empty");
  if (image.height() > config_.max_image_dim || image.width() > config_.max_image_dim)
    return error_response(413, "image exceeds " + std::to_string(config_.max_image_dim) +
                                   " pixels per side");

  auto session = std::make_shared<Session>();
  session->image = std::move(image);
  session->created = session->last_used = std::chrono::steady_clock::now();
  recompute(*session);
  {
    std::lock_guard lock(sessions_mutex_);
    do session->id = new_id();
    while (sessions_.count(session->id));
    sessions_[session->id] = session;
  }
  return {201, {{"session_id", session->id},
                {"width", session->image.width()},
                {"height", session->image.height()}}};
}

ServiceResponse SegService::add_click(const std::string& id, const std::string& body) {
  auto session = find(id);
  if (!session) return error_response(404, "unknown session");
  Click click;
  try {
    const auto j = json::parse(body);
    click.row = j.at("row").get<int>();
    click.col = j.at("col").get<int>();
    click.polarity = polarity_from_string(j.value("polarity", std::string("positive")));
  } catch (const json::exception& e) {
    return error_response(400, std::string("bad request: ") + e.what());
  } catch (const Error& e) {
    return error_response(400, e.what());
  }

  std::lock_guard lock(session->mutex);
  if (click.row < 0 || click.row >= session->image.height() || click.col < 0 ||
      click.col >= session->image.width())
    return error_response(422, "click outside the image");
  if (session->clicks.add(click)) {
    try {
      recompute(*session);
    } catch (const Error& e) {
      session->clicks.pop_back();
      recompute(*session);
      return error_response(500, e.what());
    }
  }
  return {200, {{"mask", mask_base64(session->mask)}, {"click_count", session->clicks.size()}}};
}

ServiceResponse SegService::undo_click(const std::string& id) {
  auto session = find(id);
  if (!session) return error_response(404, "unknown session");
  std::lock_guard lock(session->mutex);
  if (session->clicks.empty()) return error_response(409, "no clicks to undo");
  session->clicks.pop_back();
  recompute(*session);
  return {200, {{"mask", mask_base64(session->mask)}, {"click_count", session->clicks.size()}}};
}

ServiceResponse SegService::get_session(const std::string& id) {
  auto session = find(id);
  if (!session) return error_response(404, "unknown session");
  std::lock_guard lock(session->mutex);
  return {200, {{"session_id", session->id},
                {"width", session->image.width()},
                {"height", session->image.height()},
                {"clicks", click_sequence_to_json(session->clicks).at("clicks")},
                {"click_count", session->clicks.size()},
                {"mask", mask_base64(session->mask)}}};
}

void SegService::install_routes() {
  auto& server = http_->server;
  server.set_payload_max_length(256ull << 20);
  auto reply = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Post("/sessions", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, create_session(req.body));
  });
  server.Post(R"(/sessions/([0-9a-f]+)/clicks)",
              [this, reply](const httplib::Request& req, httplib::Response& res) {
                reply(res, add_click(req.matches[1], req.body));
              });
  server.Delete(R"(/sessions/([0-9a-f]+)/clicks/last)",
                [this, reply](const httplib::Request& req, httplib::Response& res) {
                  reply(res, undo_click(req.matches[1]));
                });
  server.Get(R"(/sessions/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, get_session(req.matches[1]));
  });
  server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"status", "ok"}, {"backend", backend_->name()}}.dump(), "application/json");
  });
  if (!config_.static_dir.empty()) server.set_mount_point("/", config_.static_dir.string());
}

int SegService::start() {
  int port = config_.port;
  if (port == 0) {
    port = http_->server.bind_to_any_port(config_.host);
  } else if (!http_->server.bind_to_port(config_.host, port)) {
    port = -1;
  }
  if (port < 0) fail(ErrorCode::io_failure, "cannot bind " + config_.host);
  http_->thread = std::thread([this] { http_->server.listen_after_bind(); });
  http_->server.wait_until_ready();
  return port;
}

bool SegService::listen() { return http_->server.listen(config_.host, config_.port); }

void SegService::stop() {
  if (!http_) return;
  http_->server.stop();
  if (http_->thread.joinable()) http_->thread.join();
}

}  // namespace clicksel
