#include "parklot/engine/server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "parklot/error.hpp"

namespace parklot::engine {

namespace {

constexpr auto kPollInterval = std::chrono::milliseconds(200);

}  // namespace

EventServer::EventServer(Broadcaster& broadcaster, std::string slot_map_document, AnalyticsSource analytics)
    : broadcaster_(broadcaster),
      slot_map_document_(std::move(slot_map_document)),
      analytics_(std::move(analytics)),
      server_(std::make_unique<httplib::Server>()) {
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  server_->Get("/slots", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(slot_map_document_, "application/json");
  });

  server_->Get("/snapshot", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(broadcaster_.snapshot(), "application/json");
  });

  server_->Get("/analytics", [this](const httplib::Request&, httplib::Response& res) {
    try {
      res.set_content(analytics_ ? analytics_() : std::string("{}\n"), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(std::string("{\"error\":\"") + "analytics unavailable" + "\"}\n", "application/json");
      spdlog::warn("analytics request failed: {}", e.what());
    }
  });

  server_->Get("/events", [this](const httplib::Request&, httplib::Response& res) {
    auto sub = broadcaster_.subscribe();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "application/x-ndjson",
        [this, sub](std::size_t, httplib::DataSink& sink) {
          std::string line;
          switch (sub->pop(line, kPollInterval)) {
            case Subscriber::Status::Message:
              return sink.write(line.data(), line.size());
            case Subscriber::Status::Timeout:
              return sink.is_writable();
            case Subscriber::Status::Closed:
              sink.done();
              return true;
            case Subscriber::Status::Dropped:
              spdlog::info("dropping a lagging event-stream consumer");
              return false;
          }
          return false;
        },
        [this, sub](bool) { broadcaster_.unsubscribe(sub); });
  });
}

EventServer::~EventServer() { stop(); }

void EventServer::bind(const std::string& address, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(address);
  } else {
    port_ = server_->bind_to_port(address, port) ? port : -1;
  }
  if (port_ < 0) throw Error("cannot bind " + address + ":" + std::to_string(port));
}

void EventServer::start() {
  if (port_ < 0) throw Error("server is not bound");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void EventServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace parklot::engine
