#pragma once

// HTTP front of the live stream:
//   GET /slots      slot-map document
//   GET /snapshot   current occupancy snapshot (one JSON line)
//   GET /events     chunked newline-delimited JSON, snapshot then deltas
//   GET /analytics  per-slot analytics over the log so far

#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "parklot/engine/broadcast.hpp"

namespace httplib {
class Server;
}

namespace parklot::engine {

class EventServer {
public:
  using AnalyticsSource = std::function<std::string()>;

  EventServer(Broadcaster& broadcaster, std::string slot_map_document, AnalyticsSource analytics);
  ~EventServer();

  EventServer(const EventServer&) = delete;
  EventServer& operator=(const EventServer&) = delete;

  /// Port 0 picks a free port. Throws Error when the address cannot be bound.
  void bind(const std::string& address, int port);
  /// Serves on a background thread until stop().
  void start();
  void stop();

  int port() const noexcept { return port_; }

private:
  Broadcaster& broadcaster_;
  std::string slot_map_document_;
  AnalyticsSource analytics_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace parklot::engine
