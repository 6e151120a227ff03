#pragma once

// In-process fan-out of the live event stream.
//
// Wire format, one JSON object per line:
//   {"type":"snapshot","frame_index":F|null,"timestamp_ms":T|null,"slots":[{"slot_id":S,"occupied":B,"vehicle_id":V},...],
//    "unassigned":[...],"occupied_count":N,"free_count":N,"total_slots":N}
//   {"type":"event","frame_index":F,"slot_id":S,"kind":"Occupied|Freed|VehicleChanged","vehicle_id":V}
//   {"type":"summary","frame_index":F,"timestamp_ms":T|null,"occupied_count":N,"free_count":N,"total_slots":N}
//   {"type":"end","frame_index":F|null}
// A consumer first receives one snapshot, then for every frame its events
// followed by its summary.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parklot/occupancy/occupancy.hpp"

namespace parklot::engine {

using Message = std::shared_ptr<const std::string>;

std::string snapshot_message(const occupancy::OccupancyFrame* frame, std::span<const occupancy::SlotId> slot_ids);
std::string event_message(const occupancy::OccupancyEvent& event);
std::string summary_message(const occupancy::OccupancyFrame& frame);
std::string end_message(std::optional<std::uint64_t> last_frame);

class Subscriber {
public:
  enum class Status { Message, Timeout, Closed, Dropped };

  explicit Subscriber(std::size_t capacity) : capacity_(capacity) {}

  /// Waits up to `timeout` for the next line. Closed means the stream ended
  /// and the queue is drained; Dropped means the consumer fell behind.
  Status pop(std::string& out, std::chrono::milliseconds timeout);

  bool dropped() const;

private:
  friend class Broadcaster;

  // Caller holds mutex_.
  void offer(std::span<const Message> batch);

  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<Message> queue_;
  std::size_t capacity_;
  bool closed_ = false;
  bool dropped_ = false;
};

/// Bounded broadcast: `publish` never blocks on consumers. A consumer whose
/// queue cannot take a frame's messages is dropped.
class Broadcaster {
public:
  Broadcaster(std::vector<occupancy::SlotId> slot_ids, std::size_t queue_capacity);

  /// Registers a consumer whose queue starts with the current snapshot.
  std::shared_ptr<Subscriber> subscribe();
  void unsubscribe(const std::shared_ptr<Subscriber>& subscriber);

  void publish(const occupancy::OccupancyFrame& frame, std::span<const occupancy::OccupancyEvent> events);
  /// Sends the end marker; later subscribers get a snapshot and the marker.
  void close();

  std::string snapshot() const;
  std::size_t subscribers() const;
  std::uint64_t dropped() const;
  std::uint64_t frames() const;
  bool closed() const;

private:
  mutable std::mutex mutex_;
  std::vector<occupancy::SlotId> slot_ids_;
  std::size_t capacity_;
  std::optional<occupancy::OccupancyFrame> current_;
  std::vector<std::shared_ptr<Subscriber>> subscribers_;
  std::uint64_t dropped_ = 0;
  std::uint64_t frames_ = 0;
  bool closed_ = false;
};

}  // namespace parklot::engine
