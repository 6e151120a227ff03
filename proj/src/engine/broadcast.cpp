#include "parklot/engine/broadcast.hpp"

#include <algorithm>
#include <charconv>

namespace parklot::engine {

namespace {

template <typename Int>
void put(std::string& out, Int v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

template <typename Int>
void put_opt(std::string& out, const std::optional<Int>& v) {
  if (v) {
    put(out, *v);
  } else {
    out += "null";
  }
}

void put_counts(std::string& out, const occupancy::FrameSummary& s) {
  out += "\"occupied_count\":";
  put(out, s.occupied_count);
  out += ",\"free_count\":";
  put(out, s.free_count);
  out += ",\"total_slots\":";
  put(out, s.total_slots);
}

}  // namespace

std::string snapshot_message(const occupancy::OccupancyFrame* frame, std::span<const occupancy::SlotId> slot_ids) {
  const occupancy::OccupancyFrame empty = occupancy::empty_frame(slot_ids.size());
  const occupancy::OccupancyFrame& f = frame ? *frame : empty;
  std::string out = "{\"type\":\"snapshot\",\"frame_index\":";
  put_opt(out, frame ? std::optional<std::uint64_t>(frame->frame_index) : std::nullopt);
  out += ",\"timestamp_ms\":";
  put_opt(out, f.timestamp_ms);
  out += ",\"slots\":[";
  for (std::size_t i = 0; i < f.entries.size(); ++i) {
    if (i) out += ',';
    out += "{\"slot_id\":";
    put(out, i < slot_ids.size() ? slot_ids[i] : static_cast<occupancy::SlotId>(i));
    out += f.entries[i].occupied ? ",\"occupied\":true,\"vehicle_id\":" : ",\"occupied\":false,\"vehicle_id\":";
    put(out, f.entries[i].vehicle_id);
    out += '}';
  }
  out += "],\"unassigned\":[";
  for (std::size_t i = 0; i < f.unassigned.size(); ++i) {
    if (i) out += ',';
    put(out, f.unassigned[i]);
  }
  out += "],";
  put_counts(out, occupancy::summarize(f));
  out += "}\n";
  return out;
}

std::string event_message(const occupancy::OccupancyEvent& e) {
  std::string out = "{\"type\":\"event\",\"frame_index\":";
  put(out, e.frame_index);
  out += ",\"slot_id\":";
  put(out, e.slot_id);
  out += ",\"kind\":\"";
  out += occupancy::to_string(e.kind);
  out += "\",\"vehicle_id\":";
  put(out, e.vehicle_id);
  out += "}\n";
  return out;
}

std::string summary_message(const occupancy::OccupancyFrame& frame) {
  std::string out = "{\"type\":\"summary\",\"frame_index\":";
  put(out, frame.frame_index);
  out += ",\"timestamp_ms\":";
  put_opt(out, frame.timestamp_ms);
  out += ',';
  put_counts(out, occupancy::summarize(frame));
  out += "}\n";
  return out;
}

std::string end_message(std::optional<std::uint64_t> last_frame) {
  std::string out = "{\"type\":\"end\",\"frame_index\":";
  put_opt(out, last_frame);
  out += "}\n";
  return out;
}

Subscriber::Status Subscriber::pop(std::string& out, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  ready_.wait_for(lock, timeout, [&] { return dropped_ || !queue_.empty() || closed_; });
  if (dropped_) return Status::Dropped;
  if (!queue_.empty()) {
    out = *queue_.front();
    queue_.pop_front();
    return Status::Message;
  }
  return closed_ ? Status::Closed : Status::Timeout;
}

bool Subscriber::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

void Subscriber::offer(std::span<const Message> batch) {
  if (dropped_ || closed_) return;
  if (queue_.size() + batch.size() > capacity_) {
    dropped_ = true;
    queue_.clear();
    return;
  }
  queue_.insert(queue_.end(), batch.begin(), batch.end());
}

Broadcaster::Broadcaster(std::vector<occupancy::SlotId> slot_ids, std::size_t queue_capacity)
    : slot_ids_(std::move(slot_ids)), capacity_(std::max<std::size_t>(queue_capacity, 1)) {}

std::shared_ptr<Subscriber> Broadcaster::subscribe() {
  auto sub = std::make_shared<Subscriber>(capacity_ + 2);
  std::lock_guard lock(mutex_);
  {
    std::lock_guard sub_lock(sub->mutex_);
    sub->queue_.push_back(std::make_shared<const std::string>(
        snapshot_message(current_ ? &*current_ : nullptr, slot_ids_)));
    if (closed_) {
      sub->queue_.push_back(
          std::make_shared<const std::string>(end_message(current_ ? std::optional(current_->frame_index) : std::nullopt)));
      sub->closed_ = true;
    }
  }
  subscribers_.push_back(sub);
  return sub;
}

void Broadcaster::unsubscribe(const std::shared_ptr<Subscriber>& subscriber) {
  std::lock_guard lock(mutex_);
  subscribers_.erase(std::remove(subscribers_.begin(), subscribers_.end(), subscriber), subscribers_.end());
}

void Broadcaster::publish(const occupancy::OccupancyFrame& frame, std::span<const occupancy::OccupancyEvent> events) {
  std::vector<Message> batch;
  batch.reserve(events.size() + 1);
  for (const auto& e : events) batch.push_back(std::make_shared<const std::string>(event_message(e)));
  batch.push_back(std::make_shared<const std::string>(summary_message(frame)));

  std::lock_guard lock(mutex_);
  current_ = frame;
  ++frames_;
  for (auto it = subscribers_.begin(); it != subscribers_.end();) {
    Subscriber& sub = **it;
    bool drop = false;
    {
      std::lock_guard sub_lock(sub.mutex_);
      sub.offer(batch);
      drop = sub.dropped_;
    }
    sub.ready_.notify_all();
    if (drop) {
      ++dropped_;
      it = subscribers_.erase(it);
    } else {
      ++it;
    }
  }
}

void Broadcaster::close() {
  std::lock_guard lock(mutex_);
  if (closed_) return;
  closed_ = true;
  const Message end =
      std::make_shared<const std::string>(end_message(current_ ? std::optional(current_->frame_index) : std::nullopt));
  for (auto& sub : subscribers_) {
    {
      std::lock_guard sub_lock(sub->mutex_);
      if (!sub->dropped_) sub->queue_.push_back(end);
      sub->closed_ = true;
    }
    sub->ready_.notify_all();
  }
}

std::string Broadcaster::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_message(current_ ? &*current_ : nullptr, slot_ids_);
}

std::size_t Broadcaster::subscribers() const {
  std::lock_guard lock(mutex_);
  return subscribers_.size();
}

std::uint64_t Broadcaster::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

std::uint64_t Broadcaster::frames() const {
  std::lock_guard lock(mutex_);
  return frames_;
}

bool Broadcaster::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

}  // namespace parklot::engine
