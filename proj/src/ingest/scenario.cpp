#include "parklot/ingest/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "parklot/error.hpp"

namespace parklot::ingest {

using geometry::BoundingBox;
using geometry::Point;
using nlohmann::json;

namespace {

// A parked vehicle must have been still this long before a detection gap may
// start, and must stay still at least kResume frames after the gap.
constexpr std::uint64_t kSettle = 20;
constexpr std::uint64_t kResume = 5;

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

BoundingBox inflate(BoundingBox b, double by) {
  return {b.x_min - by, b.y_min - by, b.x_max + by, b.y_max + by};
}

bool boxes_intersect(const BoundingBox& a, const BoundingBox& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

bool within(const BoundingBox& b, double w, double h) {
  return b.x_min >= 0.0 && b.y_min >= 0.0 && b.x_max <= w && b.y_max <= h;
}

Point slot_center(const slots::SlotMap& map, slots::SlotId id) {
  const auto index = map.index_of(id);
  if (!index) throw ValidationError({"unknown slot " + std::to_string(id)});
  const BoundingBox& b = map.slots()[*index].polygon.bounds();
  return {(b.x_min + b.x_max) / 2, (b.y_min + b.y_max) / 2};
}

double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

// Box a vehicle occupies on `frame`, counting the extrapolated position it
// holds in a tracker for `ghost_frames` after it vanishes, plus the frame after
// that, on which the stale track can still be matched.
std::optional<BoundingBox> footprint(const ScriptedVehicle& v, std::uint64_t frame, std::uint64_t total_frames,
                                     int ghost_frames) {
  if (v.present(frame)) return v.box_at(frame);
  if (frame < v.exit || v.exit >= total_frames || v.exit == v.entry) return std::nullopt;
  const std::uint64_t since = frame - (v.exit - 1);
  if (since > static_cast<std::uint64_t>(ghost_frames) + 1) return std::nullopt;
  const Point last = v.center_at(v.exit - 1);
  const Point prev = v.exit - 1 > v.entry ? v.center_at(v.exit - 2) : last;
  const double k = static_cast<double>(since);
  return BoundingBox::from_center_size({last.x + k * (last.x - prev.x), last.y + k * (last.y - prev.y)}, v.width,
                                       v.height);
}

bool keeps_clear(const ScriptedVehicle& a, const ScriptedVehicle& b, std::uint64_t total_frames,
                 const TrafficSpec& traffic) {
  const auto ghost = static_cast<std::uint64_t>(traffic.ghost_frames);
  const std::uint64_t from = std::max(a.entry, b.entry);
  const std::uint64_t to = std::min(a.exit + ghost, b.exit + ghost) + 2;
  const double half = traffic.clearance / 2;
  for (std::uint64_t k = from; k < to && k < total_frames; ++k) {
    if (!a.present(k) && !b.present(k)) continue;
    auto fa = footprint(a, k, total_frames, traffic.ghost_frames);
    auto fb = footprint(b, k, total_frames, traffic.ghost_frames);
    if (fa && fb && boxes_intersect(inflate(*fa, half), inflate(*fb, half))) return false;
  }
  return true;
}

std::uint64_t travel_frames(Point a, Point b, double speed) {
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(distance(a, b) / speed)));
}

ScriptedVehicle random_vehicle(const Scenario& s, const LayoutSpec& layout, const TrafficSpec& traffic,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> speed_dist(traffic.min_speed, traffic.max_speed);
  std::uniform_int_distribution<std::size_t> slot_dist(0, s.map.size() - 1);
  std::uniform_int_distribution<std::uint64_t> entry_dist(0, s.frames - 1);
  std::uniform_int_distribution<std::uint64_t> dwell_dist(traffic.min_dwell, traffic.max_dwell);
  std::bernoulli_distribution coin(0.5);

  const double kind = unit(rng);
  const double speed = speed_dist(rng);
  const bool from_left = coin(rng);
  const bool to_left = coin(rng);
  const auto& slot = s.map.slots()[slot_dist(rng)];
  const std::uint64_t dwell = dwell_dist(rng);
  const std::uint64_t entry = entry_dist(rng);

  ScriptedVehicle v;
  v.width = traffic.vehicle_width;
  v.height = traffic.vehicle_height;
  const double y = layout.lane_y();
  const Point left{v.width / 2, y};
  const Point right{layout.frame_width() - v.width / 2, y};
  const Point start = from_left ? left : right;
  const Point end = to_left ? left : right;
  const Point stall = slot_center(s.map, slot.slot_id);
  const Point aisle{stall.x, y};

  auto leave = [&](std::uint64_t t) {
    t += travel_frames(stall, aisle, speed);
    v.path.push_back({t, aisle});
    t += travel_frames(aisle, end, speed);
    v.path.push_back({t, end});
    return t + 1;
  };

  if (kind < 0.3) {
    const Point far = from_left ? right : left;
    v.entry = entry;
    v.path = {{entry, start}, {entry + travel_frames(start, far, speed), far}};
    v.exit = v.path.back().frame + 1;
  } else if (kind < 0.5) {
    v.entry = 0;
    v.target_slot = slot.slot_id;
    v.path = {{0, stall}, {dwell, stall}};
    v.exit = leave(dwell);
  } else {
    v.entry = entry;
    v.target_slot = slot.slot_id;
    std::uint64_t t = entry;
    v.path.push_back({t, start});
    t += travel_frames(start, aisle, speed);
    v.path.push_back({t, aisle});
    t += travel_frames(aisle, stall, speed);
    v.path.push_back({t, stall});
    t += dwell;
    v.path.push_back({t, stall});
    v.exit = leave(t);
  }
  v.exit = std::min(v.exit, s.frames);
  return v;
}

// JSON helpers for the scenario file loader.

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError(0, field, "expected a number");
  return j.get<double>();
}

std::uint64_t count(const json& j, const std::string& field) {
  if (!j.is_number_unsigned()) throw ParseError(0, field, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

template <typename T, typename Read>
void read_opt(const json& obj, const char* key, const std::string& prefix, T& out, Read read) {
  if (const json* j = find(obj, key)) out = static_cast<T>(read(*j, prefix.empty() ? key : prefix + "." + key));
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& prefix) {
  if (!obj.is_object()) throw ParseError(0, prefix, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
      throw ParseError(0, prefix.empty() ? it.key() : prefix + "." + it.key(), "unknown key");
    }
  }
}

}  // namespace

Point ScriptedVehicle::center_at(std::uint64_t frame) const {
  if (path.empty()) return {};
  if (frame <= path.front().frame) return path.front().center;
  auto hi = std::upper_bound(path.begin(), path.end(), frame, [](std::uint64_t f, const Keyframe& k) { return f < k.frame; });
  if (hi == path.end()) return path.back().center;
  const Keyframe& b = *hi;
  const Keyframe& a = *(hi - 1);
  if (a.center == b.center) return a.center;
  const double s = static_cast<double>(frame - a.frame) / static_cast<double>(b.frame - a.frame);
  const double w = s * s * (3.0 - 2.0 * s);
  return {a.center.x + (b.center.x - a.center.x) * w, a.center.y + (b.center.y - a.center.y) * w};
}

BoundingBox ScriptedVehicle::box_at(std::uint64_t frame) const {
  return BoundingBox::from_center_size(center_at(frame), width, height);
}

void LayoutSpec::validate() const {
  std::vector<std::string> bad;
  if (rows < 1 || rows > 2) bad.push_back("layout.rows must be 1 or 2");
  if (slots_per_row < 1) bad.push_back("layout.slots_per_row must be positive");
  if (!(slot_width > 0) || !(slot_height > 0)) bad.push_back("layout slot size must be positive");
  if (!(lane_height > 0)) bad.push_back("layout.lane_height must be positive");
  if (!(margin >= 0)) bad.push_back("layout.margin must be non-negative");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

slots::SlotMap make_layout(const LayoutSpec& layout) {
  layout.validate();
  std::vector<slots::Slot> out;
  for (int r = 0; r < layout.rows; ++r) {
    const double y0 = r == 0 ? layout.margin : layout.margin + layout.slot_height + layout.lane_height;
    const double y1 = y0 + layout.slot_height;
    for (int c = 0; c < layout.slots_per_row; ++c) {
      const double x0 = layout.margin + c * layout.slot_width;
      const double x1 = x0 + layout.slot_width;
      const std::vector<Point> ring{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
      const auto id = static_cast<slots::SlotId>(r * layout.slots_per_row + c);
      out.push_back({id, geometry::make_polygon(ring), std::string(1, static_cast<char>('A' + r)) + std::to_string(c + 1)});
    }
  }
  return slots::SlotMap(layout.frame_width(), layout.frame_height(), std::move(out));
}

void Scenario::validate() const {
  std::vector<std::string> bad;
  if (!(fps > 0.0) || !std::isfinite(fps)) bad.push_back("fps must be positive");
  if (frames == 0) bad.push_back("frames must be positive");
  if (noise.position_jitter_std < 0.0) bad.push_back("noise.position_jitter_std must be non-negative");
  if (noise.dropout_probability < 0.0 || noise.dropout_probability > 1.0) {
    bad.push_back("noise.dropout_probability must lie in [0, 1]");
  }
  if (noise.max_gap_frames < 0) bad.push_back("noise.max_gap_frames must be non-negative");
  if (appearance_jitter_std < 0.0) bad.push_back("appearance jitter must be non-negative");
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const auto& v = vehicles[i];
    const std::string name = "vehicle " + std::to_string(i) + ": ";
    if (v.exit <= v.entry) {
      bad.push_back(name + "exit " + std::to_string(v.exit) + " is not after entry " + std::to_string(v.entry));
    }
    if (v.entry >= frames) bad.push_back(name + "entry is past the last frame");
    if (!(v.width > 0.0) || !(v.height > 0.0)) bad.push_back(name + "size must be positive");
    if (v.path.empty()) {
      bad.push_back(name + "empty path");
      continue;
    }
    if (v.path.front().frame != v.entry) bad.push_back(name + "first keyframe must be at the entry frame");
    for (std::size_t k = 0; k < v.path.size(); ++k) {
      if (k > 0 && v.path[k].frame <= v.path[k - 1].frame) {
        bad.push_back(name + "keyframe " + std::to_string(k) + " does not follow the previous one");
      }
      const auto box = BoundingBox::from_center_size(v.path[k].center, v.width, v.height);
      if (!std::isfinite(v.path[k].center.x) || !std::isfinite(v.path[k].center.y) ||
          !within(box, map.frame_width(), map.frame_height())) {
        bad.push_back(name + "keyframe " + std::to_string(k) + " leaves the frame");
      }
    }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

std::size_t add_random_traffic(Scenario& scenario, const LayoutSpec& layout, const TrafficSpec& traffic,
                               std::mt19937_64& rng) {
  if (traffic.vehicles == 0) return 0;
  if (scenario.map.size() == 0) throw ValidationError({"random traffic needs at least one slot"});
  if (!(traffic.min_speed > 0.0) || traffic.max_speed < traffic.min_speed) {
    throw ValidationError({"traffic speeds must satisfy 0 < min_speed <= max_speed"});
  }
  if (traffic.min_dwell > traffic.max_dwell) throw ValidationError({"traffic.min_dwell exceeds traffic.max_dwell"});
  std::size_t placed = 0;
  for (std::size_t n = 0; n < traffic.vehicles; ++n) {
    for (int attempt = 0; attempt < traffic.max_attempts; ++attempt) {
      ScriptedVehicle cand = random_vehicle(scenario, layout, traffic, rng);
      if (cand.exit <= cand.entry) continue;
      const bool clear = std::all_of(scenario.vehicles.begin(), scenario.vehicles.end(), [&](const ScriptedVehicle& o) {
        return keeps_clear(cand, o, scenario.frames, traffic);
      });
      if (clear) {
        scenario.vehicles.push_back(std::move(cand));
        ++placed;
        break;
      }
    }
  }
  return placed;
}

GeneratedScenario generate_scenario(const Scenario& s, const TruthOptions& truth) {
  s.validate();
  if (truth.n_init < 1) throw ValidationError({"truth.n_init must be at least 1"});
  if (truth.coast_frames < 0) throw ValidationError({"truth.coast_frames must be non-negative"});

  const std::size_t n = s.vehicles.size();
  std::mt19937_64 rng = stream_rng(s.seed, 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  GeneratedScenario out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.vehicles[a].entry < s.vehicles[b].entry; });
  std::vector<occupancy::VehicleId> id_of(n);
  for (std::size_t r = 0; r < n; ++r) id_of[order[r]] = r + 1;
  for (std::size_t i = 0; i < n; ++i) out.ids.push_back({i, id_of[i]});

  std::vector<std::vector<double>> appearance_base(n);
  if (s.appearance_dim > 0) {
    for (auto& base : appearance_base) {
      base.resize(s.appearance_dim);
      for (double& x : base) x = gauss(rng);
    }
  }

  out.dropped.resize(n);
  std::vector<std::vector<char>> dropped(n);
  if (s.noise.dropout_probability > 0.0 && s.noise.max_gap_frames > 0) {
    std::bernoulli_distribution start_gap(s.noise.dropout_probability);
    std::uniform_int_distribution<int> gap_len(1, s.noise.max_gap_frames);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = s.vehicles[i];
      const std::uint64_t life = v.exit - v.entry;
      dropped[i].assign(life, 0);
      // still_back[j]: frames before entry+j with the same center; still_fwd[j]: frames from entry+j on.
      std::vector<std::uint64_t> still_back(life, 0), still_fwd(life, 1);
      for (std::uint64_t j = 1; j < life; ++j) {
        if (v.center_at(v.entry + j) == v.center_at(v.entry + j - 1)) still_back[j] = still_back[j - 1] + 1;
      }
      for (std::uint64_t j = life - 1; j-- > 0;) {
        if (v.center_at(v.entry + j) == v.center_at(v.entry + j + 1)) still_fwd[j] = still_fwd[j + 1] + 1;
      }
      for (std::uint64_t j = 0; j < life; ++j) {
        if (j < kSettle || still_back[j] < kSettle || still_fwd[j] <= kResume) continue;
        if (!start_gap(rng)) continue;
        const auto want = static_cast<std::uint64_t>(gap_len(rng));
        const std::uint64_t len = std::min(want, still_fwd[j] - kResume);
        for (std::uint64_t g = 0; g < len; ++g) {
          dropped[i][j + g] = 1;
          out.dropped[i].push_back(v.entry + j + g);
        }
        j += len;
      }
    }
  }

  analytics::LogHeader header;
  header.fps = s.fps;
  header.slot_count = s.map.size();
  header.slot_map_sha256 = slots::slot_map_sha256(s.map);
  header.start_timestamp_ms = s.start_timestamp_ms;
  out.truth.header = header;

  struct Emitted {
    std::uint64_t frame;
    Point center;
  };
  std::vector<std::optional<Emitted>> last(n), prev(n);
  const auto& map_slots = s.map.slots();

  out.stream.reserve(s.frames);
  out.truth.frames.reserve(s.frames);
  for (std::uint64_t k = 0; k < s.frames; ++k) {
    DetectionFrame df;
    df.frame_index = k;
    if (s.start_timestamp_ms) {
      df.timestamp_ms = *s.start_timestamp_ms + std::llround(static_cast<double>(k) * 1000.0 / s.fps);
    }
    std::vector<std::pair<occupancy::VehicleId, Point>> reported;

    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = s.vehicles[i];
      const bool confirmed_life = v.exit - v.entry >= static_cast<std::uint64_t>(truth.n_init);
      if (v.present(k)) {
        const bool drop = !dropped[i].empty() && dropped[i][k - v.entry];
        Point center = v.center_at(k);
        if (!drop) {
          BoundingBox box = v.box_at(k);
          if (s.noise.position_jitter_std > 0.0) {
            const double dx = gauss(rng) * s.noise.position_jitter_std;
            const double dy = gauss(rng) * s.noise.position_jitter_std;
            box = {box.x_min + dx, box.y_min + dy, box.x_max + dx, box.y_max + dy};
          }
          tracking::Detection det;
          det.bbox = box;
          det.cls = v.cls;
          det.confidence = 0.9;
          if (s.appearance_dim > 0) {
            det.appearance = appearance_base[i];
            for (double& x : det.appearance) x += gauss(rng) * s.appearance_jitter_std;
          }
          df.detections.push_back(std::move(det));
          center = geometry::bbox_center(box);
          prev[i] = last[i];
          last[i] = Emitted{k, center};
        }
        if (k - v.entry + 1 >= static_cast<std::uint64_t>(truth.n_init)) reported.emplace_back(id_of[i], center);
      } else if (k >= v.exit && confirmed_life && last[i] &&
                 k - last[i]->frame <= static_cast<std::uint64_t>(truth.coast_frames)) {
        const Point a = last[i]->center;
        const Point b = prev[i] && prev[i]->frame + 1 == last[i]->frame ? prev[i]->center : a;
        const double t = static_cast<double>(k - last[i]->frame);
        reported.emplace_back(id_of[i], Point{a.x + t * (a.x - b.x), a.y + t * (a.y - b.y)});
      }
    }

    std::sort(reported.begin(), reported.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    occupancy::OccupancyFrame frame = occupancy::empty_frame(map_slots.size(), k);
    frame.timestamp_ms = df.timestamp_ms;
    for (const auto& [id, center] : reported) {
      std::size_t slot = map_slots.size();
      for (std::size_t j = 0; j < map_slots.size(); ++j) {
        if (geometry::point_in_polygon(center, map_slots[j].polygon)) {
          slot = j;
          break;
        }
      }
      if (slot == map_slots.size() || frame.entries[slot].occupied) {
        frame.unassigned.push_back(id);
      } else {
        frame.entries[slot] = {true, id};
      }
    }
    std::sort(frame.unassigned.begin(), frame.unassigned.end());
    out.truth.frames.push_back(std::move(frame));
    out.stream.push_back(std::move(df));
  }
  return out;
}

LoadedScenario load_scenario_spec(std::string_view document, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(0, "", std::string("scenario spec: ") + e.what());
  }
  reject_unknown(doc, {"seed", "fps", "frames", "start_timestamp_ms", "layout", "slot_map", "traffic", "vehicles",
                       "noise", "appearance", "truth"},
                 "");

  std::optional<LayoutSpec> layout;
  std::optional<slots::SlotMap> map;
  if (const json* path = find(doc, "slot_map")) {
    if (!path->is_string()) throw ParseError(0, "slot_map", "expected a path");
    std::filesystem::path p = path->get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    map = slots::load_slot_map_file(p).map;
  } else {
    LayoutSpec l;
    if (const json* j = find(doc, "layout")) {
      reject_unknown(*j, {"rows", "slots_per_row", "slot_width", "slot_height", "lane_height", "margin"}, "layout");
      read_opt(*j, "rows", "layout", l.rows, count);
      read_opt(*j, "slots_per_row", "layout", l.slots_per_row, count);
      read_opt(*j, "slot_width", "layout", l.slot_width, number);
      read_opt(*j, "slot_height", "layout", l.slot_height, number);
      read_opt(*j, "lane_height", "layout", l.lane_height, number);
      read_opt(*j, "margin", "layout", l.margin, number);
    }
    layout = l;
    map = make_layout(l);
  }

  LoadedScenario out{Scenario(std::move(*map)), TruthOptions{}};
  Scenario& s = out.scenario;
  read_opt(doc, "seed", "", s.seed, count);
  read_opt(doc, "fps", "", s.fps, number);
  read_opt(doc, "frames", "", s.frames, count);
  if (auto it = doc.find("start_timestamp_ms"); it != doc.end()) {
    if (it->is_null()) {
      s.start_timestamp_ms.reset();
    } else if (it->is_number_integer()) {
      s.start_timestamp_ms = it->get<std::int64_t>();
    } else {
      throw ParseError(0, "start_timestamp_ms", "expected an integer or null");
    }
  }

  if (const json* j = find(doc, "noise")) {
    reject_unknown(*j, {"position_jitter_std", "dropout_probability", "max_gap_frames"}, "noise");
    read_opt(*j, "position_jitter_std", "noise", s.noise.position_jitter_std, number);
    read_opt(*j, "dropout_probability", "noise", s.noise.dropout_probability, number);
    read_opt(*j, "max_gap_frames", "noise", s.noise.max_gap_frames, count);
  }
  if (const json* j = find(doc, "appearance")) {
    reject_unknown(*j, {"dim", "jitter_std"}, "appearance");
    read_opt(*j, "dim", "appearance", s.appearance_dim, count);
    read_opt(*j, "jitter_std", "appearance", s.appearance_jitter_std, number);
  }
  if (const json* j = find(doc, "truth")) {
    reject_unknown(*j, {"n_init", "coast_frames"}, "truth");
    read_opt(*j, "n_init", "truth", out.truth.n_init, count);
    read_opt(*j, "coast_frames", "truth", out.truth.coast_frames, count);
  }

  if (const json* list = find(doc, "vehicles")) {
    if (!list->is_array()) throw ParseError(0, "vehicles", "expected an array");
    for (std::size_t i = 0; i < list->size(); ++i) {
      const std::string prefix = "vehicles[" + std::to_string(i) + "]";
      const json& item = (*list)[i];
      reject_unknown(item, {"entry", "exit", "slot", "keyframes", "class", "size"}, prefix);
      ScriptedVehicle v;
      if (!find(item, "entry") || !find(item, "exit")) throw ParseError(0, prefix, "entry and exit are required");
      v.entry = count(item["entry"], prefix + ".entry");
      v.exit = count(item["exit"], prefix + ".exit");
      if (const json* c = find(item, "class")) {
        if (!c->is_string() || !tracking::parse_vehicle_class(c->get<std::string>())) {
          throw ParseError(0, prefix + ".class", "unknown class");
        }
        v.cls = *tracking::parse_vehicle_class(c->get<std::string>());
      }
      if (const json* size = find(item, "size")) {
        if (!size->is_array() || size->size() != 2) throw ParseError(0, prefix + ".size", "expected [width,height]");
        v.width = number((*size)[0], prefix + ".size[0]");
        v.height = number((*size)[1], prefix + ".size[1]");
      }
      if (const json* frames = find(item, "keyframes")) {
        if (!frames->is_array()) throw ParseError(0, prefix + ".keyframes", "expected an array of [frame,x,y]");
        for (std::size_t k = 0; k < frames->size(); ++k) {
          const std::string kp = prefix + ".keyframes[" + std::to_string(k) + "]";
          const json& kf = (*frames)[k];
          if (!kf.is_array() || kf.size() != 3) throw ParseError(0, kp, "expected [frame,x,y]");
          v.path.push_back({count(kf[0], kp + "[0]"), {number(kf[1], kp + "[1]"), number(kf[2], kp + "[2]")}});
        }
      }
      if (const json* slot = find(item, "slot")) {
        const auto id = static_cast<slots::SlotId>(count(*slot, prefix + ".slot"));
        v.target_slot = id;
        if (v.path.empty()) v.path.push_back({v.entry, slot_center(s.map, id)});
      }
      s.vehicles.push_back(std::move(v));
    }
  }

  if (const json* j = find(doc, "traffic")) {
    if (!layout) throw ValidationError({"random traffic needs a generated layout, not an explicit slot_map"});
    reject_unknown(*j, {"vehicles", "min_speed", "max_speed", "vehicle_width", "vehicle_height", "min_dwell",
                        "max_dwell", "clearance", "ghost_frames", "max_attempts"},
                   "traffic");
    TrafficSpec t;
    read_opt(*j, "vehicles", "traffic", t.vehicles, count);
    read_opt(*j, "min_speed", "traffic", t.min_speed, number);
    read_opt(*j, "max_speed", "traffic", t.max_speed, number);
    read_opt(*j, "vehicle_width", "traffic", t.vehicle_width, number);
    read_opt(*j, "vehicle_height", "traffic", t.vehicle_height, number);
    read_opt(*j, "min_dwell", "traffic", t.min_dwell, count);
    read_opt(*j, "max_dwell", "traffic", t.max_dwell, count);
    read_opt(*j, "clearance", "traffic", t.clearance, number);
    read_opt(*j, "ghost_frames", "traffic", t.ghost_frames, count);
    read_opt(*j, "max_attempts", "traffic", t.max_attempts, count);
    if (s.frames == 0) throw ValidationError({"frames must be positive"});
    std::mt19937_64 rng = stream_rng(s.seed, 0);
    add_random_traffic(s, *layout, t, rng);
  }

  s.validate();
  return out;
}

LoadedScenario load_scenario_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot open scenario spec " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_scenario_spec(buffer.str(), path.parent_path());
}

}  // namespace parklot::ingest
