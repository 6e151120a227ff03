#include "parklot/engine/config.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "parklot/error.hpp"

namespace parklot::engine {

using nlohmann::ordered_json;

namespace {

const char* gating_name(tracking::GatingMode mode) {
  return mode == tracking::GatingMode::MahalanobisOnly ? "mahalanobis_only" : "mahalanobis_and_iou";
}

std::string formats_string(const std::vector<analytics::ExportFormat>& formats) {
  std::string out;
  for (auto f : formats) {
    if (!out.empty()) out += ',';
    out += analytics::to_string(f);
  }
  return out;
}

ordered_json to_json(const EngineConfig& c) {
  ordered_json j;
  j["slot_map"] = c.slot_map.string();
  j["log"] = c.log.string();
  j["fps"] = c.fps;
  j["start_timestamp_ms"] = c.start_timestamp_ms ? ordered_json(*c.start_timestamp_ms) : ordered_json(nullptr);
  j["log_sync_every"] = c.log_sync_every;
  const auto& t = c.tracker;
  j["tracker"] = {{"iou_min", t.iou_min},
                  {"lambda", t.lambda},
                  {"mahalanobis_gate", t.mahalanobis_gate},
                  {"max_age", t.max_age},
                  {"n_init", t.n_init},
                  {"gallery_capacity", t.gallery_capacity},
                  {"gating", gating_name(t.gating)},
                  {"class_consistent_matching", t.class_consistent_matching},
                  {"noise",
                   {{"position_weight", t.noise.position_weight},
                    {"velocity_weight", t.noise.velocity_weight},
                    {"aspect_std", t.noise.aspect_std},
                    {"aspect_velocity_std", t.noise.aspect_velocity_std},
                    {"measurement_position_weight", t.noise.measurement_position_weight},
                    {"measurement_aspect_std", t.noise.measurement_aspect_std}}}};
  j["occupancy"] = {{"min_dwell_frames", c.min_dwell_frames}};
  j["ingest"] = {{"accept_unknown_class", c.accept_unknown_class}};
  j["serve"] = {{"enabled", c.serve.enabled},
                {"address", c.serve.address},
                {"port", c.serve.port},
                {"queue_capacity", c.serve.queue_capacity}};
  j["export"] = {{"formats", formats_string(c.export_formats)}};
  return j;
}

void collect_keys(const ordered_json& j, const std::string& prefix, std::vector<std::string>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string name = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      collect_keys(*it, name, out);
    } else {
      out.push_back(name);
    }
  }
}

// Overlays `src` onto `dst`, rejecting keys the defaults do not define.
void merge(ordered_json& dst, const ordered_json& src, const std::string& prefix) {
  if (!src.is_object()) throw ParseError(0, prefix, "expected an object");
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string name = prefix.empty() ? it.key() : prefix + "." + it.key();
    auto target = dst.find(it.key());
    if (target == dst.end()) throw ParseError(0, name, "unknown configuration key");
    if (target->is_object()) {
      merge(*target, *it, name);
    } else {
      *target = *it;
    }
  }
}

ordered_json* leaf(ordered_json& root, const std::string& dotted) {
  ordered_json* node = &root;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', pos);
    const std::string key = dotted.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (!node->is_object()) return nullptr;
    auto it = node->find(key);
    if (it == node->end()) return nullptr;
    node = &*it;
    if (dot == std::string::npos) return node->is_object() ? nullptr : node;
    pos = dot + 1;
  }
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && !text.empty();
}

// Replaces `target` with `text` interpreted as the type of the default value.
void apply_override(ordered_json& target, const ordered_json& default_value, const std::string& key,
                    const std::string& text) {
  auto bad = [&](const char* expected) {
    return ParseError(0, key, "override '" + text + "' is not " + expected);
  };
  if (default_value.is_boolean()) {
    if (text == "true" || text == "1") {
      target = true;
    } else if (text == "false" || text == "0") {
      target = false;
    } else {
      throw bad("a boolean");
    }
  } else if (default_value.is_number_float()) {
    double v = 0;
    if (!parse_number(text, v)) throw bad("a number");
    target = v;
  } else if (default_value.is_number_integer()) {
    std::int64_t v = 0;
    if (!parse_number(text, v)) throw bad("an integer");
    target = v;
  } else if (default_value.is_null()) {
    std::int64_t v = 0;
    if (text == "null") {
      target = nullptr;
    } else if (parse_number(text, v)) {
      target = v;
    } else {
      throw bad("an integer or null");
    }
  } else {
    target = text;
  }
}

template <typename T>
T get(const ordered_json& j, const char* key, const std::string& prefix) {
  const auto& v = j.at(key);
  const std::string name = prefix.empty() ? key : prefix + "." + key;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ParseError(0, name, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ParseError(0, name, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.get<std::int64_t>() < 0) throw ParseError(0, name, "must be non-negative");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ParseError(0, name, "expected a number");
    } else {
      if (!v.is_string()) throw ParseError(0, name, "expected a string");
    }
    return v.get<T>();
  } catch (const ordered_json::exception& e) {
    throw ParseError(0, name, e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p = value;
  if (value.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

EngineConfig from_json(const ordered_json& j) {
  EngineConfig c;
  c.slot_map = get<std::string>(j, "slot_map", "");
  c.log = get<std::string>(j, "log", "");
  c.fps = get<double>(j, "fps", "");
  if (!j.at("start_timestamp_ms").is_null()) c.start_timestamp_ms = get<std::int64_t>(j, "start_timestamp_ms", "");
  c.log_sync_every = get<std::size_t>(j, "log_sync_every", "");

  const auto& t = j.at("tracker");
  c.tracker.iou_min = get<double>(t, "iou_min", "tracker");
  c.tracker.lambda = get<double>(t, "lambda", "tracker");
  c.tracker.mahalanobis_gate = get<double>(t, "mahalanobis_gate", "tracker");
  c.tracker.max_age = get<int>(t, "max_age", "tracker");
  c.tracker.n_init = get<int>(t, "n_init", "tracker");
  c.tracker.gallery_capacity = get<std::size_t>(t, "gallery_capacity", "tracker");
  const auto gating = get<std::string>(t, "gating", "tracker");
  if (gating == "mahalanobis_and_iou") {
    c.tracker.gating = tracking::GatingMode::MahalanobisAndIou;
  } else if (gating == "mahalanobis_only") {
    c.tracker.gating = tracking::GatingMode::MahalanobisOnly;
  } else {
    throw ParseError(0, "tracker.gating", "expected mahalanobis_and_iou or mahalanobis_only");
  }
  c.tracker.class_consistent_matching = get<bool>(t, "class_consistent_matching", "tracker");
  const auto& n = t.at("noise");
  c.tracker.noise.position_weight = get<double>(n, "position_weight", "tracker.noise");
  c.tracker.noise.velocity_weight = get<double>(n, "velocity_weight", "tracker.noise");
  c.tracker.noise.aspect_std = get<double>(n, "aspect_std", "tracker.noise");
  c.tracker.noise.aspect_velocity_std = get<double>(n, "aspect_velocity_std", "tracker.noise");
  c.tracker.noise.measurement_position_weight = get<double>(n, "measurement_position_weight", "tracker.noise");
  c.tracker.noise.measurement_aspect_std = get<double>(n, "measurement_aspect_std", "tracker.noise");

  c.min_dwell_frames = get<int>(j.at("occupancy"), "min_dwell_frames", "occupancy");
  c.accept_unknown_class = get<bool>(j.at("ingest"), "accept_unknown_class", "ingest");
  const auto& s = j.at("serve");
  c.serve.enabled = get<bool>(s, "enabled", "serve");
  c.serve.address = get<std::string>(s, "address", "serve");
  c.serve.port = get<int>(s, "port", "serve");
  c.serve.queue_capacity = get<std::size_t>(s, "queue_capacity", "serve");
  try {
    c.export_formats = analytics::parse_export_formats(get<std::string>(j.at("export"), "formats", "export"));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(0, "export.formats", e.what());
  }
  return c;
}

}  // namespace

void EngineConfig::validate() const {
  std::vector<std::string> bad;
  if (slot_map.empty()) {
    bad.push_back("slot_map is required");
  } else if (!std::filesystem::is_regular_file(slot_map)) {
    bad.push_back("slot_map: cannot find " + slot_map.string());
  }
  if (log.empty()) {
    bad.push_back("log is required");
  } else {
    const auto dir = log.has_parent_path() ? log.parent_path() : std::filesystem::path(".");
    if (!std::filesystem::is_directory(dir)) bad.push_back("log: directory " + dir.string() + " does not exist");
  }
  if (!(fps > 0.0)) bad.push_back("fps must be positive");
  if (min_dwell_frames < 0) bad.push_back("occupancy.min_dwell_frames must be non-negative");
  if (serve.port < 0 || serve.port > 65535) bad.push_back("serve.port must lie in [0, 65535]");
  if (serve.queue_capacity == 0) bad.push_back("serve.queue_capacity must be positive");
  try {
    tracker.validate();
  } catch (const ValidationError& e) {
    for (const auto& v : e.violations()) bad.push_back(v);
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

std::string default_config_document() { return to_json(EngineConfig{}).dump(2) + "\n"; }

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  collect_keys(to_json(EngineConfig{}), "", out);
  return out;
}

EngineConfig parse_config(std::string_view document, const std::filesystem::path& base_dir,
                          const std::vector<Override>& overrides) {
  const ordered_json defaults = to_json(EngineConfig{});
  ordered_json merged = defaults;
  ordered_json doc;
  try {
    doc = ordered_json::parse(document.begin(), document.end());
  } catch (const ordered_json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, document.size()); ++i) line += document[i] == '\n';
    throw ParseError(line, "", e.what());
  }
  merge(merged, doc, "");
  for (const char* key : {"slot_map", "log"}) {
    if (merged[key].is_string() && doc.contains(key)) {
      merged[key] = resolve(base_dir, merged[key].get<std::string>()).string();
    }
  }
  ordered_json defaults_copy = defaults;
  for (const auto& [key, value] : overrides) {
    ordered_json* target = leaf(merged, key);
    const ordered_json* def = leaf(defaults_copy, key);
    if (!target || !def) throw ParseError(0, key, "unknown configuration key");
    apply_override(*target, *def, key, value);
  }
  EngineConfig config = from_json(merged);
  return config;
}

EngineConfig load_config(const std::filesystem::path& path, const std::vector<Override>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot open config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path(), overrides);
}

std::string config_document(const EngineConfig& config) { return to_json(config).dump(2) + "\n"; }

}  // namespace parklot::engine
