#include "parklot/analytics/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "parklot/error.hpp"

namespace parklot::analytics {

namespace {

std::string shortest(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

void finish(std::ostream& sink) {
  sink.flush();
  if (!sink) throw StorageError("export: write failed");
}

[[noreturn]] void no_svg(std::string_view what) {
  throw Error("unsupported format 'svg' for " + std::string(what) + " (svg heatmaps cover per-slot values only)");
}

template <typename Value, typename Format>
void export_slot_values(const std::map<SlotId, Value>& values, std::string_view column, ExportFormat format,
                        std::ostream& sink, const slots::SlotMap* map, int decimals, Format format_value) {
  switch (format) {
    case ExportFormat::Csv:
      sink << "slot_id," << column << '\n';
      for (const auto& [id, v] : values) sink << id << ',' << format_value(v) << '\n';
      break;
    case ExportFormat::Json: {
      sink << '[';
      bool first = true;
      for (const auto& [id, v] : values) {
        sink << (first ? "" : ",") << "{\"slot_id\":" << id << ",\"" << column << "\":" << format_value(v) << '}';
        first = false;
      }
      sink << "]\n";
      break;
    }
    case ExportFormat::Svg: {
      if (!map) throw Error("svg heatmap needs the slot map");
      std::map<SlotId, double> as_double;
      for (const auto& [id, v] : values) as_double[id] = static_cast<double>(v);
      sink << svg_heatmap(*map, as_double, column, decimals);
      break;
    }
  }
  finish(sink);
}

std::string escape_xml(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(ExportFormat format) noexcept {
  switch (format) {
    case ExportFormat::Csv: return "csv";
    case ExportFormat::Json: return "json";
    case ExportFormat::Svg: return "svg";
  }
  return "csv";
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "json") return ExportFormat::Json;
  if (name == "svg" || name == "svg-heatmap") return ExportFormat::Svg;
  throw Error("unsupported format '" + std::string(name) + "'");
}

std::vector<ExportFormat> parse_export_formats(std::string_view list) {
  std::vector<ExportFormat> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    std::string_view item = list.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    const ExportFormat f = parse_export_format(item);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    pos = comma + 1;
  }
  return out;
}

std::string fixed(double value, int decimals) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw Error("cannot format number");
  std::string out(buf, end);
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

void export_timeseries(const std::vector<SeriesPoint>& series, ExportFormat format, std::ostream& sink) {
  switch (format) {
    case ExportFormat::Csv:
      sink << "frame_index,timestamp_ms,occupied_count\n";
      for (const auto& p : series) {
        sink << p.frame_index << ',';
        if (p.timestamp_ms) sink << *p.timestamp_ms;
        sink << ',' << p.occupied_count << '\n';
      }
      break;
    case ExportFormat::Json: {
      sink << '[';
      for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& p = series[i];
        sink << (i ? "," : "") << "{\"frame_index\":" << p.frame_index << ",\"timestamp_ms\":";
        if (p.timestamp_ms) {
          sink << *p.timestamp_ms;
        } else {
          sink << "null";
        }
        sink << ",\"occupied_count\":" << p.occupied_count << '}';
      }
      sink << "]\n";
      break;
    }
    case ExportFormat::Svg: no_svg("timeseries");
  }
  finish(sink);
}

void export_slot_durations(const std::map<SlotId, double>& durations, ExportFormat format, std::ostream& sink,
                           const slots::SlotMap* map) {
  export_slot_values(durations, "occupied_seconds", format, sink, map, 3, [](double v) { return fixed(v, 3); });
}

void export_slot_vehicle_counts(const std::map<SlotId, std::size_t>& counts, ExportFormat format,
                                std::ostream& sink, const slots::SlotMap* map) {
  export_slot_values(counts, "distinct_vehicles", format, sink, map, 0,
                     [](std::size_t v) { return std::to_string(v); });
}

void export_slot_visit_counts(const std::map<SlotId, std::size_t>& counts, ExportFormat format, std::ostream& sink,
                              const slots::SlotMap* map) {
  export_slot_values(counts, "visits", format, sink, map, 0, [](std::size_t v) { return std::to_string(v); });
}

void export_overstays(const std::vector<Overstay>& overstays, ExportFormat format, std::ostream& sink) {
  switch (format) {
    case ExportFormat::Csv:
      sink << "slot_id,vehicle_id,start_frame,end_frame,duration_seconds\n";
      for (const auto& o : overstays) {
        sink << o.slot_id << ',' << o.vehicle_id << ',' << o.start_frame << ',' << o.end_frame << ','
             << fixed(o.duration_seconds, 3) << '\n';
      }
      break;
    case ExportFormat::Json:
      sink << '[';
      for (std::size_t i = 0; i < overstays.size(); ++i) {
        const auto& o = overstays[i];
        sink << (i ? "," : "") << "{\"slot_id\":" << o.slot_id << ",\"vehicle_id\":" << o.vehicle_id
             << ",\"start_frame\":" << o.start_frame << ",\"end_frame\":" << o.end_frame
             << ",\"duration_seconds\":" << fixed(o.duration_seconds, 3) << '}';
      }
      sink << "]\n";
      break;
    case ExportFormat::Svg: no_svg("overstays");
  }
  finish(sink);
}

std::string analytics_snapshot(const OccupancyLog& log, std::span<const SlotId> slot_ids) {
  auto compact = [](auto&& write) {
    std::ostringstream s;
    write(s);
    std::string out = s.str();
    if (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
  };
  const auto stats = slot_stats(log, slot_ids);
  std::map<SlotId, double> durations;
  std::map<SlotId, std::size_t> distinct, visits;
  for (const auto& [id, s] : stats) {
    durations[id] = s.occupied_seconds;
    distinct[id] = s.distinct_vehicles;
    visits[id] = s.visits;
  }
  std::ostringstream out;
  out << "{\"frames\":" << log.frames.size() << ",\"last_frame_index\":";
  if (log.frames.empty()) {
    out << "null";
  } else {
    out << log.frames.back().frame_index;
  }
  out << ",\"slot_durations\":"
      << compact([&](std::ostream& s) { export_slot_durations(durations, ExportFormat::Json, s); })
      << ",\"slot_vehicle_counts\":"
      << compact([&](std::ostream& s) { export_slot_vehicle_counts(distinct, ExportFormat::Json, s); })
      << ",\"slot_visit_counts\":"
      << compact([&](std::ostream& s) { export_slot_visit_counts(visits, ExportFormat::Json, s); })
      << ",\"occupancy_timeseries\":"
      << compact([&](std::ostream& s) { export_timeseries(occupancy_timeseries(log), ExportFormat::Json, s); })
      << "}\n";
  return out.str();
}

void export_slot_stats(const std::map<SlotId, SlotStats>& stats, ExportFormat format, std::ostream& sink) {
  switch (format) {
    case ExportFormat::Csv:
      sink << "slot_id,start_frame,end_frame,vehicle_id,duration_frames\n";
      for (const auto& [id, s] : stats) {
        for (const auto& iv : s.intervals) {
          sink << id << ',' << iv.start_frame << ',' << iv.end_frame << ',' << iv.vehicle_id << ',' << iv.length()
               << '\n';
        }
      }
      break;
    case ExportFormat::Json: {
      sink << '[';
      bool first = true;
      for (const auto& [id, s] : stats) {
        sink << (first ? "" : ",") << "{\"slot_id\":" << id << ",\"occupied_seconds\":" << fixed(s.occupied_seconds, 3)
             << ",\"distinct_vehicles\":" << s.distinct_vehicles << ",\"visits\":" << s.visits << ",\"intervals\":[";
        for (std::size_t i = 0; i < s.intervals.size(); ++i) {
          const auto& iv = s.intervals[i];
          sink << (i ? "," : "") << '[' << iv.start_frame << ',' << iv.end_frame << ',' << iv.vehicle_id << ']';
        }
        sink << "]}";
        first = false;
      }
      sink << "]\n";
      break;
    }
    case ExportFormat::Svg: no_svg("slot_stats");
  }
  finish(sink);
}

std::string ramp_color(double value, double max_value) {
  double t = max_value > 0.0 ? value / max_value : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  auto channel = [t](unsigned shift) {
    const double lo = static_cast<double>((kRampLow >> shift) & 0xFF);
    const double hi = static_cast<double>((kRampHigh >> shift) & 0xFF);
    return static_cast<unsigned>(std::lround(lo + t * (hi - lo)));
  };
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "#";
  for (unsigned shift : {16u, 8u, 0u}) {
    const unsigned c = channel(shift);
    out += kHex[c >> 4];
    out += kHex[c & 0xF];
  }
  return out;
}

std::string svg_heatmap(const slots::SlotMap& map, const std::map<SlotId, double>& values, std::string_view title,
                        int decimals) {
  double max_value = 0.0;
  for (const auto& slot : map.slots()) {
    if (auto it = values.find(slot.slot_id); it != values.end()) max_value = std::max(max_value, it->second);
  }
  const std::string w = shortest(map.frame_width());
  const std::string h = shortest(map.frame_height());

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<!-- " << escape_xml(title) << " heatmap. Color ramp: fill = per-channel linear interpolation from "
      << ramp_color(0.0, 1.0) << " (value 0) to " << ramp_color(1.0, 1.0) << " (value " << fixed(max_value, decimals)
      << ", the maximum); t = value / maximum, channel = round(low + t * (high - low)). -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\">\n";
  out << "<title>" << escape_xml(title) << "</title>\n";
  for (const auto& slot : map.slots()) {
    const auto it = values.find(slot.slot_id);
    const double value = it == values.end() ? 0.0 : it->second;
    out << "<polygon data-slot-id=\"" << slot.slot_id << "\" data-value=\"" << fixed(value, decimals)
        << "\" fill=\"" << ramp_color(value, max_value) << "\" stroke=\"#333333\" stroke-width=\"1\" points=\"";
    const auto& v = slot.polygon.vertices();
    for (std::size_t k = 0; k + 1 < v.size(); ++k) out << (k ? " " : "") << shortest(v[k].x) << ',' << shortest(v[k].y);
    out << "\"/>\n";
    const auto c = slot.polygon.bounds();
    out << "<text x=\"" << shortest((c.x_min + c.x_max) / 2) << "\" y=\"" << shortest((c.y_min + c.y_max) / 2)
        << "\" text-anchor=\"middle\" dominant-baseline=\"middle\" font-size=\"10\">"
        << escape_xml(slot.label ? *slot.label : std::to_string(slot.slot_id)) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw StorageError("cannot write " + path.string());
}

}  // namespace parklot::analytics
