#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "parklot/analytics/stats.hpp"
#include "parklot/slots/slot_map.hpp"

namespace parklot::analytics {

enum class ExportFormat { Csv, Json, Svg };

std::string_view to_string(ExportFormat format) noexcept;
/// Accepts "csv", "json", "svg" and "svg-heatmap"; anything else throws Error
/// "unsupported format '<name>'".
ExportFormat parse_export_format(std::string_view name);
/// Comma-separated list, duplicates removed, order kept.
std::vector<ExportFormat> parse_export_formats(std::string_view list);

/// Durations are printed fixed-point with 3 decimals. The svg heatmap is only
/// defined for per-slot values and needs the slot map; the other exports
/// throw Error for svg. Stream failures throw StorageError.
void export_timeseries(const std::vector<SeriesPoint>& series, ExportFormat format, std::ostream& sink);
void export_slot_durations(const std::map<SlotId, double>& durations, ExportFormat format, std::ostream& sink,
                           const slots::SlotMap* map = nullptr);
void export_slot_vehicle_counts(const std::map<SlotId, std::size_t>& counts, ExportFormat format,
                                std::ostream& sink, const slots::SlotMap* map = nullptr);
void export_slot_visit_counts(const std::map<SlotId, std::size_t>& counts, ExportFormat format, std::ostream& sink,
                              const slots::SlotMap* map = nullptr);
void export_overstays(const std::vector<Overstay>& overstays, ExportFormat format, std::ostream& sink);
void export_slot_stats(const std::map<SlotId, SlotStats>& stats, ExportFormat format, std::ostream& sink);

/// Compact JSON object with per-slot durations, distinct and visit counts and
/// the occupancy series of `log`, followed by a newline.
std::string analytics_snapshot(const OccupancyLog& log, std::span<const SlotId> slot_ids = {});

/// Heatmap ramp endpoints: value 0 maps to kRampLow, the maximum to kRampHigh.
inline constexpr unsigned kRampLow = 0xffffb2;
inline constexpr unsigned kRampHigh = 0xbd0026;
/// "#rrggbb" for `value` on the ramp scaled to `max_value` (0 when max is 0).
std::string ramp_color(double value, double max_value);

/// Polygon heatmap over slot geometry. Slots missing from `values` draw as 0.
std::string svg_heatmap(const slots::SlotMap& map, const std::map<SlotId, double>& values, std::string_view title,
                        int decimals);

/// Fixed-point formatting used by every export.
std::string fixed(double value, int decimals);

/// Writes `bytes` to `path`, replacing it; throws StorageError.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace parklot::analytics
