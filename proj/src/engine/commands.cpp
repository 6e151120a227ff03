#include "parklot/engine/commands.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "parklot/analytics/export.hpp"
#include "parklot/analytics/stats.hpp"
#include "parklot/engine/broadcast.hpp"
#include "parklot/engine/pipeline.hpp"
#include "parklot/engine/server.hpp"
#include "parklot/error.hpp"
#include "parklot/ingest/scenario.hpp"

namespace parklot::engine {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

void print_summary(std::ostream& out, const std::optional<occupancy::FrameSummary>& summary, std::size_t slots) {
  if (summary) {
    out << "{\"frame_index\":" << summary->frame_index << ",\"occupied_count\":" << summary->occupied_count
        << ",\"free_count\":" << summary->free_count << ",\"total_slots\":" << summary->total_slots << "}\n";
  } else {
    out << "{\"frame_index\":null,\"occupied_count\":0,\"free_count\":" << slots << ",\"total_slots\":" << slots
        << "}\n";
  }
}

// Loads and validates everything `run` and `serve` need before touching the log.
struct Prepared {
  EngineConfig config;
  std::optional<slots::SlotMap> map;
};

int prepare(const RunArgs& args, Io io, Prepared& out) {
  try {
    out.config = load_config(args.config, args.overrides);
    out.config.validate();
  } catch (const Error& e) {
    io.err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    auto loaded = slots::load_slot_map_file(out.config.slot_map);
    for (const auto& w : loaded.warnings) spdlog::warn("slot map: {}", w);
    out.map = std::move(loaded.map);
  } catch (const StorageError& e) {
    io.err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    io.err << "slot map " << out.config.slot_map.string() << ": " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

analytics::LogHeader header_for(const EngineConfig& config, const slots::SlotMap& map) {
  analytics::LogHeader h;
  h.fps = config.fps;
  h.slot_count = map.size();
  h.slot_map_sha256 = slots::slot_map_sha256(map);
  h.start_timestamp_ms = config.start_timestamp_ms;
  return h;
}

EventServer::AnalyticsSource log_analytics(std::filesystem::path log, std::vector<occupancy::SlotId> ids) {
  return [log = std::move(log), ids = std::move(ids)] {
    const auto parsed = analytics::read_log_file(log);
    return analytics::analytics_snapshot(parsed, ids);
  };
}

// Runs the detection stream through the pipeline; shared by run and serve.
int stream_pipeline(const RunArgs& args, Prepared& prep, Io io, Broadcaster* broadcaster, RunStats& stats) {
  std::ifstream file;
  std::istream* input = &io.in;
  if (args.input != "-") {
    file.open(args.input, std::ios::binary);
    if (!file) {
      io.err << "cannot open input " << args.input << '\n';
      return kExitUsage;
    }
    input = &file;
  }

  std::optional<analytics::LogWriter> log;
  try {
    log.emplace(prep.config.log, header_for(prep.config, *prep.map),
                analytics::LogWriter::Options{prep.config.log_sync_every});
  } catch (const Error& e) {
    io.err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }

  Pipeline pipeline(*prep.map, prep.config.tracker, prep.config.min_dwell_frames);
  ingest::DetectionStreamReader reader(*input, ingest::StreamOptions{prep.config.accept_unknown_class});
  try {
    stats = run_stream(reader, pipeline, &*log, broadcaster, &g_stop);
  } catch (const ParseError& e) {
    io.err << "input " << (args.input == "-" ? std::string("<stdin>") : args.input) << ": " << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitData;
  }
  if (prep.config.log_sync_every > 0) log->sync();
  spdlog::info("processed {} frames in {:.3f} s ({:.1f} frames/s)", stats.frames, stats.seconds,
               stats.seconds > 0 ? static_cast<double>(stats.frames) / stats.seconds : 0.0);
  return kExitOk;
}

std::unique_ptr<EventServer> start_server(const Prepared& prep, Broadcaster& broadcaster,
                                          EventServer::AnalyticsSource analytics,
                                          const std::optional<std::filesystem::path>& port_file, Io io) {
  auto server = std::make_unique<EventServer>(broadcaster, slots::save_slot_map(*prep.map), std::move(analytics));
  try {
    server->bind(prep.config.serve.address, prep.config.serve.port);
  } catch (const Error& e) {
    io.err << "serve: " << e.what() << '\n';
    return nullptr;
  }
  server->start();
  spdlog::info("serving on http://{}:{}", prep.config.serve.address, server->port());
  if (port_file) {
    std::ofstream(*port_file) << server->port() << '\n';
  }
  return server;
}

void wait_for_stop() {
  while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
}

void write_export(const std::filesystem::path& path, const std::function<void(std::ostream&)>& write) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageError("cannot open " + path.string() + " for writing");
  write(out);
}

}  // namespace

void request_stop() noexcept { g_stop.store(true); }

bool configure_logging() {
  auto logger = spdlog::get("parklot");
  if (!logger) {
    logger = spdlog::stderr_color_mt("parklot");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
  }
  const char* env = std::getenv("PARKLOT_LOG_LEVEL");
  const std::string level = env ? env : "info";
  static const std::map<std::string, spdlog::level::level_enum> kLevels{{"error", spdlog::level::err},
                                                                       {"warn", spdlog::level::warn},
                                                                       {"info", spdlog::level::info},
                                                                       {"debug", spdlog::level::debug}};
  auto it = kLevels.find(level);
  if (it == kLevels.end()) return false;
  spdlog::set_level(it->second);
  return true;
}

int run_command(const RunArgs& args, Io io) {
  g_stop.store(false);
  Prepared prep;
  if (int rc = prepare(args, io, prep); rc != kExitOk) return rc;

  std::unique_ptr<Broadcaster> broadcaster;
  std::unique_ptr<EventServer> server;
  if (prep.config.serve.enabled) {
    broadcaster = std::make_unique<Broadcaster>(occupancy::slot_ids_of(*prep.map), prep.config.serve.queue_capacity);
    server = start_server(prep, *broadcaster, log_analytics(prep.config.log, occupancy::slot_ids_of(*prep.map)),
                          std::nullopt, io);
    if (!server) return kExitUsage;
  }

  RunStats stats;
  const int rc = stream_pipeline(args, prep, io, broadcaster.get(), stats);
  if (broadcaster) broadcaster->close();
  if (server) server->stop();
  if (rc == kExitOk) print_summary(io.out, stats.last_summary, prep.map->size());
  return rc;
}

int serve_command(const ServeArgs& args, Io io) {
  g_stop.store(false);
  Prepared prep;
  if (int rc = prepare(args.run, io, prep); rc != kExitOk) return rc;
  const auto ids = occupancy::slot_ids_of(*prep.map);
  Broadcaster broadcaster(ids, prep.config.serve.queue_capacity);

  if (!args.replay) {
    auto server = start_server(prep, broadcaster, log_analytics(prep.config.log, ids), args.port_file, io);
    if (!server) return kExitUsage;
    RunStats stats;
    const int rc = stream_pipeline(args.run, prep, io, &broadcaster, stats);
    broadcaster.close();
    if (rc != kExitOk) return rc;
    print_summary(io.out, stats.last_summary, prep.map->size());
    if (!args.exit_when_done) wait_for_stop();
    return kExitOk;
  }

  analytics::OccupancyLog log;
  try {
    log = analytics::read_log_file(*args.replay);
  } catch (const StorageError& e) {
    io.err << "replay: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    io.err << "replay " << args.replay->string() << ": " << e.what() << '\n';
    return kExitData;
  }
  if (log.header.slot_count != prep.map->size()) {
    io.err << "replay: log has " << log.header.slot_count << " slots, slot map has " << prep.map->size() << '\n';
    return kExitData;
  }
  if (log.header.slot_map_sha256 != slots::slot_map_sha256(*prep.map)) {
    spdlog::warn("replay: log was recorded against a different slot map");
  }

  auto server = start_server(prep, broadcaster, log_analytics(*args.replay, ids), args.port_file, io);
  if (!server) return kExitUsage;
  const double rate = args.replay_rate.value_or(log.header.fps);
  const auto period = rate > 0 ? std::chrono::duration<double>(1.0 / rate) : std::chrono::duration<double>(0);
  auto next = std::chrono::steady_clock::now();
  const occupancy::OccupancyFrame* prev = nullptr;
  for (const auto& frame : log.frames) {
    if (g_stop.load()) break;
    const auto events = prev ? occupancy::diff_frames(*prev, frame, ids) : occupancy::initial_events(frame, ids);
    broadcaster.publish(frame, events);
    prev = &frame;
    if (period.count() > 0) {
      next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
      std::this_thread::sleep_until(next);
    }
  }
  broadcaster.close();
  print_summary(io.out, prev ? std::optional(occupancy::summarize(*prev)) : std::nullopt, prep.map->size());
  if (!args.exit_when_done) wait_for_stop();
  return kExitOk;
}

int analyze_command(const AnalyzeArgs& args, Io io) {
  std::vector<analytics::ExportFormat> formats;
  try {
    formats = analytics::parse_export_formats(args.formats);
  } catch (const Error& e) {
    io.err << e.what() << '\n';
    return kExitUsage;
  }
  const bool want_svg =
      std::find(formats.begin(), formats.end(), analytics::ExportFormat::Svg) != formats.end();

  std::optional<slots::SlotMap> map;
  if (args.slots) {
    try {
      map = slots::load_slot_map_file(*args.slots).map;
    } catch (const StorageError& e) {
      io.err << e.what() << '\n';
      return kExitUsage;
    } catch (const Error& e) {
      io.err << "slot map " << args.slots->string() << ": " << e.what() << '\n';
      return kExitData;
    }
  } else if (want_svg) {
    io.err << "svg heatmaps need the slot map (--slots MAP)\n";
    return kExitUsage;
  }

  analytics::OccupancyLog log;
  try {
    log = analytics::read_log_file(args.log);
  } catch (const StorageError& e) {
    io.err << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    io.err << "log " << args.log.string() << ": " << e.what() << '\n';
    return kExitData;
  }

  try {
    const auto ids = analytics::log_slot_ids(log.header, map ? &*map : nullptr);
    const auto series = analytics::occupancy_timeseries(log);
    const auto stats = analytics::slot_stats(log, ids);
    std::map<analytics::SlotId, double> durations;
    std::map<analytics::SlotId, std::size_t> distinct;
    for (const auto& [id, s] : stats) {
      durations[id] = s.occupied_seconds;
      distinct[id] = s.distinct_vehicles;
    }
    std::filesystem::create_directories(args.out_dir);
    const slots::SlotMap* m = map ? &*map : nullptr;
    std::size_t written = 0;
    for (auto f : formats) {
      const std::string ext(analytics::to_string(f));
      auto path = [&](const char* stem) { return args.out_dir / (std::string(stem) + "." + ext); };
      write_export(path("slot_durations"), [&](std::ostream& o) { analytics::export_slot_durations(durations, f, o, m); });
      write_export(path("slot_vehicle_counts"),
                   [&](std::ostream& o) { analytics::export_slot_vehicle_counts(distinct, f, o, m); });
      written += 2;
      if (f == analytics::ExportFormat::Svg) continue;
      write_export(path("timeseries"), [&](std::ostream& o) { analytics::export_timeseries(series, f, o); });
      write_export(path("slot_stats"), [&](std::ostream& o) { analytics::export_slot_stats(stats, f, o); });
      written += 2;
      if (args.overstay_seconds) {
        const auto over = analytics::overstays(stats, log.header.fps, *args.overstay_seconds);
        write_export(path("overstays"), [&](std::ostream& o) { analytics::export_overstays(over, f, o); });
        ++written;
      }
    }
    io.out << "analyzed " << log.frames.size() << " frames, wrote " << written << " files to "
           << args.out_dir.string() << '\n';
  } catch (const StorageError& e) {
    io.err << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    io.err << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    io.err << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

int validate_slots_command(const std::filesystem::path& path, Io io) {
  try {
    const auto loaded = slots::load_slot_map_file(path);
    for (const auto& w : loaded.warnings) io.out << "warning: " << w << '\n';
    for (const auto& o : slots::slot_overlap_report(loaded.map)) {
      if (o.interior_overlap) {
        io.out << "warning: slots " << o.first << " and " << o.second << " overlap (area "
               << analytics::fixed(o.overlap_area, 3) << ")\n";
      } else {
        io.out << "note: slots " << o.first << " and " << o.second << " share " << analytics::fixed(o.shared_boundary, 3)
               << " px of boundary\n";
      }
    }
    io.out << "OK, " << loaded.map.size() << " slots\n";
    return kExitOk;
  } catch (const StorageError& e) {
    io.err << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    for (const auto& v : e.violations()) io.out << v << '\n';
    io.out << "INVALID, " << e.violations().size() << " violation" << (e.violations().size() == 1 ? "" : "s") << '\n';
    return kExitData;
  } catch (const Error& e) {
    io.out << e.what() << '\n';
    io.out << "INVALID\n";
    return kExitData;
  }
}

int synth_command(const std::filesystem::path& spec, const std::filesystem::path& out_dir, Io io) {
  ingest::LoadedScenario loaded = [&] {
    return ingest::load_scenario_spec_file(spec);
  }();
  const auto& s = loaded.scenario;
  const auto generated = ingest::generate_scenario(s, loaded.truth);

  std::filesystem::create_directories(out_dir);
  std::string stream;
  for (const auto& frame : generated.stream) {
    stream += ingest::serialize_detection_frame(frame);
    stream += '\n';
  }
  analytics::write_file(out_dir / "stream.ndjson", stream);
  slots::save_slot_map_file(s.map, out_dir / "slots.json");
  analytics::write_file(out_dir / "truth.log", analytics::serialize_log(generated.truth));

  std::string ids = "[";
  for (std::size_t i = 0; i < generated.ids.size(); ++i) {
    const auto& v = s.vehicles[generated.ids[i].vehicle_index];
    ids += (i ? ",\n " : "\n ");
    ids += "{\"vehicle\":" + std::to_string(generated.ids[i].vehicle_index) +
           ",\"vehicle_id\":" + std::to_string(generated.ids[i].vehicle_id) + ",\"entry\":" + std::to_string(v.entry) +
           ",\"exit\":" + std::to_string(v.exit) + ",\"target_slot\":" +
           (v.target_slot ? std::to_string(*v.target_slot) : std::string("null")) +
           ",\"dropped_frames\":" + std::to_string(generated.dropped[generated.ids[i].vehicle_index].size()) + "}";
  }
  ids += generated.ids.empty() ? "]\n" : "\n]\n";
  analytics::write_file(out_dir / "ids.json", ids);

  EngineConfig config;
  config.slot_map = "slots.json";
  config.log = "occupancy.log";
  config.fps = s.fps;
  config.start_timestamp_ms = s.start_timestamp_ms;
  config.tracker.n_init = loaded.truth.n_init;
  if (loaded.truth.coast_frames > 0) config.tracker.max_age = loaded.truth.coast_frames;
  analytics::write_file(out_dir / "config.json", config_document(config));

  io.out << "wrote " << generated.stream.size() << " frames, " << s.vehicles.size() << " vehicles, "
         << s.map.size() << " slots to " << out_dir.string() << '\n';
  return kExitOk;
}

int cli_main(const std::vector<std::string>& args, Io io) {
  if (!configure_logging()) {
    io.err << "PARKLOT_LOG_LEVEL must be one of error, warn, info, debug\n";
    return kExitUsage;
  }

  CLI::App app{"Parking-lot occupancy engine", "parklot"};
  app.require_subcommand(1);

  const auto keys = config_keys();
  auto add_overrides = [&](CLI::App* sub, std::map<std::string, std::string>& values) {
    for (const auto& key : keys) {
      sub->add_option("--" + key, values[key], "override " + key)->group("Config overrides");
    }
  };
  auto collect = [&](CLI::App* sub, std::map<std::string, std::string>& values) {
    std::vector<Override> out;
    for (const auto& key : keys) {
      if (sub->count("--" + key) > 0) out.emplace_back(key, values[key]);
    }
    return out;
  };

  RunArgs run;
  std::map<std::string, std::string> run_values;
  auto* run_cmd = app.add_subcommand("run", "Track detections, assign slots and append the occupancy log");
  run_cmd->add_option("--config", run.config, "Engine config (JSON)")->required();
  run_cmd->add_option("--input", run.input, "Detection stream file, or - for standard input");
  add_overrides(run_cmd, run_values);

  AnalyzeArgs analyze;
  std::string slots_path;
  double overstay = 0;
  auto* analyze_cmd = app.add_subcommand("analyze", "Compute analytics from an occupancy log");
  analyze_cmd->add_option("--log", analyze.log, "Occupancy log")->required();
  analyze_cmd->add_option("--out", analyze.out_dir, "Output directory")->required();
  analyze_cmd->add_option("--formats", analyze.formats, "Comma-separated list of csv, json, svg");
  analyze_cmd->add_option("--slots", slots_path, "Slot map (slot ids and svg geometry)");
  analyze_cmd->add_option("--overstay", overstay, "Also list stays longer than this many seconds");

  ServeArgs serve;
  std::map<std::string, std::string> serve_values;
  std::string replay_path, port_file;
  double replay_rate = -1;
  auto* serve_cmd = app.add_subcommand("serve", "Run or replay the pipeline and serve the live event stream");
  serve_cmd->add_option("--config", serve.run.config, "Engine config (JSON)")->required();
  serve_cmd->add_option("--input", serve.run.input, "Detection stream file, or - for standard input");
  serve_cmd->add_option("--replay", replay_path, "Replay a recorded occupancy log instead of running");
  serve_cmd->add_option("--replay-rate", replay_rate, "Replay frames per second (0 = unpaced; default log fps)");
  serve_cmd->add_option("--port-file", port_file, "Write the bound port to this file");
  serve_cmd->add_flag("--exit-when-done", serve.exit_when_done, "Exit once the stream ends");
  add_overrides(serve_cmd, serve_values);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate-slots", "Validate a slot-map file");
  validate_cmd->add_option("map", validate_path, "Slot-map JSON")->required();

  std::string spec_path, synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario with ground truth");
  synth_cmd->add_option("--spec", spec_path, "Scenario spec (JSON)")->required();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, io.out, io.err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) {
      run.overrides = collect(run_cmd, run_values);
      return run_command(run, io);
    }
    if (*serve_cmd) {
      serve.run.overrides = collect(serve_cmd, serve_values);
      if (!replay_path.empty()) serve.replay = replay_path;
      if (replay_rate >= 0) serve.replay_rate = replay_rate;
      if (!port_file.empty()) serve.port_file = port_file;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      return serve_command(serve, io);
    }
    if (*analyze_cmd) {
      if (!slots_path.empty()) analyze.slots = slots_path;
      if (analyze_cmd->count("--overstay") > 0) analyze.overstay_seconds = overstay;
      return analyze_command(analyze, io);
    }
    if (*validate_cmd) return validate_slots_command(validate_path, io);
    if (*synth_cmd) return synth_command(spec_path, synth_out, io);
  } catch (const StorageError& e) {
    io.err << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    io.err << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    io.err << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    io.err << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv, Io io) {
  std::vector<std::string> args(argv, argv + argc);
  return cli_main(args, io);
}

}  // namespace parklot::engine
