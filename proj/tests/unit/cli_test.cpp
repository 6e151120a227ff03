#include <gtest/gtest.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include "oracles.hpp"
#include "parklot/analytics/occupancy_log.hpp"

#include <httplib.h>

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

// Runs the parklot executable through the shell.
Result cli(const oracle::TempDir& dir, const std::string& args, const std::string& env = "") {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "cd '" + dir.path().string() + "' && " + env + " '" PARKLOT_CLI "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, oracle::read_file(out), oracle::read_file(err)};
}

void synth(const oracle::TempDir& dir, const std::string& spec) {
  oracle::write_text(dir / "spec.json", spec);
  ASSERT_EQ(cli(dir, "synth --spec spec.json --out .").code, 0);
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  oracle::TempDir dir("cli");
  EXPECT_EQ(cli(dir, "--help").code, 0);
  EXPECT_EQ(cli(dir, "").code, 1);
  EXPECT_EQ(cli(dir, "analyze --log x.log").code, 1);
  const auto bad_env = cli(dir, "validate-slots none.json", "PARKLOT_LOG_LEVEL=loud");
  EXPECT_EQ(bad_env.code, 1);
  EXPECT_NE(bad_env.err.find("PARKLOT_LOG_LEVEL"), std::string::npos);
}

TEST(Cli, MissingSlotMapExitsNonzeroNamingPath) {
  oracle::TempDir dir("cli");
  oracle::write_text(dir / "config.json", R"({"slot_map":"nowhere.json","log":"o.log"})");
  const auto r = cli(dir, "run --config config.json --input /dev/null");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nowhere.json"), std::string::npos) << r.err;
}

TEST(Cli, ValidateSlotsOutputs) {
  oracle::TempDir dir("cli");
  synth(dir, R"({"seed":1,"frames":10})");
  const auto ok = cli(dir, "validate-slots slots.json");
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("OK, 24 slots"), std::string::npos);
  oracle::write_text(dir / "bow.json",
                     R"({"version":1,"frame_width":10,"frame_height":10,"reference_image":null,"slots":[{"slot_id":3,"polygon":[[0,0],[4,4],[4,0],[0,4],[0,0]]}]})");
  const auto bad = cli(dir, "validate-slots bow.json");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.out.find("slot 3"), std::string::npos);
  EXPECT_NE(bad.out.find("self-intersection"), std::string::npos);
}

TEST(Cli, FileAndPipeRunsGiveIdenticalLogs) {
  oracle::TempDir dir("cli");
  synth(dir, R"({"seed":4,"fps":30,"frames":1500,"traffic":{"vehicles":12},"truth":{"n_init":3,"coast_frames":30}})");
  ASSERT_EQ(cli(dir, "run --config config.json --input stream.ndjson --log file.log").code, 0);
  ASSERT_EQ(cli(dir, "run --config config.json --log pipe.log < stream.ndjson").code, 0);
  ASSERT_EQ(cli(dir, "run --config config.json --log cat.log", "cat stream.ndjson |").code, 0);
  const auto file = oracle::read_file(dir / "file.log");
  EXPECT_EQ(file, oracle::read_file(dir / "pipe.log"));
  EXPECT_EQ(file, oracle::read_file(dir / "cat.log"));
  EXPECT_EQ(file, oracle::read_file(dir / "truth.log"));
}

TEST(Cli, AnalyzeWritesRequestedFormats) {
  oracle::TempDir dir("cli");
  synth(dir, R"({"seed":5,"frames":600,"traffic":{"vehicles":6}})");
  ASSERT_EQ(cli(dir, "analyze --log truth.log --out out --formats csv,svg --slots slots.json").code, 0);
  for (const char* f : {"timeseries.csv", "slot_durations.csv", "slot_durations.svg", "slot_vehicle_counts.csv",
                        "slot_vehicle_counts.svg", "slot_stats.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / f)) << f;
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "out" / "timeseries.json"));
  const auto xml = cli(dir, "analyze --log truth.log --out out --formats xml");
  EXPECT_EQ(xml.code, 1);
  EXPECT_NE(xml.err.find("unsupported format"), std::string::npos);
  EXPECT_EQ(cli(dir, "analyze --log missing.log --out out").code, 1);
}

TEST(Cli, CorruptStreamIsDataError) {
  oracle::TempDir dir("cli");
  synth(dir, R"({"seed":6,"frames":50})");
  oracle::write_text(dir / "bad.ndjson", "{\"f\":0,\"t\":null,\"d\":[]}\n{\"f\":1,\"t\":null,\"d\":[{\"b\":[1,1,0,2],\"c\":\"Car\",\"p\":1}]}\n");
  const auto r = cli(dir, "run --config config.json --input bad.ndjson");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_EQ(parklot::analytics::read_log_file(dir / "occupancy.log").frames.size(), 1u);
}

TEST(Cli, ServeReplayStreamsAndExits) {
  oracle::TempDir dir("cli");
  synth(dir, R"({"seed":7,"fps":30,"frames":400,"traffic":{"vehicles":8}})");
  Result result{};
  std::thread server([&] {
    result = cli(dir, "serve --config config.json --replay truth.log --replay-rate 200 --serve.port 0 "
                      "--port-file port.txt --exit-when-done");
  });
  int port = 0;
  for (int i = 0; i < 100 && port == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    const auto text = oracle::read_file(dir / "port.txt");
    if (!text.empty() && text.back() == '\n') port = std::stoi(text);
  }
  ASSERT_NE(port, 0);
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(10, 0);
  std::string body;
  client.Get("/events", [&](const char* data, std::size_t len) {
    body.append(data, len);
    return true;
  });
  server.join();
  EXPECT_EQ(result.code, 0) << result.err;
  EXPECT_EQ(body.rfind("{\"type\":\"snapshot\"", 0), 0u);
  EXPECT_NE(body.find("{\"type\":\"end\",\"frame_index\":399}"), std::string::npos);
}

TEST(Cli, ServePortInUseFails) {
  oracle::TempDir dir("cli");
  synth(dir, R"({"seed":8,"frames":20})");
  httplib::Server blocker;
  const int port = blocker.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  const auto r = cli(dir, "serve --config config.json --replay truth.log --exit-when-done --serve.port " +
                              std::to_string(port));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("cannot bind"), std::string::npos) << r.err;
}
