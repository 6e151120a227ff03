#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "parklot/error.hpp"
#include "parklot/ingest/scenario.hpp"
#include "parklot/occupancy/occupancy.hpp"

using namespace parklot::occupancy;
using parklot::geometry::Point;
using parklot::slots::Slot;
using parklot::slots::SlotMap;

namespace {

Slot square(SlotId id, double x, double y, double s) {
  std::vector<Point> v{{x, y}, {x + s, y}, {x + s, y + s}, {x, y + s}, {x, y}};
  return Slot{id, parklot::geometry::make_polygon(v), std::nullopt};
}

SlotMap row_of(int n) {
  std::vector<Slot> slots;
  for (int i = 0; i < n; ++i) slots.push_back(square(static_cast<SlotId>(i), 20.0 * i, 0, 10));
  return SlotMap(20.0 * n, 20, slots);
}

OccupancyFrame frame_of(std::uint64_t index, std::vector<SlotState> entries) {
  OccupancyFrame f;
  f.frame_index = index;
  f.entries = std::move(entries);
  return f;
}

}  // namespace

TEST(AssignFrame, VehicleInsideSlotThree) {
  const auto map = row_of(10);
  std::vector<VehicleObservation> v{{42, {65, 5}}};
  const auto r = assign_frame(v, map, 0, std::nullopt);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(r.frame.entries[i], (i == 3 ? SlotState{true, 42} : SlotState{false, 0}));
  }
  EXPECT_TRUE(r.frame.unassigned.empty());
}

TEST(AssignFrame, VehicleInLaneIsUnassigned) {
  const auto map = row_of(10);
  std::vector<VehicleObservation> v{{5, {65, 15}}};
  const auto r = assign_frame(v, map, 3, 1000);
  EXPECT_EQ(summarize(r.frame).occupied_count, 0u);
  EXPECT_EQ(r.frame.unassigned, std::vector<VehicleId>{5});
  EXPECT_EQ(r.frame.timestamp_ms, 1000);
}

TEST(AssignFrame, ConflictKeepsLowerId) {
  const auto map = row_of(2);
  std::vector<VehicleObservation> v{{9, {4, 4}}, {3, {6, 6}}};
  const auto r = assign_frame(v, map, 1, std::nullopt);
  EXPECT_EQ(r.frame.entries[0], (SlotState{true, 3}));
  ASSERT_EQ(r.conflicts.size(), 1u);
  EXPECT_EQ(r.conflicts[0].holder, 3u);
  EXPECT_EQ(r.conflicts[0].rejected, 9u);
  EXPECT_EQ(r.frame.unassigned, std::vector<VehicleId>{9});
}

TEST(AssignFrame, RejectsDuplicateIds) {
  const auto map = row_of(2);
  std::vector<VehicleObservation> v{{4, {4, 4}}, {4, {24, 4}}};
  EXPECT_THROW(assign_frame(v, map, 0, std::nullopt), parklot::ValidationError);
}

TEST(AssignFrame, OverlappingSlotsFirstByIdWins) {
  const SlotMap map(100, 100, {square(5, 0, 0, 10), square(2, 5, 0, 10)});
  std::vector<VehicleObservation> v{{1, {7, 5}}};
  const auto r = assign_frame(v, map, 0, std::nullopt);
  EXPECT_EQ(r.frame.entries[0], (SlotState{true, 1}));
  EXPECT_EQ(r.frame.entries[1], (SlotState{false, 0}));
}

TEST(AssignFrame, MatchesBruteForceOracle) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> pos(0, 200);
  for (int round = 0; round < 50; ++round) {
    // 20 disjoint random star slots on a 5 x 4 grid of cells.
    std::vector<Slot> slots;
    std::vector<std::vector<oracle::P>> rings;
    for (int k = 0; k < 20; ++k) {
      const double cx = 20 + 40 * (k % 5);
      const double cy = 25 + 50 * (k / 5);
      auto ring = oracle::random_star_polygon(rng, 8, cx, cy, 18);
      std::vector<Point> v;
      for (auto p : ring) v.push_back({p.x, p.y});
      v.push_back(v.front());
      slots.push_back({static_cast<SlotId>(k), parklot::geometry::make_polygon(v), std::nullopt});
      rings.push_back(ring);
    }
    const SlotMap map(200, 200, slots);
    std::vector<VehicleObservation> vehicles;
    for (VehicleId id = 1; id <= 30; ++id) vehicles.push_back({id * 7 % 31, {pos(rng), pos(rng)}});
    const auto r = assign_frame(vehicles, map, 0, std::nullopt);

    // Every (vehicle, slot) containment without early stop, then the ordering rule.
    std::vector<SlotState> expected(20);
    std::set<VehicleId> placed;
    auto sorted = vehicles;
    std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.id < b.id; });
    for (const auto& v : sorted) {
      std::vector<int> containing;
      for (int k = 0; k < 20; ++k) {
        if (oracle::inside({v.center.x, v.center.y}, rings[k])) containing.push_back(k);
      }
      if (!containing.empty() && !expected[containing.front()].occupied) {
        expected[containing.front()] = {true, v.id};
        placed.insert(v.id);
      }
    }
    ASSERT_EQ(r.frame.entries, expected) << "round " << round;
    for (auto id : r.frame.unassigned) ASSERT_EQ(placed.count(id), 0u);
    ASSERT_EQ(r.frame.unassigned.size() + placed.size(), vehicles.size());
  }
}

TEST(AssignFrame, VehicleAppearsAtMostOnceAndDeterministic) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> pos(0, 120);
  // Heavily overlapping slots.
  std::vector<Slot> slots;
  for (int k = 0; k < 12; ++k) slots.push_back(square(static_cast<SlotId>(k), 8.0 * k, 10, 40));
  const SlotMap map(200, 200, slots);
  for (int round = 0; round < 200; ++round) {
    std::vector<VehicleObservation> vehicles;
    for (VehicleId id = 1; id <= 10; ++id) vehicles.push_back({id, {pos(rng), pos(rng) / 2}});
    const auto a = assign_frame(vehicles, map, 0, std::nullopt);
    std::reverse(vehicles.begin(), vehicles.end());
    const auto b = assign_frame(vehicles, map, 0, std::nullopt);
    ASSERT_EQ(a.frame, b.frame);
    std::set<VehicleId> seen;
    for (const auto& e : a.frame.entries) {
      if (e.occupied) ASSERT_TRUE(seen.insert(e.vehicle_id).second);
    }
  }
}

TEST(AssignFrame, DisjointMapsIndependentOfScanOrder) {
  // Relabelling slot ids changes the scan order but not which polygon a
  // vehicle lands in when slots are disjoint.
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> pos(0, 200);
  std::vector<Slot> forward;
  std::vector<Slot> backward;
  for (int k = 0; k < 10; ++k) {
    forward.push_back(square(static_cast<SlotId>(k), 20.0 * k, 0, 15));
    backward.push_back(square(static_cast<SlotId>(9 - k), 20.0 * k, 0, 15));
  }
  const SlotMap a(200, 20, forward);
  const SlotMap b(200, 20, backward);
  for (int round = 0; round < 200; ++round) {
    std::vector<VehicleObservation> vehicles;
    for (VehicleId id = 1; id <= 6; ++id) vehicles.push_back({id, {pos(rng), pos(rng) / 10}});
    const auto ra = assign_frame(vehicles, a, 0, std::nullopt).frame;
    const auto rb = assign_frame(vehicles, b, 0, std::nullopt).frame;
    for (int k = 0; k < 10; ++k) ASSERT_EQ(ra.entries[k], rb.entries[9 - k]);
  }
}

TEST(DiffFrames, Examples) {
  const auto a = frame_of(0, {{false, 0}, {true, 7}, {false, 0}, {false, 0}, {false, 0}, {false, 0}});
  auto b = a;
  b.frame_index = 1;
  EXPECT_TRUE(diff_frames(a, b).empty());
  b.entries[5] = {true, 12};
  EXPECT_EQ(diff_frames(a, b), (std::vector<OccupancyEvent>{{1, 5, EventKind::Occupied, 12}}));
  b.entries[1] = {false, 0};
  const auto events = diff_frames(a, b);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0], (OccupancyEvent{1, 1, EventKind::Freed, 7}));
}

TEST(DiffFrames, VehicleSwapWithinOneFrameGap) {
  const auto map = row_of(4);
  std::vector<VehicleObservation> before{{7, {45, 5}}};
  std::vector<VehicleObservation> after{{9, {44, 6}}};
  const auto f0 = assign_frame(before, map, 10, std::nullopt).frame;
  const auto f1 = assign_frame(after, map, 11, std::nullopt).frame;
  EXPECT_EQ(diff_frames(f0, f1), (std::vector<OccupancyEvent>{{11, 2, EventKind::VehicleChanged, 9}}));
}

TEST(DiffFrames, RejectsMismatchAndOrdering) {
  const auto a = frame_of(3, {{false, 0}});
  EXPECT_THROW(diff_frames(a, frame_of(4, {{false, 0}, {false, 0}})), parklot::Error);
  EXPECT_THROW(diff_frames(a, frame_of(3, {{false, 0}})), parklot::Error);
}

TEST(DiffFrames, UsesSlotIds) {
  const std::vector<SlotId> ids{4, 9};
  const auto events = diff_frames(frame_of(0, {{false, 0}, {false, 0}}), frame_of(1, {{false, 0}, {true, 3}}), ids);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].slot_id, 9u);
}

TEST(DiffFrames, FoldingEventsReconstructsFrames) {
  std::mt19937_64 rng(44);
  std::uniform_int_distribution<int> occupant(0, 4);
  std::vector<OccupancyFrame> frames;
  for (std::uint64_t f = 0; f < 500; ++f) {
    std::vector<SlotState> entries;
    for (int s = 0; s < 8; ++s) {
      const int v = occupant(rng) < 2 ? 0 : occupant(rng) + 1;
      entries.push_back(v == 0 ? SlotState{} : SlotState{true, static_cast<VehicleId>(v)});
    }
    frames.push_back(frame_of(f * 2, entries));
  }
  auto state = apply_events(empty_frame(8), initial_events(frames[0]), frames[0].frame_index);
  ASSERT_EQ(state.entries, frames[0].entries);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    state = apply_events(state, diff_frames(frames[i - 1], frames[i]), frames[i].frame_index);
    ASSERT_EQ(state.entries, frames[i].entries) << "frame " << i;
  }
}

TEST(EventKind, Names) {
  EXPECT_EQ(to_string(EventKind::VehicleChanged), "VehicleChanged");
  EXPECT_EQ(parse_event_kind("Freed"), EventKind::Freed);
  EXPECT_FALSE(parse_event_kind("freed").has_value());
}

TEST(Summarize, AllFreeAndAllOccupied) {
  EXPECT_EQ(summarize(empty_frame(24, 5)), (FrameSummary{5, 0, 24, 24}));
  std::vector<SlotState> full(24, SlotState{true, 1});
  EXPECT_EQ(summarize(frame_of(0, full)), (FrameSummary{0, 24, 0, 24}));
}

TEST(Summarize, SevenParkedOfTwentyFour) {
  const auto map = parklot::ingest::make_layout(parklot::ingest::LayoutSpec{});
  parklot::ingest::Scenario scenario(map);
  scenario.frames = 10;
  for (SlotId id : {0u, 3u, 5u, 12u, 17u, 20u, 23u}) {
    parklot::ingest::ScriptedVehicle v;
    v.entry = 0;
    v.exit = 10;
    v.path = {{0, parklot::geometry::bbox_center(map.slots()[id].polygon.bounds())}};
    v.target_slot = id;
    scenario.vehicles.push_back(v);
  }
  const auto g = parklot::ingest::generate_scenario(scenario);
  EXPECT_EQ(summarize(g.truth.frames.at(4)), (FrameSummary{4, 7, 17, 24}));
}

TEST(OccupancyFrame, ValidateRejectsBrokenEntries) {
  EXPECT_THROW(frame_of(0, {{false, 3}}).validate(), parklot::ValidationError);
  EXPECT_THROW(frame_of(0, {{true, 0}}).validate(), parklot::ValidationError);
  EXPECT_NO_THROW(frame_of(0, {{true, 1}, {false, 0}}).validate());
}

TEST(Debouncer, ZeroDwellPassesThrough) {
  OccupancyDebouncer d(0);
  const auto f = frame_of(0, {{true, 2}});
  EXPECT_EQ(d.apply(f), f);
}

TEST(Debouncer, SuppressesShortFlicker) {
  OccupancyDebouncer d(3);
  const std::vector<int> raw{0, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 0};
  const std::vector<int> expected{0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto out = d.apply(frame_of(i, {raw[i] ? SlotState{true, 5} : SlotState{}}));
    EXPECT_EQ(out.entries[0].occupied, expected[i] == 1) << "frame " << i;
  }
}
