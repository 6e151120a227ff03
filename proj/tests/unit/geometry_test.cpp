#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "parklot/error.hpp"
#include "parklot/geometry/geometry.hpp"

using namespace parklot::geometry;

namespace {

Polygon poly(std::vector<Point> v) { return make_polygon(v); }

Polygon square() { return poly({{0, 0}, {4, 0}, {4, 4}, {0, 4}, {0, 0}}); }

std::vector<Point> closed(const std::vector<oracle::P>& ring) {
  std::vector<Point> out;
  for (auto p : ring) out.push_back({p.x, p.y});
  out.push_back(out.front());
  return out;
}

std::vector<PolygonViolation::Kind> kinds(const PolygonValidation& v) {
  std::vector<PolygonViolation::Kind> out;
  if (auto* list = std::get_if<std::vector<PolygonViolation>>(&v)) {
    for (const auto& item : *list) out.push_back(item.kind);
  }
  return out;
}

bool has(const std::vector<PolygonViolation::Kind>& list, PolygonViolation::Kind k) {
  return std::find(list.begin(), list.end(), k) != list.end();
}

}  // namespace

TEST(RayIntersectsSegment, VerticalSegmentAhead) { EXPECT_TRUE(ray_intersects_segment({0, 0}, {1, -1}, {1, 1})); }

TEST(RayIntersectsSegment, SegmentBehindOrigin) { EXPECT_FALSE(ray_intersects_segment({2, 0}, {1, -1}, {1, 1})); }

TEST(RayIntersectsSegment, RayAboveSegment) { EXPECT_FALSE(ray_intersects_segment({0, 2}, {1, -1}, {1, 1})); }

TEST(RayIntersectsSegment, HalfOpenVertexRule) {
  // Vertex on the ray counts only as the lower endpoint.
  EXPECT_TRUE(ray_intersects_segment({0, 0}, {1, 0}, {1, 1}));
  EXPECT_FALSE(ray_intersects_segment({0, 0}, {1, -1}, {1, 0}));
  EXPECT_FALSE(ray_intersects_segment({0, 0}, {1, 0}, {3, 0}));
}

TEST(PointInPolygon, SquareInteriorAndExterior) {
  EXPECT_TRUE(point_in_polygon({2, 2}, square()));
  EXPECT_FALSE(point_in_polygon({5, 2}, square()));
}

TEST(PointInPolygon, ConcaveNotchIsOutside) {
  const auto l = poly({{0, 0}, {4, 0}, {4, 2}, {2, 2}, {2, 4}, {0, 4}, {0, 0}});
  EXPECT_FALSE(point_in_polygon({3, 3}, l));
  EXPECT_TRUE(point_in_polygon({1, 3}, l));
  EXPECT_TRUE(point_in_polygon({3, 1}, l));
}

TEST(PointInPolygon, RayThroughVertexCountsOnce) {
  const auto diamond = poly({{2, 0}, {4, 2}, {2, 4}, {0, 2}, {2, 0}});
  EXPECT_TRUE(point_in_polygon({1, 2}, diamond));
  EXPECT_FALSE(point_in_polygon({-1, 2}, diamond));
  EXPECT_FALSE(point_in_polygon({5, 2}, diamond));
}

TEST(PointInPolygon, UnvalidatedVerticesThrow) {
  std::vector<Point> open{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  EXPECT_THROW(point_in_polygon({1, 1}, std::span<const Point>(open)), parklot::ValidationError);
}

TEST(PointInPolygon, AgreesWithWindingOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-12, 12);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto ring = oracle::random_star_polygon(rng, 12);
    const auto polygon = poly(closed(ring));
    const oracle::P p{coord(rng), coord(rng)};
    if (oracle::boundary_distance(p, ring) <= 1e-9) continue;
    ASSERT_EQ(point_in_polygon({p.x, p.y}, polygon), oracle::inside(p, ring)) << "case " << i;
    ++checked;
  }
  EXPECT_GT(checked, 1900);
}

TEST(PointInPolygon, InvariantUnderRotationAndReversal) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> coord(-12, 12);
  for (int i = 0; i < 300; ++i) {
    auto ring = oracle::random_star_polygon(rng, 10);
    const oracle::P p{coord(rng), coord(rng)};
    if (oracle::boundary_distance(p, ring) <= 1e-9) continue;
    const bool expected = point_in_polygon({p.x, p.y}, poly(closed(ring)));
    for (std::size_t r = 1; r < ring.size(); ++r) {
      auto rotated = ring;
      std::rotate(rotated.begin(), rotated.begin() + static_cast<long>(r), rotated.end());
      ASSERT_EQ(point_in_polygon({p.x, p.y}, poly(closed(rotated))), expected);
    }
    auto reversed = ring;
    std::reverse(reversed.begin(), reversed.end());
    ASSERT_EQ(point_in_polygon({p.x, p.y}, poly(closed(reversed))), expected);
  }
}

TEST(PointInPolygon, ParityStableUnderTinyVertexPerturbation) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> grid(-5, 5);
  std::bernoulli_distribution coin(0.5);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    // Integer grids make rays pass exactly through vertices.
    std::vector<oracle::P> ring{{-6, -6}, {6, -6}, {6, 6}, {static_cast<double>(grid(rng)), 0}, {-6, 6}};
    const oracle::P p{static_cast<double>(grid(rng)), static_cast<double>(grid(rng))};
    if (oracle::boundary_distance(p, ring) <= 1e-6) continue;
    const bool exact = point_in_polygon({p.x, p.y}, poly(closed(ring)));
    auto jittered = ring;
    for (auto& v : jittered) v.y += coin(rng) ? 1e-12 : -1e-12;
    ASSERT_EQ(point_in_polygon({p.x, p.y}, poly(closed(jittered))), exact) << "case " << i;
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(Iou, Examples) {
  const BoundingBox a{0, 0, 2, 2};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 1, 1}, {5, 5, 6, 6}), 0.0);
  EXPECT_NEAR(iou(a, {1, 0, 3, 2}), 1.0 / 3.0, 1e-12);
}

TEST(Iou, MatchesRasterizedAreas) {
  const BoundingBox a{0, 0, 2, 2};
  const BoundingBox b{1, 0, 3, 2};
  const std::vector<oracle::P> ra{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const std::vector<oracle::P> rb{{1, 0}, {3, 0}, {3, 2}, {1, 2}};
  const double inter = oracle::raster_intersection_area(ra, rb, 0, 0, 3, 2, 600);
  EXPECT_NEAR(iou(a, b), inter / (4 + 4 - inter), 1e-3);
}

TEST(Iou, SymmetricBoundedTranslationInvariant) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> pos(-50, 50);
  std::uniform_real_distribution<double> size(0.5, 30);
  for (int i = 0; i < 1000; ++i) {
    const auto a = BoundingBox::from_center_size({pos(rng), pos(rng)}, size(rng), size(rng));
    const auto b = BoundingBox::from_center_size({pos(rng) / 4, pos(rng) / 4}, size(rng), size(rng));
    const double v = iou(a, b);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_DOUBLE_EQ(v, iou(b, a));
    ASSERT_NEAR(iou(a, a), 1.0, 1e-12);
    const double dx = pos(rng);
    const double dy = pos(rng);
    const BoundingBox ta{a.x_min + dx, a.y_min + dy, a.x_max + dx, a.y_max + dy};
    const BoundingBox tb{b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy};
    ASSERT_NEAR(iou(ta, tb), v, 1e-9);
  }
}

TEST(BboxCenter, Examples) {
  EXPECT_EQ(bbox_center({0, 0, 4, 2}), (Point{2, 1}));
  EXPECT_EQ(bbox_center({-2, -2, 2, 2}), (Point{0, 0}));
  EXPECT_EQ(bbox_center({10, 20, 11, 21}), (Point{10.5, 20.5}));
}

TEST(BboxCenter, LiesInsideBox) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> pos(-1e4, 1e4);
  std::uniform_real_distribution<double> size(1e-3, 500);
  for (int i = 0; i < 1000; ++i) {
    const double x = pos(rng);
    const double y = pos(rng);
    const BoundingBox b{x, y, x + size(rng), y + size(rng)};
    const auto c = bbox_center(b);
    ASSERT_GT(c.x, b.x_min);
    ASSERT_LT(c.x, b.x_max);
    ASSERT_GT(c.y, b.y_min);
    ASSERT_LT(c.y, b.y_max);
  }
}

TEST(BoundingBox, CenterSizeRoundTrip) {
  const auto b = BoundingBox::from_center_size({10, 20}, 4, 6);
  EXPECT_EQ(b, (BoundingBox{8, 17, 12, 23}));
  EXPECT_TRUE(b.valid());
  EXPECT_FALSE((BoundingBox{1, 0, 1, 2}).valid());
}

TEST(ValidatePolygon, SquareIsValid) {
  std::vector<Point> v{{0, 0}, {4, 0}, {4, 4}, {0, 4}, {0, 0}};
  EXPECT_TRUE(std::holds_alternative<Polygon>(validate_polygon(v)));
}

TEST(ValidatePolygon, OpenRingIsNotClosed) {
  std::vector<Point> v{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  EXPECT_TRUE(has(kinds(validate_polygon(v)), PolygonViolation::Kind::NotClosed));
}

TEST(ValidatePolygon, BowTieSelfIntersects) {
  std::vector<Point> v{{0, 0}, {4, 4}, {4, 0}, {0, 4}, {0, 0}};
  const auto result = validate_polygon(v);
  EXPECT_TRUE(has(kinds(result), PolygonViolation::Kind::SelfIntersection));
  const auto& list = std::get<std::vector<PolygonViolation>>(result);
  EXPECT_NE(list.front().describe().find("vertex"), std::string::npos);
}

TEST(ValidatePolygon, BowTieAgreesWithPairwiseOracle) {
  // Brute-force pairwise check of non-adjacent edges with orientation tests.
  auto crosses = [](oracle::P a, oracle::P b, oracle::P c, oracle::P d) {
    const double d1 = oracle::is_left(c, d, a);
    const double d2 = oracle::is_left(c, d, b);
    const double d3 = oracle::is_left(a, b, c);
    const double d4 = oracle::is_left(a, b, d);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
  };
  std::mt19937_64 rng(16);
  std::uniform_int_distribution<int> coord(0, 6);
  for (int i = 0; i < 500; ++i) {
    std::vector<oracle::P> ring;
    for (int k = 0; k < 5; ++k) ring.push_back({static_cast<double>(coord(rng)), static_cast<double>(coord(rng))});
    bool proper_cross = false;
    for (std::size_t e = 0; e < ring.size(); ++e) {
      for (std::size_t f = e + 2; f < ring.size(); ++f) {
        if (e == 0 && f == ring.size() - 1) continue;
        proper_cross = proper_cross || crosses(ring[e], ring[(e + 1) % 5], ring[f], ring[(f + 1) % 5]);
      }
    }
    const auto result = validate_polygon(closed(ring));
    if (proper_cross) {
      ASSERT_TRUE(has(kinds(result), PolygonViolation::Kind::SelfIntersection)) << "case " << i;
    }
  }
}

TEST(ValidatePolygon, ReportsEveryViolation) {
  std::vector<Point> v{{0, 0}, {0, 0}, {4, 4}, {4, 0}, {0, 4}};
  const auto k = kinds(validate_polygon(v));
  EXPECT_TRUE(has(k, PolygonViolation::Kind::NotClosed));
  EXPECT_TRUE(has(k, PolygonViolation::Kind::DuplicateVertex));
}

TEST(ValidatePolygon, DegenerateRings) {
  std::vector<Point> line{{0, 0}, {1, 1}, {2, 2}, {0, 0}};
  EXPECT_TRUE(has(kinds(validate_polygon(line)), PolygonViolation::Kind::ZeroArea));
  std::vector<Point> tiny{{0, 0}, {1, 0}, {0, 0}};
  EXPECT_TRUE(has(kinds(validate_polygon(tiny)), PolygonViolation::Kind::TooFewVertices));
  std::vector<Point> nan{{0, 0}, {1, 0}, {std::nan(""), 1}, {0, 0}};
  EXPECT_TRUE(has(kinds(validate_polygon(nan)), PolygonViolation::Kind::NonFinite));
}

TEST(ValidatePolygon, RandomStarPolygonsAreValid) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    const auto v = closed(oracle::random_star_polygon(rng, 12));
    ASSERT_TRUE(std::holds_alternative<Polygon>(validate_polygon(v))) << "case " << i;
  }
}

TEST(PolygonArea, IntersectionMatchesRaster) {
  std::mt19937_64 rng(18);
  for (int i = 0; i < 20; ++i) {
    const auto a = oracle::random_star_polygon(rng, 8, 0, 0, 5);
    const auto b = oracle::random_star_polygon(rng, 8, 2, 1, 5);
    const double expected = oracle::raster_intersection_area(a, b, -6, -6, 8, 7, 700);
    EXPECT_NEAR(intersection_area(poly(closed(a)), poly(closed(b))), expected, 0.05) << "case " << i;
  }
}

TEST(PolygonArea, SharedEdgeLength) {
  const auto a = square();
  const auto b = poly({{4, 0}, {8, 0}, {8, 4}, {4, 4}, {4, 0}});
  const auto c = poly({{4, 2}, {8, 2}, {8, 6}, {4, 6}, {4, 2}});
  EXPECT_NEAR(shared_boundary_length(a, b), 4.0, 1e-12);
  EXPECT_NEAR(shared_boundary_length(a, c), 2.0, 1e-12);
  EXPECT_NEAR(intersection_area(a, b), 0.0, 1e-12);
  EXPECT_NEAR(square().signed_area(), 16.0, 1e-12);
}
