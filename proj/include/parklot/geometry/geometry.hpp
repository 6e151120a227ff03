#pragma once

// Planar geometry kernels shared by tracking and occupancy.
//
// Everything is double-precision image pixels on the ground plane; the
// vertical coordinate is implicitly zero and never stored.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace parklot::geometry {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned box in corner form. Valid boxes are finite with
/// x_min < x_max and y_min < y_max.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }
  bool valid() const noexcept;

  static BoundingBox from_center_size(Point center, double width, double height) noexcept;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// A validated simple closed polygon. The vertex list always repeats the
/// first vertex at the end. Only `validate_polygon` / `make_polygon` build one.
class Polygon {
public:
  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  std::size_t edge_count() const noexcept { return vertices_.size() - 1; }
  /// Axis-aligned bounds of the vertices.
  const BoundingBox& bounds() const noexcept { return bounds_; }
  /// Shoelace area, positive for counter-clockwise rings (y up).
  double signed_area() const noexcept;

  friend bool operator==(const Polygon& a, const Polygon& b) { return a.vertices_ == b.vertices_; }

private:
  friend struct PolygonFactory;
  explicit Polygon(std::vector<Point> closed_vertices);

  std::vector<Point> vertices_;
  BoundingBox bounds_;
};

struct PolygonViolation {
  enum class Kind { NonFinite, TooFewVertices, NotClosed, DuplicateVertex, SelfIntersection, ZeroArea };

  Kind kind;
  std::size_t vertex_index;
  std::string detail;

  /// "vertex 3: self-intersection (edge 0 crosses edge 2)"
  std::string describe() const;
};

std::string_view to_string(PolygonViolation::Kind kind) noexcept;

using PolygonValidation = std::variant<Polygon, std::vector<PolygonViolation>>;

/// Checks every polygon invariant and returns either the polygon or all of
/// the violations found (never a partial result).
PolygonValidation validate_polygon(std::span<const Point> vertices);

/// Like `validate_polygon` but throws `ValidationError` listing every violation.
Polygon make_polygon(std::span<const Point> vertices);

/// Whether the horizontal half-line from `origin` toward +x crosses the closed
/// segment [seg_a, seg_b]. Half-open vertex rule: an endpoint lying exactly on
/// the ray's line counts only when it is the lower endpoint of the segment, so
/// horizontal segments never count and shared vertices are counted once.
bool ray_intersects_segment(Point origin, Point seg_a, Point seg_b) noexcept;

/// Crossing-parity containment test. Points exactly on an edge fall on either
/// side according to the half-open rule.
bool point_in_polygon(Point p, const Polygon& poly) noexcept;

/// Validates `vertices` first; throws `ValidationError` if they do not form a
/// valid polygon.
bool point_in_polygon(Point p, std::span<const Point> vertices);

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

Point bbox_center(const BoundingBox& b) noexcept;

/// Shoelace signed area of an implicitly or explicitly closed ring.
double signed_area(std::span<const Point> ring) noexcept;

/// Closed-segment intersection test, including touching and collinear overlap.
bool segments_intersect(Point p1, Point p2, Point q1, Point q2) noexcept;

/// Area of the intersection of two polygons' interiors.
double intersection_area(const Polygon& a, const Polygon& b);

/// Total length of boundary shared by the two polygons (collinear edge overlap).
double shared_boundary_length(const Polygon& a, const Polygon& b, double tolerance = 1e-9);

}  // namespace parklot::geometry
