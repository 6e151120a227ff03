#include "parklot/geometry/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parklot/error.hpp"

namespace parklot::geometry {

namespace {

double cross(Point o, Point a, Point b) noexcept {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int orientation(Point o, Point a, Point b) noexcept {
  const double c = cross(o, a, b);
  return (c > 0.0) - (c < 0.0);
}

bool finite(Point p) noexcept { return std::isfinite(p.x) && std::isfinite(p.y); }

// Assumes o, a, b collinear.
bool on_segment(Point a, Point b, Point p) noexcept {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

BoundingBox bounds_of(std::span<const Point> pts) noexcept {
  BoundingBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : pts) {
    b.x_min = std::min(b.x_min, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.x_max = std::max(b.x_max, p.x);
    b.y_max = std::max(b.y_max, p.y);
  }
  return b;
}

// Sorted y-intervals of the polygon interior along the vertical line x = xv.
// xv must not coincide with any vertex x.
void interior_intervals(const Polygon& poly, double xv, std::vector<double>& ys) {
  ys.clear();
  const auto& v = poly.vertices();
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const Point a = v[i];
    const Point b = v[i + 1];
    if ((a.x < xv) == (b.x < xv)) continue;
    ys.push_back(a.y + (xv - a.x) * (b.y - a.y) / (b.x - a.x));
  }
  std::sort(ys.begin(), ys.end());
}

double overlap_length(const std::vector<double>& a, const std::vector<double>& b) {
  double total = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i + 1 < a.size() && j + 1 < b.size()) {
    const double lo = std::max(a[i], b[j]);
    const double hi = std::min(a[i + 1], b[j + 1]);
    if (hi > lo) total += hi - lo;
    if (a[i + 1] < b[j + 1]) {
      i += 2;
    } else {
      j += 2;
    }
  }
  return total;
}

}  // namespace

bool BoundingBox::valid() const noexcept {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) && std::isfinite(y_max) &&
         x_min < x_max && y_min < y_max;
}

BoundingBox BoundingBox::from_center_size(Point center, double width, double height) noexcept {
  return {center.x - width / 2.0, center.y - height / 2.0, center.x + width / 2.0, center.y + height / 2.0};
}

struct PolygonFactory {
  static Polygon make(std::vector<Point> closed) { return Polygon(std::move(closed)); }
};

Polygon::Polygon(std::vector<Point> closed_vertices)
    : vertices_(std::move(closed_vertices)), bounds_(bounds_of(vertices_)) {}

double Polygon::signed_area() const noexcept { return geometry::signed_area(vertices_); }

std::string_view to_string(PolygonViolation::Kind kind) noexcept {
  switch (kind) {
    case PolygonViolation::Kind::NonFinite: return "non-finite coordinate";
    case PolygonViolation::Kind::TooFewVertices: return "too few vertices";
    case PolygonViolation::Kind::NotClosed: return "not closed";
    case PolygonViolation::Kind::DuplicateVertex: return "duplicate consecutive vertex";
    case PolygonViolation::Kind::SelfIntersection: return "self-intersection";
    case PolygonViolation::Kind::ZeroArea: return "zero area";
  }
  return "unknown";
}

std::string PolygonViolation::describe() const {
  std::string out = "vertex " + std::to_string(vertex_index) + ": " + std::string(to_string(kind));
  if (!detail.empty()) out += " (" + detail + ")";
  return out;
}

double signed_area(std::span<const Point> ring) noexcept {
  if (ring.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point a = ring[i];
    const Point b = ring[(i + 1) % ring.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return twice / 2.0;
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) noexcept {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

PolygonValidation validate_polygon(std::span<const Point> vertices) {
  using Kind = PolygonViolation::Kind;
  std::vector<PolygonViolation> violations;

  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!finite(vertices[i])) violations.push_back({Kind::NonFinite, i, {}});
  }
  if (!violations.empty()) return violations;

  if (vertices.size() < 4) {
    violations.push_back({Kind::TooFewVertices, vertices.size(),
                          "need at least 4 including the closing vertex, got " + std::to_string(vertices.size())});
  }
  const bool closed = !vertices.empty() && vertices.front() == vertices.back();
  if (!vertices.empty() && !closed) {
    violations.push_back({Kind::NotClosed, vertices.size() - 1, "last vertex differs from first"});
  }
  for (std::size_t i = 0; i + 1 < vertices.size(); ++i) {
    if (vertices[i] == vertices[i + 1]) violations.push_back({Kind::DuplicateVertex, i + 1, {}});
  }

  // Distinct ring (without closure, without consecutive repeats) for the
  // geometric checks, keeping original indices for reporting.
  std::vector<Point> ring;
  std::vector<std::size_t> index;
  const std::size_t open_size = closed ? vertices.size() - 1 : vertices.size();
  for (std::size_t i = 0; i < open_size; ++i) {
    if (!ring.empty() && ring.back() == vertices[i]) continue;
    ring.push_back(vertices[i]);
    index.push_back(i);
  }
  while (ring.size() > 1 && ring.back() == ring.front()) {
    ring.pop_back();
    index.pop_back();
  }

  if (ring.size() < 3) {
    if (vertices.size() >= 4) {
      violations.push_back({Kind::TooFewVertices, vertices.size(),
                            "only " + std::to_string(ring.size()) + " distinct vertices"});
    }
    return violations;
  }

  const std::size_t m = ring.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point a1 = ring[i];
    const Point a2 = ring[(i + 1) % m];
    for (std::size_t j = i + 1; j < m; ++j) {
      const Point b1 = ring[j];
      const Point b2 = ring[(j + 1) % m];
      const bool next = j == i + 1;
      const bool wrap = i == 0 && j == m - 1;
      bool bad = false;
      if (next || wrap) {
        // Adjacent edges share exactly one vertex; they are only invalid when
        // they fold back over each other.
        const Point shared = next ? a2 : a1;
        const Point u = next ? a1 : a2;
        const Point w = next ? b2 : b1;
        bad = orientation(shared, u, w) == 0 &&
              (u.x - shared.x) * (w.x - shared.x) + (u.y - shared.y) * (w.y - shared.y) > 0.0;
      } else {
        bad = segments_intersect(a1, a2, b1, b2);
      }
      if (bad) {
        violations.push_back({Kind::SelfIntersection, index[i],
                              "edge " + std::to_string(index[i]) + " meets edge " + std::to_string(index[j])});
      }
    }
  }

  const double area = std::abs(signed_area(ring));
  const BoundingBox box = bounds_of(ring);
  const double scale = std::max(1.0, box.width() * box.height());
  if (!(area > 1e-12 * scale)) {
    violations.push_back({Kind::ZeroArea, 0, "area " + std::to_string(area)});
  }

  if (!violations.empty()) return violations;
  return PolygonFactory::make(std::vector<Point>(vertices.begin(), vertices.end()));
}

Polygon make_polygon(std::span<const Point> vertices) {
  auto result = validate_polygon(vertices);
  if (auto* violations = std::get_if<std::vector<PolygonViolation>>(&result)) {
    std::vector<std::string> messages;
    for (const auto& v : *violations) messages.push_back(v.describe());
    throw ValidationError(std::move(messages));
  }
  return std::get<Polygon>(std::move(result));
}

bool ray_intersects_segment(Point origin, Point seg_a, Point seg_b) noexcept {
  const bool a_above = seg_a.y > origin.y;
  const bool b_above = seg_b.y > origin.y;
  if (a_above == b_above) return false;
  const Point lo = a_above ? seg_b : seg_a;
  const Point hi = a_above ? seg_a : seg_b;
  // The crossing lies strictly to the right of the origin iff the origin is
  // strictly left of the upward edge lo -> hi.
  return cross(lo, hi, origin) > 0.0;
}

bool point_in_polygon(Point p, const Polygon& poly) noexcept {
  const BoundingBox& b = poly.bounds();
  if (p.x > b.x_max || p.y < b.y_min || p.y > b.y_max) return false;
  const auto& v = poly.vertices();
  unsigned crossings = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (ray_intersects_segment(p, v[i], v[i + 1])) ++crossings;
  }
  return (crossings & 1U) != 0;
}

bool point_in_polygon(Point p, std::span<const Point> vertices) {
  return point_in_polygon(p, make_polygon(vertices));
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  const double inter = w * h;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Point bbox_center(const BoundingBox& b) noexcept {
  return {(b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0};
}

double intersection_area(const Polygon& a, const Polygon& b) {
  const BoundingBox& ba = a.bounds();
  const BoundingBox& bb = b.bounds();
  if (ba.x_max <= bb.x_min || bb.x_max <= ba.x_min || ba.y_max <= bb.y_min || bb.y_max <= ba.y_min) return 0.0;

  // Slab decomposition: between consecutive event abscissae (vertices and
  // edge crossings) every boundary is a non-crossing line, so the overlap
  // length at the slab midline times the slab width is exact.
  std::vector<double> xs;
  for (const auto& p : a.vertices()) xs.push_back(p.x);
  for (const auto& p : b.vertices()) xs.push_back(p.x);
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  for (std::size_t i = 0; i + 1 < va.size(); ++i) {
    for (std::size_t j = 0; j + 1 < vb.size(); ++j) {
      const Point p = va[i];
      const Point r{va[i + 1].x - p.x, va[i + 1].y - p.y};
      const Point q = vb[j];
      const Point s{vb[j + 1].x - q.x, vb[j + 1].y - q.y};
      const double denom = r.x * s.y - r.y * s.x;
      if (denom == 0.0) continue;
      const double t = ((q.x - p.x) * s.y - (q.y - p.y) * s.x) / denom;
      const double u = ((q.x - p.x) * r.y - (q.y - p.y) * r.x) / denom;
      if (t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0) xs.push_back(p.x + t * r.x);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  const double lo = std::max(ba.x_min, bb.x_min);
  const double hi = std::min(ba.x_max, bb.x_max);
  double area = 0.0;
  std::vector<double> ya;
  std::vector<double> yb;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double x0 = xs[k];
    const double x1 = xs[k + 1];
    if (x1 <= lo || x0 >= hi) continue;
    const double mid = (x0 + x1) / 2.0;
    interior_intervals(a, mid, ya);
    interior_intervals(b, mid, yb);
    area += overlap_length(ya, yb) * (x1 - x0);
  }
  return area;
}

double shared_boundary_length(const Polygon& a, const Polygon& b, double tolerance) {
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < va.size(); ++i) {
    const Point p = va[i];
    const double dx = va[i + 1].x - p.x;
    const double dy = va[i + 1].y - p.y;
    const double len = std::hypot(dx, dy);
    const double ux = dx / len;
    const double uy = dy / len;
    for (std::size_t j = 0; j + 1 < vb.size(); ++j) {
      const Point q1 = vb[j];
      const Point q2 = vb[j + 1];
      const double d1 = (q1.x - p.x) * uy - (q1.y - p.y) * ux;
      const double d2 = (q2.x - p.x) * uy - (q2.y - p.y) * ux;
      if (std::abs(d1) > tolerance || std::abs(d2) > tolerance) continue;
      const double t1 = (q1.x - p.x) * ux + (q1.y - p.y) * uy;
      const double t2 = (q2.x - p.x) * ux + (q2.y - p.y) * uy;
      const double overlap = std::min(len, std::max(t1, t2)) - std::max(0.0, std::min(t1, t2));
      if (overlap > 0.0) total += overlap;
    }
  }
  return total;
}

}  // namespace parklot::geometry
