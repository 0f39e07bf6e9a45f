#pragma once

#include <optional>
#include <vector>

#include "cpageo/linalg.hpp"

namespace cpageo {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Convex, counterclockwise, no repeated vertices.
using Polygon = std::vector<Point2>;

double polygon_area(const Polygon& poly);
Point2 polygon_centroid(const Polygon& poly);

Polygon make_window_polygon(const Point2& center, double r);

// Oriented line {p : nx*x + ny*y = c} with unit normal (nx, ny).
struct Line2 {
  double nx = 0.0;
  double ny = 0.0;
  double c = 0.0;
};

// Normalizes (nx, ny, c) by the Euclidean norm of the normal; empty when the
// normal is shorter than zero_tol.
std::optional<Line2> normalize_line(double nx, double ny, double c,
                                    double zero_tol = 1e-12);

inline double signed_distance(const Line2& l, const Point2& p) {
  return l.nx * p.x + l.ny * p.y - l.c;
}

struct SplitTolerances {
  double snap = 1e-10;       // vertices closer than this are placed on the line
  double dedup = 1e-12;      // vertex deduplication distance
  double area_floor = 0.0;   // absolute; sides below it are not split off
};

struct SplitResult {
  bool crossed = false;     // both sides exceed the area floor
  bool sliver_merged = false;  // line touched the cell but a side was a sliver
  Polygon neg;
  Polygon pos;
};

// Split a convex polygon by a (normalized) line. When the line misses the
// interior, `crossed` is false and both output polygons are empty.
SplitResult split_polygon(const Polygon& poly, const Line2& line,
                          const SplitTolerances& tol);

// Keep the side where sign * signed_distance >= 0.
Polygon clip_halfplane(const Polygon& poly, const Line2& line, int sign,
                       const SplitTolerances& tol);

// Intersection of two convex polygons.
Polygon convex_clip(const Polygon& subject, const Polygon& clip,
                    const SplitTolerances& tol);

bool polygon_contains(const Polygon& poly, const Point2& p, double tol = 1e-12);

// Centroid plus midpoints toward distinct vertices; interior by convexity.
std::vector<Point2> interior_sample_points(const Polygon& poly, std::size_t k);

// Canonical vertex order (lexicographically smallest vertex first) and a
// strict total order on polygons, used for deterministic output.
Polygon canonical_polygon(const Polygon& poly);
bool polygon_less(const Polygon& a, const Polygon& b);

}  // namespace cpageo
