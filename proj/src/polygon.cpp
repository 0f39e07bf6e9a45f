#include "cpageo/polygon.hpp"

#include <algorithm>
#include <cmath>

namespace cpageo {

// Area and centroid work in coordinates relative to the first vertex;
// tiny cells far from the origin would otherwise lose all their digits to
// cancellation.
double polygon_area(const Polygon& poly) {
  if (poly.size() < 3) return 0.0;
  const Point2 ref = poly[0];
  double s = 0.0;
  for (std::size_t i = 1, n = poly.size(); i + 1 < n; ++i) {
    const double ax = poly[i].x - ref.x, ay = poly[i].y - ref.y;
    const double bx = poly[i + 1].x - ref.x, by = poly[i + 1].y - ref.y;
    s += ax * by - bx * ay;
  }
  return 0.5 * s;
}

Point2 polygon_centroid(const Polygon& poly) {
  const Point2 ref = poly[0];
  double a6 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const double px = poly[i].x - ref.x, py = poly[i].y - ref.y;
    const double qx = poly[(i + 1) % n].x - ref.x, qy = poly[(i + 1) % n].y - ref.y;
    const double cross = px * qy - qx * py;
    a6 += cross;
    cx += (px + qx) * cross;
    cy += (py + qy) * cross;
  }
  if (a6 == 0.0) {  // degenerate; fall back to vertex mean
    Point2 m;
    for (const Point2& p : poly) {
      m.x += p.x;
      m.y += p.y;
    }
    m.x /= static_cast<double>(poly.size());
    m.y /= static_cast<double>(poly.size());
    return m;
  }
  return {ref.x + cx / (3.0 * a6), ref.y + cy / (3.0 * a6)};
}

Polygon make_window_polygon(const Point2& center, double r) {
  return {{center.x - r, center.y - r},
          {center.x + r, center.y - r},
          {center.x + r, center.y + r},
          {center.x - r, center.y + r}};
}

std::optional<Line2> normalize_line(double nx, double ny, double c, double zero_tol) {
  const double n = std::hypot(nx, ny);
  if (n <= zero_tol) return std::nullopt;
  return Line2{nx / n, ny / n, c / n};
}

namespace {

void push_dedup(Polygon& poly, const Point2& p, double dedup) {
  if (!poly.empty()) {
    const Point2& last = poly.back();
    if (std::fabs(last.x - p.x) <= dedup && std::fabs(last.y - p.y) <= dedup) return;
  }
  poly.push_back(p);
}

void close_dedup(Polygon& poly, double dedup) {
  while (poly.size() >= 2) {
    const Point2& first = poly.front();
    const Point2& last = poly.back();
    if (std::fabs(first.x - last.x) <= dedup && std::fabs(first.y - last.y) <= dedup)
      poly.pop_back();
    else
      break;
  }
}

}  // namespace

SplitResult split_polygon(const Polygon& poly, const Line2& line,
                          const SplitTolerances& tol) {
  SplitResult out;
  const std::size_t n = poly.size();
  if (n < 3) return out;

  std::vector<double> d(n);
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    double s = signed_distance(line, poly[i]);
    if (std::fabs(s) <= tol.snap) s = 0.0;
    d[i] = s;
    has_pos = has_pos || s > 0.0;
    has_neg = has_neg || s < 0.0;
  }
  if (!has_pos || !has_neg) return out;  // no interior crossing

  Polygon neg, pos;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = (i + 1) % n;
    const Point2& p = poly[i];
    const Point2& q = poly[k];
    if (d[i] >= 0.0) push_dedup(pos, p, tol.dedup);
    if (d[i] <= 0.0) push_dedup(neg, p, tol.dedup);
    if ((d[i] > 0.0 && d[k] < 0.0) || (d[i] < 0.0 && d[k] > 0.0)) {
      const double t = d[i] / (d[i] - d[k]);
      const Point2 inter{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
      push_dedup(pos, inter, tol.dedup);
      push_dedup(neg, inter, tol.dedup);
    }
  }
  close_dedup(neg, tol.dedup);
  close_dedup(pos, tol.dedup);

  const double area_neg = polygon_area(neg);
  const double area_pos = polygon_area(pos);
  if (neg.size() < 3 || pos.size() < 3 || area_neg < tol.area_floor ||
      area_pos < tol.area_floor) {
    out.sliver_merged = true;
    return out;  // sliver merged into the rest of the cell
  }
  out.crossed = true;
  out.neg = std::move(neg);
  out.pos = std::move(pos);
  return out;
}

Polygon clip_halfplane(const Polygon& poly, const Line2& line, int sign,
                       const SplitTolerances& tol) {
  Polygon outp;
  const std::size_t n = poly.size();
  if (n == 0) return outp;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = (i + 1) % n;
    const Point2& p = poly[i];
    const Point2& q = poly[k];
    double di = signed_distance(line, p) * sign;
    double dk = signed_distance(line, q) * sign;
    if (std::fabs(di) <= tol.snap) di = 0.0;
    if (std::fabs(dk) <= tol.snap) dk = 0.0;
    if (di >= 0.0) push_dedup(outp, p, tol.dedup);
    if ((di > 0.0 && dk < 0.0) || (di < 0.0 && dk > 0.0)) {
      const double t = di / (di - dk);
      push_dedup(outp, {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)}, tol.dedup);
    }
  }
  close_dedup(outp, tol.dedup);
  if (outp.size() < 3) outp.clear();
  return outp;
}

Polygon convex_clip(const Polygon& subject, const Polygon& clip,
                    const SplitTolerances& tol) {
  Polygon out = subject;
  const std::size_t n = clip.size();
  for (std::size_t i = 0; i < n && !out.empty(); ++i) {
    const Point2& a = clip[i];
    const Point2& b = clip[(i + 1) % n];
    // interior of a CCW polygon is to the left of each edge
    const auto line = normalize_line(-(b.y - a.y), b.x - a.x, 0.0);
    if (!line) continue;
    Line2 l = *line;
    l.c = l.nx * a.x + l.ny * a.y;
    out = clip_halfplane(out, l, 1, tol);
  }
  return out;
}

bool polygon_contains(const Polygon& poly, const Point2& p, double tol) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % n];
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    const double scale = std::hypot(b.x - a.x, b.y - a.y);
    if (cross < -tol * std::max(scale, 1.0)) return false;
  }
  return true;
}

std::vector<Point2> interior_sample_points(const Polygon& poly, std::size_t k) {
  std::vector<Point2> pts;
  const Point2 c = polygon_centroid(poly);
  pts.push_back(c);
  for (std::size_t i = 0; i < poly.size() && pts.size() < k; ++i) {
    const Point2& v = poly[i];
    pts.push_back({c.x + 0.5 * (v.x - c.x), c.y + 0.5 * (v.y - c.y)});
  }
  // small polygons: fall back to points closer to the centroid
  double f = 0.25;
  while (pts.size() < k && !poly.empty()) {
    const Point2& v = poly[pts.size() % poly.size()];
    pts.push_back({c.x + f * (v.x - c.x), c.y + f * (v.y - c.y)});
    f *= 0.5;
  }
  return pts;
}

Polygon canonical_polygon(const Polygon& poly) {
  if (poly.empty()) return poly;
  std::size_t best = 0;
  for (std::size_t i = 1; i < poly.size(); ++i) {
    if (poly[i].x < poly[best].x ||
        (poly[i].x == poly[best].x && poly[i].y < poly[best].y))
      best = i;
  }
  Polygon out;
  out.reserve(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i)
    out.push_back(poly[(best + i) % poly.size()]);
  return out;
}

bool polygon_less(const Polygon& a, const Polygon& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].x != b[i].x) return a[i].x < b[i].x;
    if (a[i].y != b[i].y) return a[i].y < b[i].y;
  }
  return a.size() < b.size();
}

}  // namespace cpageo
