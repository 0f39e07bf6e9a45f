#include <cmath>
#include <cstdint>
#include <map>

#include "cpageo/enumeration.hpp"

namespace cpageo {

namespace {

int argmax_label(const AffineMap& affine, const Point2& c, std::size_t* ties) {
  const std::size_t n = affine.A.rows;
  int best = 0;
  double best_val = affine.A(0, 0) * c.x + affine.A(0, 1) * c.y + affine.b[0];
  bool tie = false;
  for (std::size_t i = 1; i < n; ++i) {
    const double v = affine.A(i, 0) * c.x + affine.A(i, 1) * c.y + affine.b[i];
    if (v > best_val) {
      best = static_cast<int>(i);
      best_val = v;
      tie = false;
    } else if (v == best_val) {
      tie = true;  // resolved toward the lower class index
    }
  }
  if (tie && ties != nullptr) ++(*ties);
  return best;
}

using EdgeKey = std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>;

EdgeKey make_edge_key(const Point2& a, const Point2& b) {
  const double q = 1e9;
  std::int64_t ax = static_cast<std::int64_t>(std::llround(a.x * q));
  std::int64_t ay = static_cast<std::int64_t>(std::llround(a.y * q));
  std::int64_t bx = static_cast<std::int64_t>(std::llround(b.x * q));
  std::int64_t by = static_cast<std::int64_t>(std::llround(b.y * q));
  if (ax > bx || (ax == bx && ay > by)) {
    std::swap(ax, bx);
    std::swap(ay, by);
  }
  return {ax, ay, bx, by};
}

}  // namespace

DecisionMap decision_regions(const std::vector<RegionCell>& cells,
                             const EnumerationOptions& opt) {
  DecisionMap out;
  if (cells.empty()) return out;
  const std::size_t n_classes = cells[0].affine.A.rows;
  if (n_classes < 2) throw Error("decision_regions: need at least 2 output classes");

  SplitTolerances tol;
  tol.snap = opt.snap_tol;
  tol.dedup = opt.dedup_tol;

  for (std::size_t pi = 0; pi < cells.size(); ++pi) {
    const RegionCell& cell = cells[pi];
    tol.area_floor = opt.area_floor_rel * std::fabs(polygon_area(cell.polygon));

    std::vector<Polygon> parts{cell.polygon};
    for (std::size_t i = 0; i < n_classes; ++i) {
      for (std::size_t j = i + 1; j < n_classes; ++j) {
        // logit_i == logit_j
        const double nx = cell.affine.A(i, 0) - cell.affine.A(j, 0);
        const double ny = cell.affine.A(i, 1) - cell.affine.A(j, 1);
        const double c = cell.affine.b[j] - cell.affine.b[i];
        const auto line = normalize_line(nx, ny, c, opt.zero_grad_tol);
        if (!line) continue;
        std::vector<Polygon> next;
        next.reserve(parts.size() + 2);
        for (Polygon& part : parts) {
          SplitResult s = split_polygon(part, *line, tol);
          if (s.crossed) {
            next.push_back(std::move(s.neg));
            next.push_back(std::move(s.pos));
          } else {
            next.push_back(std::move(part));
          }
        }
        parts = std::move(next);
      }
    }
    for (Polygon& part : parts) {
      DecisionCell dc;
      dc.label = argmax_label(cell.affine, polygon_centroid(part), &out.tie_count);
      dc.polygon = std::move(part);
      dc.parent_cell = static_cast<int>(pi);
      out.cells.push_back(std::move(dc));
    }
  }

  // shared edges between differently labeled cells
  struct EdgeUse {
    Point2 a, b;
    int label;
    bool boundary = false;
  };
  std::map<EdgeKey, EdgeUse> edges;
  for (const DecisionCell& dc : out.cells) {
    const std::size_t n = dc.polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = dc.polygon[i];
      const Point2& b = dc.polygon[(i + 1) % n];
      const EdgeKey key = make_edge_key(a, b);
      auto it = edges.find(key);
      if (it == edges.end()) {
        edges.emplace(key, EdgeUse{a, b, dc.label, false});
      } else if (it->second.label != dc.label) {
        it->second.boundary = true;
      }
    }
  }
  for (const auto& [key, use] : edges)
    if (use.boundary) out.boundary.push_back({use.a, use.b});
  return out;
}

}  // namespace cpageo
