#include <cmath>

#include "cpageo/enumeration.hpp"

namespace cpageo {

namespace {

// Count the connected components of poly minus a set of lines.
std::size_t count_components(const Polygon& poly, const std::vector<Line2>& lines,
                             const SplitTolerances& tol) {
  std::vector<Polygon> cells{poly};
  for (const Line2& line : lines) {
    std::vector<Polygon> next;
    next.reserve(cells.size() + 4);
    for (Polygon& cell : cells) {
      SplitResult s = split_polygon(cell, line, tol);
      if (s.crossed) {
        next.push_back(std::move(s.neg));
        next.push_back(std::move(s.pos));
      } else {
        next.push_back(std::move(cell));
      }
    }
    cells = std::move(next);
  }
  return cells.size();
}

struct Basis2 {
  Vec e1, e2;   // orthonormal basis of col(A)
  double m11, m12, m21, m22;  // M = E^T A, the 2x2 chart matrix
};

Basis2 orthonormal_basis(const Mat& A, double sigma_min_threshold) {
  const std::size_t d = A.rows;
  Vec c1(d), c2(d);
  for (std::size_t i = 0; i < d; ++i) {
    c1[i] = A(i, 0);
    c2[i] = A(i, 1);
  }
  Basis2 b;
  const double n1 = norm_l2(c1);
  if (n1 <= sigma_min_threshold) throw RankDeficient("pullback: first column near zero");
  b.e1 = c1;
  for (double& x : b.e1) x /= n1;
  const double proj = dot(b.e1, c2);
  b.e2 = c2;
  for (std::size_t i = 0; i < d; ++i) b.e2[i] -= proj * b.e1[i];
  const double n2 = norm_l2(b.e2);
  if (n2 <= sigma_min_threshold) throw RankDeficient("pullback: columns nearly dependent");
  for (double& x : b.e2) x /= n2;
  b.m11 = dot(b.e1, c1);
  b.m12 = dot(b.e1, c2);
  b.m21 = dot(b.e2, c1);
  b.m22 = dot(b.e2, c2);
  return b;
}

Polygon oriented(Polygon poly) {
  if (polygon_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

}  // namespace

PullbackReport pullback_check(const Network& net, const EvalMode& mode,
                              std::size_t layer, const Vec& anchor,
                              double rep_radius,
                              const EnumerationResult& prefix_cells,
                              const PullbackOptions& opt) {
  if (net.input_dim() != 2)
    throw DimensionMismatch("pullback_check: input dimension must be 2");
  if (layer < 1 || layer > net.hidden_layer_count())
    throw DimensionMismatch("pullback_check: layer out of range");
  if (!(rep_radius > 0.0)) throw Error("pullback_check: radius must be positive");

  const int parent_idx = find_cell(prefix_cells.cells, {anchor[0], anchor[1]});
  if (parent_idx < 0)
    throw WindowNotContained("pullback_check: anchor outside the domain window");
  const RegionCell& parent = prefix_cells.cells[static_cast<std::size_t>(parent_idx)];
  const Mat& A = parent.affine.A;  // d x 2 prefix coefficients
  const Vec& d0 = parent.affine.b;
  const std::size_t d = A.rows;

  PullbackReport rep;
  rep.layer = layer;
  rep.support_threshold = opt.support_threshold;
  rep.grid_resolution = opt.grid;

  const TwoColSvd sv = two_col_singular_values(A);
  rep.sigma_min = sv.sigma_min;
  rep.rank = (sv.sigma_min > opt.sigma_min_threshold)
                 ? 2
                 : (sv.sigma_max > opt.sigma_min_threshold ? 1 : 0);
  rep.jacobian = sv.sigma_min * sv.sigma_max;
  if (rep.rank < 2)
    throw RankDeficient("pullback_check: prefix map is not an embedding here");

  // representation-space window center
  Vec u_bar(d);
  for (std::size_t i = 0; i < d; ++i)
    u_bar[i] = A(i, 0) * anchor[0] + A(i, 1) * anchor[1] + d0[i];

  const Basis2 basis = orthonormal_basis(A, opt.sigma_min_threshold);

  SplitTolerances tol;
  tol.snap = opt.enum_opt.snap_tol;
  tol.dedup = opt.enum_opt.dedup_tol;

  // intrinsic window in chart coordinates s: all |<E_i, s>| <= r
  const double start_half = rep_radius * (std::sqrt(static_cast<double>(d)) + 1.0);
  Polygon window_s = make_window_polygon({0.0, 0.0}, start_half);
  for (std::size_t i = 0; i < d; ++i) {
    const auto line = normalize_line(basis.e1[i], basis.e2[i], 0.0);
    if (!line) continue;
    Line2 lo = *line, hi = *line;
    hi.c = rep_radius / std::hypot(basis.e1[i], basis.e2[i]);
    lo.c = -hi.c;
    window_s = clip_halfplane(window_s, hi, -1, tol);  // <= r
    window_s = clip_halfplane(window_s, lo, 1, tol);   // >= -r
    if (window_s.empty()) break;
  }
  if (window_s.size() < 3)
    throw WindowNotContained("pullback_check: empty intrinsic window");

  // chart offset: s(x) = M x + s0
  const double s0x = dot(basis.e1, sub(d0, u_bar));
  const double s0y = dot(basis.e2, sub(d0, u_bar));

  // in-region support over a membership grid of the intrinsic window
  const double det_m = basis.m11 * basis.m22 - basis.m12 * basis.m21;
  double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
  for (const Point2& p : window_s) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  std::size_t inside_window = 0, inside_region = 0;
  for (std::size_t gi = 0; gi < opt.grid; ++gi) {
    for (std::size_t gj = 0; gj < opt.grid; ++gj) {
      const Point2 s{
          minx + (maxx - minx) * (static_cast<double>(gi) + 0.5) / static_cast<double>(opt.grid),
          miny + (maxy - miny) * (static_cast<double>(gj) + 0.5) / static_cast<double>(opt.grid)};
      if (!polygon_contains(window_s, s, 1e-12)) continue;
      ++inside_window;
      const Point2 x{(basis.m22 * (s.x - s0x) - basis.m12 * (s.y - s0y)) / det_m,
                     (-basis.m21 * (s.x - s0x) + basis.m11 * (s.y - s0y)) / det_m};
      if (polygon_contains(parent.polygon, x, 1e-9)) ++inside_region;
    }
  }
  rep.in_region_support =
      inside_window == 0 ? 0.0
                         : static_cast<double>(inside_region) /
                               static_cast<double>(inside_window);
  if (rep.in_region_support < opt.support_threshold)
    throw WindowNotContained("pullback_check: in-region support below threshold");

  // clip the intrinsic window to the image of the parent cell
  Polygon parent_image_s;
  parent_image_s.reserve(parent.polygon.size());
  for (const Point2& x : parent.polygon)
    parent_image_s.push_back({basis.m11 * x.x + basis.m12 * x.y + s0x,
                              basis.m21 * x.x + basis.m22 * x.y + s0y});
  parent_image_s = oriented(std::move(parent_image_s));
  Polygon b_s = convex_clip(window_s, parent_image_s, tol);
  if (b_s.size() < 3)
    throw WindowNotContained("pullback_check: window does not meet the region image");

  // input-space preimage window: parent cell intersected with the slabs
  Polygon omega = parent.polygon;
  for (std::size_t i = 0; i < d && !omega.empty(); ++i) {
    const auto line = normalize_line(A(i, 0), A(i, 1), 0.0);
    if (!line) continue;
    const double nrm = std::hypot(A(i, 0), A(i, 1));
    Line2 hi = *line, lo = *line;
    hi.c = (u_bar[i] - d0[i] + rep_radius) / nrm;
    lo.c = (u_bar[i] - d0[i] - rep_radius) / nrm;
    omega = clip_halfplane(omega, hi, -1, tol);
    omega = clip_halfplane(omega, lo, 1, tol);
  }
  if (omega.size() < 3)
    throw WindowNotContained("pullback_check: empty input-space window");

  tol.area_floor = opt.enum_opt.area_floor_rel * std::fabs(polygon_area(b_s));
  SplitTolerances tol_in = tol;
  tol_in.area_floor = opt.enum_opt.area_floor_rel * std::fabs(polygon_area(omega));

  // restricted and pulled-back switching lines of the layer arrangement
  const LayerArrangement arr = layer_arrangement(net, layer, mode);
  std::vector<Line2> lines_s, lines_x;
  for (const Hyperplane& h : arr.planes) {
    const double wx_s = dot(basis.e1, h.w);
    const double wy_s = dot(basis.e2, h.w);
    const auto ls = normalize_line(wx_s, wy_s, h.c - dot(h.w, u_bar),
                                   opt.enum_opt.zero_grad_tol);
    double ax = 0.0, ay = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      ax += A(i, 0) * h.w[i];
      ay += A(i, 1) * h.w[i];
    }
    const auto lx = normalize_line(ax, ay, h.c - dot(h.w, d0),
                                   opt.enum_opt.zero_grad_tol);
    if (ls && lx) {
      lines_s.push_back(*ls);
      lines_x.push_back(*lx);
    }
  }

  rep.representation_components = count_components(b_s, lines_s, tol);
  rep.input_space_components = count_components(omega, lines_x, tol_in);
  rep.counts_equal = rep.representation_components == rep.input_space_components;
  return rep;
}

PullbackReport pullback_check(const Network& net, const EvalMode& mode,
                              std::size_t layer, const Vec& anchor,
                              double rep_radius, const Window& domain_window,
                              const PullbackOptions& opt) {
  const Network prefix = prefix_network(net, layer - 1);
  const EnumerationResult prefix_cells =
      enumerate_regions(prefix, mode, domain_window, opt.enum_opt);
  return pullback_check(net, mode, layer, anchor, rep_radius, prefix_cells, opt);
}

}  // namespace cpageo
