#include "cpageo/enumeration.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cpageo {

Vec SliceMap::apply(const Point2& t) const {
  Vec u(o.size());
  for (std::size_t i = 0; i < o.size(); ++i)
    u[i] = P(i, 0) * t.x + P(i, 1) * t.y + o[i];
  return u;
}

SliceMap SliceMap::identity2() {
  SliceMap s;
  s.P = Mat::identity(2);
  s.o = Vec(2, 0.0);
  return s;
}

SliceMap SliceMap::random_orthonormal(std::size_t dim, const Vec& origin, Rng& rng) {
  if (dim < 2) throw DimensionMismatch("SliceMap: dim must be >= 2");
  if (origin.size() != dim) throw DimensionMismatch("SliceMap: origin size mismatch");
  Vec a(dim), b(dim);
  for (std::size_t i = 0; i < dim; ++i) a[i] = rng.normal();
  const double na = norm_l2(a);
  for (double& x : a) x /= na;
  double nb = 0.0;
  do {
    for (std::size_t i = 0; i < dim; ++i) b[i] = rng.normal();
    const double proj = dot(a, b);
    for (std::size_t i = 0; i < dim; ++i) b[i] -= proj * a[i];
    nb = norm_l2(b);
  } while (nb < 1e-8);
  for (double& x : b) x /= nb;
  SliceMap s;
  s.P = Mat(dim, 2);
  for (std::size_t i = 0; i < dim; ++i) {
    s.P(i, 0) = a[i];
    s.P(i, 1) = b[i];
  }
  s.o = origin;
  return s;
}

namespace {

// Work item: a convex cell with the running post-activation affine map of
// the layers processed so far (as a function of slice coordinates).
struct PendingCell {
  Polygon polygon;
  ActivationPattern pattern;
  Mat A;  // D_l x 2
  Vec b;  // D_l
  bool on_boundary = false;
};

struct LayerLines {
  // pre-activation of each neuron as an affine function of slice coords
  Mat G;   // width x 2
  Vec g0;  // width
};

LayerLines layer_preactivation(const LinearLayer& eff, const Mat& A, const Vec& b) {
  LayerLines out;
  out.G = matmul(eff.W, A);
  out.g0 = add(matvec(eff.W, b), eff.b);
  return out;
}

struct SubdivideResult {
  std::vector<PendingCell> cells;
  std::size_t merged_slivers = 0;
  std::size_t boundary_flagged = 0;
};

// Split one cell by every breakpoint line of one layer, then extend the
// pattern and the running affine map of each resulting subcell.
SubdivideResult process_cell_layer(const Network& net, PendingCell cell,
                                   const LinearLayer& eff,
                                   const EnumerationOptions& opt,
                                   const SplitTolerances& tol) {
  const CpaActivation& act = net.activation();
  const std::size_t width = eff.out_dim();
  const std::size_t q_count = act.breakpoint_count();

  const LayerLines lines = layer_preactivation(eff, cell.A, cell.b);

  SubdivideResult out;
  std::vector<PendingCell> pieces;
  pieces.push_back(std::move(cell));

  for (std::size_t jj = 0; jj < width; ++jj) {
    const std::size_t j = opt.reverse_neuron_order ? width - 1 - jj : jj;
    const double gx = lines.G(j, 0), gy = lines.G(j, 1);
    const double gnorm = std::hypot(gx, gy);
    for (std::size_t qq = 0; qq < q_count; ++qq) {
      const std::size_t q = opt.reverse_neuron_order ? q_count - 1 - qq : qq;
      const double tau = act.breakpoints()[q];
      if (gnorm <= opt.zero_grad_tol) {
        // constant pre-activation on this cell: no split, but flag cells
        // sitting on the switching value itself
        if (std::fabs(lines.g0[j] - tau) <= opt.breakpoint_tol) {
          for (PendingCell& p : pieces)
            if (!p.on_boundary) {
              p.on_boundary = true;
              ++out.boundary_flagged;
            }
        }
        continue;
      }
      const Line2 line{gx / gnorm, gy / gnorm, (tau - lines.g0[j]) / gnorm};
      std::vector<PendingCell> next;
      next.reserve(pieces.size() + 2);
      for (PendingCell& p : pieces) {
        SplitResult s = split_polygon(p.polygon, line, tol);
        if (!s.crossed) {
          if (s.sliver_merged) ++out.merged_slivers;
          next.push_back(std::move(p));
          continue;
        }
        PendingCell other;
        other.pattern = p.pattern;
        other.A = p.A;
        other.b = p.b;
        other.on_boundary = p.on_boundary;
        other.polygon = std::move(s.pos);
        p.polygon = std::move(s.neg);
        next.push_back(std::move(p));
        next.push_back(std::move(other));
      }
      pieces = std::move(next);
    }
  }

  // pattern and gated affine map per subcell
  for (PendingCell& p : pieces) {
    const Point2 c = polygon_centroid(p.polygon);
    Vec slopes(width), intercepts(width);
    p.pattern.reserve(p.pattern.size() + width);
    for (std::size_t j = 0; j < width; ++j) {
      const double z = lines.G(j, 0) * c.x + lines.G(j, 1) * c.y + lines.g0[j];
      const int piece = act.piece_index_unchecked(z);
      p.pattern.push_back(piece);
      slopes[j] = act.slope(piece);
      intercepts[j] = act.intercept(piece);
    }
    Mat A2(width, 2);
    Vec b2(width);
    for (std::size_t j = 0; j < width; ++j) {
      A2(j, 0) = slopes[j] * lines.G(j, 0);
      A2(j, 1) = slopes[j] * lines.G(j, 1);
      b2[j] = slopes[j] * lines.g0[j] + intercepts[j];
    }
    p.A = std::move(A2);
    p.b = std::move(b2);
  }
  out.cells = std::move(pieces);
  return out;
}

RegionCell finish_cell(const Network& net, PendingCell&& p) {
  RegionCell cell;
  cell.pattern = std::move(p.pattern);
  cell.on_boundary = p.on_boundary;
  const LinearLayer& out = net.output_layer();
  cell.affine.A = matmul(out.W, p.A);
  cell.affine.b = add(matvec(out.W, p.b), out.b);
  cell.polygon = canonical_polygon(p.polygon);
  return cell;
}

void sort_cells(std::vector<RegionCell>& cells) {
  std::sort(cells.begin(), cells.end(), [](const RegionCell& a, const RegionCell& b) {
    return polygon_less(a.polygon, b.polygon);
  });
}

PendingCell initial_cell(const SliceMap& slice, const Window& window) {
  if (window.center.size() != 2)
    throw DimensionMismatch("enumerate: window must be 2D in slice coordinates");
  if (!(window.r > 0.0)) throw Error("enumerate: window radius must be positive");
  PendingCell root;
  root.polygon = make_window_polygon({window.center[0], window.center[1]}, window.r);
  root.A = slice.P;
  root.b = slice.o;
  return root;
}

void check_slice(const Network& net, const SliceMap& slice) {
  if (slice.P.rows != net.input_dim() || slice.o.size() != net.input_dim())
    throw DimensionMismatch("enumerate: slice dimension mismatch");
  const TwoColSvd sv = two_col_singular_values(slice.P);
  if (sv.sigma_min <= 1e-12) throw RankDeficient("enumerate: slice map is rank deficient");
}

}  // namespace

EnumerationResult enumerate_on_slice(const Network& net, const EvalMode& mode,
                                     const SliceMap& slice, const Window& window,
                                     const EnumerationOptions& opt) {
  check_slice(net, slice);
  const double window_area = (2.0 * window.r) * (2.0 * window.r);
  SplitTolerances tol;
  tol.snap = opt.snap_tol;
  tol.dedup = opt.dedup_tol;
  tol.area_floor = opt.area_floor_rel * window_area;

  std::vector<PendingCell> pending;
  pending.push_back(initial_cell(slice, window));

  EnumerationResult result;
  result.window_area = window_area;

  for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
    const LinearLayer eff = effective_hidden_affine(net, l, mode);
    std::vector<SubdivideResult> slots(pending.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(pending.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) if (opt.parallel && n > 32)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i)
      slots[static_cast<std::size_t>(i)] = process_cell_layer(
          net, std::move(pending[static_cast<std::size_t>(i)]), eff, opt, tol);

    std::vector<PendingCell> next;
    for (SubdivideResult& s : slots) {
      result.stats.merged_slivers += s.merged_slivers;
      result.stats.boundary_flagged += s.boundary_flagged;
      for (PendingCell& c : s.cells) next.push_back(std::move(c));
    }
    pending = std::move(next);
  }

  result.cells.reserve(pending.size());
  for (PendingCell& p : pending) result.cells.push_back(finish_cell(net, std::move(p)));
  sort_cells(result.cells);
  return result;
}

EnumerationResult enumerate_regions(const Network& net, const EvalMode& mode,
                                    const Window& window,
                                    const EnumerationOptions& opt) {
  if (net.input_dim() != 2)
    throw DimensionMismatch("enumerate_regions: input must be 2D; use a slice");
  return enumerate_on_slice(net, mode, SliceMap::identity2(), window, opt);
}

namespace {

// Depth-first serial reference: recurse into the subcells of each layer.
void reference_recurse(const Network& net, const EvalMode& mode, PendingCell cell,
                       std::size_t layer, const EnumerationOptions& opt,
                       const SplitTolerances& tol, EnumerationResult& result) {
  if (layer == net.hidden_layer_count()) {
    result.cells.push_back(finish_cell(net, std::move(cell)));
    return;
  }
  const LinearLayer eff = effective_hidden_affine(net, layer, mode);
  SubdivideResult sub = process_cell_layer(net, std::move(cell), eff, opt, tol);
  result.stats.merged_slivers += sub.merged_slivers;
  result.stats.boundary_flagged += sub.boundary_flagged;
  for (PendingCell& c : sub.cells)
    reference_recurse(net, mode, std::move(c), layer + 1, opt, tol, result);
}

}  // namespace

EnumerationResult enumerate_on_slice_reference(const Network& net,
                                               const EvalMode& mode,
                                               const SliceMap& slice,
                                               const Window& window,
                                               const EnumerationOptions& opt) {
  check_slice(net, slice);
  const double window_area = (2.0 * window.r) * (2.0 * window.r);
  SplitTolerances tol;
  tol.snap = opt.snap_tol;
  tol.dedup = opt.dedup_tol;
  tol.area_floor = opt.area_floor_rel * window_area;

  EnumerationResult result;
  result.window_area = window_area;
  reference_recurse(net, mode, initial_cell(slice, window), 0, opt, tol, result);
  sort_cells(result.cells);
  return result;
}

double local_region_density(std::size_t count, double r, unsigned dim) {
  if (!(r > 0.0)) throw Error("local_region_density: radius must be positive");
  return static_cast<double>(count) / std::pow(2.0 * r, static_cast<double>(dim));
}

std::vector<DensityProfileRow> density_profile(const Network& net,
                                               const EvalMode& mode,
                                               const Point2& center,
                                               const std::vector<double>& radii,
                                               const EnumerationOptions& opt) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw Error("density_profile: radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1]))
      throw Error("density_profile: radii must be strictly increasing");
  }
  std::vector<DensityProfileRow> rows;
  rows.reserve(radii.size());
  for (double r : radii) {
    const Window w{{center.x, center.y}, r};
    const EnumerationResult res = enumerate_regions(net, mode, w, opt);
    rows.push_back({r, res.cells.size(), local_region_density(res.cells.size(), r, 2)});
  }
  return rows;
}

std::vector<DensityProfileRow> aggregate_class_density(
    const Network& net, const EvalMode& mode, const std::vector<Point2>& centers,
    const std::vector<double>& weights, const std::vector<double>& radii,
    const EnumerationOptions& opt) {
  if (centers.size() != weights.size())
    throw DimensionMismatch("aggregate_class_density: centers/weights mismatch");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw Error("aggregate_class_density: weights must be nonnegative");
    wsum += w;
  }
  if (std::fabs(wsum - 1.0) > 1e-9)
    throw Error("aggregate_class_density: weights must sum to 1");

  std::vector<DensityProfileRow> agg(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) agg[i].r = radii[i];
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const auto rows = density_profile(net, mode, centers[c], radii, opt);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      agg[i].density += weights[c] * rows[i].density;
      agg[i].count += rows[i].count;  // total enumerated, informational
    }
  }
  return agg;
}

int find_cell(const std::vector<RegionCell>& cells, const Point2& p) {
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (polygon_contains(cells[i].polygon, p, 1e-12)) return static_cast<int>(i);
  return -1;
}

Network prefix_network(const Network& net, std::size_t prefix_layers) {
  if (prefix_layers > net.hidden_layer_count())
    throw DimensionMismatch("prefix_network: prefix exceeds depth");
  std::vector<HiddenBlock> blocks;
  for (std::size_t l = 0; l < prefix_layers; ++l) blocks.push_back(net.block(l));
  const std::size_t width =
      prefix_layers == 0 ? net.input_dim() : net.hidden_width(prefix_layers - 1);
  LinearLayer out;
  out.W = Mat::identity(width);
  out.b = Vec(width, 0.0);
  return Network(net.input_dim(), std::move(blocks), std::move(out),
                 net.activation());
}

}  // namespace cpageo
