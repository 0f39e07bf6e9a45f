#pragma once

#include <cstddef>
#include <vector>

#include "cpageo/geometry.hpp"
#include "cpageo/network.hpp"
#include "cpageo/polygon.hpp"
#include "cpageo/rng.hpp"

namespace cpageo {

// Affine chart t -> P t + o from the plane into R^dim; columns of P must be
// linearly independent.
struct SliceMap {
  Mat P;  // dim x 2
  Vec o;  // dim

  Vec apply(const Point2& t) const;
  static SliceMap identity2();
  static SliceMap random_orthonormal(std::size_t dim, const Vec& origin, Rng& rng);
};

struct RegionCell {
  Polygon polygon;            // slice coordinates
  ActivationPattern pattern;  // full hidden pattern
  AffineMap affine;           // t -> network output on the cell
  bool on_boundary = false;   // some neuron constant at a breakpoint here
};

struct EnumerationStats {
  std::size_t merged_slivers = 0;
  std::size_t boundary_flagged = 0;
};

struct EnumerationResult {
  std::vector<RegionCell> cells;
  EnumerationStats stats;
  double window_area = 0.0;
};

struct EnumerationOptions {
  double snap_tol = 1e-10;
  double dedup_tol = 1e-12;
  double area_floor_rel = 1e-14;  // relative to window area
  double zero_grad_tol = 1e-12;
  double breakpoint_tol = 1e-12;
  bool parallel = true;
  bool reverse_neuron_order = false;  // processing-order independence checks
};

// Exact affine regions of the CPA map t -> f(P t + o) intersecting the open
// window, by breadth-first convex subdivision; cells come back sorted so the
// output is independent of thread count.
EnumerationResult enumerate_on_slice(const Network& net, const EvalMode& mode,
                                     const SliceMap& slice, const Window& window,
                                     const EnumerationOptions& opt = {});

// 2D input space, identity slice.
EnumerationResult enumerate_regions(const Network& net, const EvalMode& mode,
                                    const Window& window,
                                    const EnumerationOptions& opt = {});

// Serial reference enumerator (recursive, no worker pool); kept for testing
// and benchmarking against the parallel kernel.
EnumerationResult enumerate_on_slice_reference(const Network& net,
                                               const EvalMode& mode,
                                               const SliceMap& slice,
                                               const Window& window,
                                               const EnumerationOptions& opt = {});

double local_region_density(std::size_t count, double r, unsigned dim);

struct DensityProfileRow {
  double r = 0.0;
  std::size_t count = 0;
  double density = 0.0;
};

std::vector<DensityProfileRow> density_profile(const Network& net,
                                               const EvalMode& mode,
                                               const Point2& center,
                                               const std::vector<double>& radii,
                                               const EnumerationOptions& opt = {});

// Aggregate class-centered density: sum_c w_c * density(center_c, r).
std::vector<DensityProfileRow> aggregate_class_density(
    const Network& net, const EvalMode& mode, const std::vector<Point2>& centers,
    const std::vector<double>& weights, const std::vector<double>& radii,
    const EnumerationOptions& opt = {});

int find_cell(const std::vector<RegionCell>& cells, const Point2& p);

struct PullbackOptions {
  std::size_t grid = 64;
  double support_threshold = 0.95;
  double sigma_min_threshold = 1e-8;
  EnumerationOptions enum_opt;
};

struct PullbackReport {
  std::size_t layer = 0;  // 1-based layer whose arrangement is pulled back
  int rank = 0;
  double sigma_min = 0.0;
  double jacobian = 0.0;  // J_R = sqrt(det(A^T A)) of the prefix map
  double in_region_support = 0.0;
  std::size_t representation_components = 0;
  std::size_t input_space_components = 0;
  bool counts_equal = false;
  double support_threshold = 0.0;
  std::size_t grid_resolution = 0;
};

// Checks component preservation between the layer-`layer` arrangement
// restricted to the prefix image plane and its pullback into input space,
// inside the parent affine region of `anchor` for the prefix map
// h^(layer-1). Throws RankDeficient / WindowNotContained.
PullbackReport pullback_check(const Network& net, const EvalMode& mode,
                              std::size_t layer, const Vec& anchor,
                              double rep_radius, const Window& domain_window,
                              const PullbackOptions& opt = {});

// Overload reusing a prefix enumeration over the domain window.
PullbackReport pullback_check(const Network& net, const EvalMode& mode,
                              std::size_t layer, const Vec& anchor,
                              double rep_radius,
                              const EnumerationResult& prefix_cells,
                              const PullbackOptions& opt = {});

// Prefix network whose output is h^(prefix_layers) (identity output layer).
Network prefix_network(const Network& net, std::size_t prefix_layers);

struct DecisionCell {
  Polygon polygon;
  int label = 0;        // argmax class at the cell centroid
  int parent_cell = 0;  // index into the enumeration cells
};

struct BoundaryEdge {
  Point2 a, b;
};

struct DecisionMap {
  std::vector<DecisionCell> cells;
  std::vector<BoundaryEdge> boundary;
  std::size_t tie_count = 0;  // centroid argmax ties, resolved to lowest index
};

// Labels every region cell, splitting cells crossed by pairwise
// logit-difference lines; boundary edges separate different labels.
DecisionMap decision_regions(const std::vector<RegionCell>& cells,
                             const EnumerationOptions& opt = {});

}  // namespace cpageo
