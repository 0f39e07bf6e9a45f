#pragma once

#include <map>
#include <optional>
#include <vector>

#include "cpageo/geometry.hpp"
#include "cpageo/network.hpp"

namespace cpageo {

struct EcdfSummary {
  std::vector<double> sample_a;  // sorted
  std::vector<double> sample_b;  // sorted
  std::vector<double> grid;
  double d_plus = 0.0;        // signed sup of F_a - F_b over the union points
  double wasserstein1 = 0.0;  // integral of |F_a - F_b|
  double area_diff = 0.0;     // trapezoid of (F_a - F_b) over the grid
};

// Right-continuous ECDF value P(X <= t) of a sorted sample.
double ecdf_value(const std::vector<double>& sorted, double t);

EcdfSummary ecdf_compare(std::vector<double> a, std::vector<double> b,
                         std::vector<double> grid);

// Per-layer normalized offsets of a checkpoint, with the layer centroid
// u_bar computed by a forward pass over `data` in the variant's mode.
std::map<int, std::vector<OffsetRecord>> offsets_by_layer(
    const Network& net, const Mat& data, const std::vector<int>& layers,
    OffsetVariant variant, const FrozenBatch* frozen = nullptr);

std::vector<double> offset_deltas(const std::vector<OffsetRecord>& records);

// r = empirical q-quantile of `reference`; returns the fraction of
// `offsets` strictly below r.
double cut_rate_at_quantile(const std::vector<double>& offsets, double q,
                            const std::vector<double>& reference);

double empirical_quantile(std::vector<double> sample, double q);

struct BiasShiftRow {
  int layer = 0;
  int neuron = 0;
  int breakpoint = 0;
  double baseline_change = 0.0;
  double bn_change = 0.0;
};

struct BiasShiftResult {
  int shifted_layer = 0;  // 1-based
  double shift = 0.0;
  std::vector<BiasShiftRow> rows;          // offsets of the shifted layer
  double max_bn_offset_change = 0.0;       // across every layer
  double max_bn_hyperplane_change = 0.0;   // hyperplane offsets c, every layer
  double max_baseline_change = 0.0;
};

// Shift each hidden layer's bias by c (one layer at a time), re-freeze the
// reference batch, and compare offsets; BN columns must be invariant.
std::vector<BiasShiftResult> bias_shift_test(const Network& net, const Mat& ref_batch,
                                             double c);

struct PearsonResult {
  bool defined = false;
  double r = 0.0;
};

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

// Per-layer Pearson correlation across neurons between |b_j| and the
// neuron's offset (first breakpoint), for the given variant.
std::map<int, PearsonResult> bias_offset_correlation(const Network& net,
                                                     const Mat& ref_batch,
                                                     OffsetVariant variant);

// Per-layer centroid-to-hyperplane l2 distances.
std::map<int, std::vector<double>> distance_histogram(
    const Network& net, const Mat& data, const std::vector<int>& layers,
    OffsetVariant variant, const FrozenBatch* frozen = nullptr);

struct ConditioningSummary {
  double drop_rank_ratio = 0.0;
  std::vector<double> sigma_min_values;
  std::size_t evaluated = 0;
  std::size_t skipped_on_switching_set = 0;
};

// Rank statistics of the prefix-map affine coefficients at the sampled
// points (parent-region embedding condition).
ConditioningSummary parent_region_conditioning(const Network& net,
                                               const EvalMode& mode,
                                               const Mat& points,
                                               std::size_t prefix_layers,
                                               double rank_threshold = 1e-8);

}  // namespace cpageo
