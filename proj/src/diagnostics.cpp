#include "cpageo/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "cpageo/enumeration.hpp"

namespace cpageo {

double ecdf_value(const std::vector<double>& sorted, double t) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(it - sorted.begin()) /
         static_cast<double>(sorted.size());
}

EcdfSummary ecdf_compare(std::vector<double> a, std::vector<double> b,
                         std::vector<double> grid) {
  if (a.empty() || b.empty()) throw EmptySample();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  EcdfSummary s;
  // signed supremum of F_a - F_b, attained at union sample points
  std::vector<double> merged;
  merged.reserve(a.size() + b.size());
  merged.insert(merged.end(), a.begin(), a.end());
  merged.insert(merged.end(), b.begin(), b.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  double d_plus = -2.0;
  for (double t : merged)
    d_plus = std::max(d_plus, ecdf_value(a, t) - ecdf_value(b, t));
  s.d_plus = d_plus;

  // W1 as the integral of |F_a - F_b| between consecutive union points
  double w1 = 0.0;
  for (std::size_t i = 0; i + 1 < merged.size(); ++i)
    w1 += std::fabs(ecdf_value(a, merged[i]) - ecdf_value(b, merged[i])) *
          (merged[i + 1] - merged[i]);
  s.wasserstein1 = w1;

  // signed CDF-area difference on the supplied grid
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double f0 = ecdf_value(a, grid[i]) - ecdf_value(b, grid[i]);
    const double f1 = ecdf_value(a, grid[i + 1]) - ecdf_value(b, grid[i + 1]);
    area += 0.5 * (f0 + f1) * (grid[i + 1] - grid[i]);
  }
  s.area_diff = area;

  s.sample_a = std::move(a);
  s.sample_b = std::move(b);
  s.grid = std::move(grid);
  return s;
}

namespace {

EvalMode mode_for_variant(OffsetVariant variant, const FrozenBatch* frozen) {
  switch (variant) {
    case OffsetVariant::Baseline:
    case OffsetVariant::ThroughCentroid:
      return EvalMode::no_bn();
    case OffsetVariant::BnRunning:
      return EvalMode::bn_eval();
    case OffsetVariant::BnFrozen:
      if (frozen == nullptr) throw MissingFrozenStats();
      return EvalMode::bn_frozen(*frozen);
  }
  return EvalMode::no_bn();
}

// mean of h^(layer-1) over the data rows, in the given mode
Vec layer_centroid(const Network& net, const Mat& data, int layer,
                   const EvalMode& mode) {
  const std::size_t width =
      layer == 1 ? net.input_dim() : net.hidden_width(static_cast<std::size_t>(layer) - 2);
  Vec centroid(width, 0.0);
  Vec x(data.cols);
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (std::size_t j = 0; j < data.cols; ++j) x[j] = data(i, j);
    if (layer == 1) {
      for (std::size_t j = 0; j < width; ++j) centroid[j] += x[j];
    } else {
      const ForwardTrace tr = forward_trace(net, x, mode);
      const Vec& h = tr.layers[static_cast<std::size_t>(layer) - 2].h;
      for (std::size_t j = 0; j < width; ++j) centroid[j] += h[j];
    }
  }
  for (double& v : centroid) v /= static_cast<double>(data.rows);
  return centroid;
}

Vec weight_row(const Mat& W, std::size_t j) {
  Vec w(W.cols);
  for (std::size_t k = 0; k < W.cols; ++k) w[k] = W(j, k);
  return w;
}

}  // namespace

std::map<int, std::vector<OffsetRecord>> offsets_by_layer(
    const Network& net, const Mat& data, const std::vector<int>& layers,
    OffsetVariant variant, const FrozenBatch* frozen) {
  if (data.rows == 0) throw EmptySample();
  const EvalMode mode = mode_for_variant(variant, frozen);
  const CpaActivation& act = net.activation();

  std::map<int, std::vector<OffsetRecord>> out;
  for (int layer : layers) {
    if (layer < 1 || static_cast<std::size_t>(layer) > net.hidden_layer_count())
      throw DimensionMismatch("offsets_by_layer: layer out of range");
    const HiddenBlock& blk = net.block(static_cast<std::size_t>(layer) - 1);
    const Vec centroid = layer_centroid(net, data, layer, mode);

    std::vector<OffsetRecord> records;
    for (std::size_t j = 0; j < blk.linear.out_dim(); ++j) {
      const Vec w = weight_row(blk.linear.W, j);
      if (norm_l2(w) == 0.0) continue;  // dead neuron, excluded
      const double l1 = norm_l1(w);
      for (std::size_t q = 0; q < act.breakpoint_count(); ++q) {
        const double tau = act.breakpoints()[q];
        OffsetRecord rec;
        rec.layer = layer;
        rec.neuron = static_cast<int>(j);
        rec.breakpoint = static_cast<int>(q + 1);
        rec.variant = variant;
        rec.l1_norm = l1;
        switch (variant) {
          case OffsetVariant::Baseline:
            rec.numerator = std::fabs(tau - (dot(w, centroid) + blk.linear.b[j]));
            break;
          case OffsetVariant::BnFrozen: {
            if (frozen == nullptr ||
                static_cast<std::size_t>(layer) - 1 >= frozen->per_block.size())
              throw MissingFrozenStats();
            if (!blk.bn.present) throw Error("offsets_by_layer: layer has no BN");
            if (blk.bn.gamma[j] == 0.0) throw ZeroGamma();
            const double v = frozen->per_block[static_cast<std::size_t>(layer) - 1].var[j];
            const double delta = (tau - blk.bn.beta[j]) / blk.bn.gamma[j];
            rec.numerator = std::fabs(delta) * std::sqrt(v + blk.bn.eps);
            break;
          }
          case OffsetVariant::BnRunning: {
            if (!blk.bn.present) throw Error("offsets_by_layer: layer has no BN");
            if (blk.bn.gamma[j] == 0.0) throw ZeroGamma();
            const double delta = (tau - blk.bn.beta[j]) / blk.bn.gamma[j];
            rec.numerator = std::fabs(dot(w, centroid) + blk.linear.b[j] -
                                      blk.bn.running_mean[j] -
                                      delta * std::sqrt(blk.bn.running_var[j] +
                                                        blk.bn.eps));
            break;
          }
          case OffsetVariant::ThroughCentroid:
            rec.numerator = 0.0;
            break;
        }
        rec.delta = rec.numerator / l1;
        records.push_back(rec);
      }
    }
    out.emplace(layer, std::move(records));
  }
  return out;
}

std::vector<double> offset_deltas(const std::vector<OffsetRecord>& records) {
  std::vector<double> d;
  d.reserve(records.size());
  for (const OffsetRecord& r : records) d.push_back(r.delta);
  return d;
}

double empirical_quantile(std::vector<double> sample, double q) {
  if (sample.empty()) throw EmptySample();
  if (!(q > 0.0 && q < 1.0)) throw Error("empirical_quantile: q must be in (0,1)");
  std::sort(sample.begin(), sample.end());
  const double nq = q * static_cast<double>(sample.size());
  std::size_t k = static_cast<std::size_t>(std::ceil(nq));
  if (k == 0) k = 1;
  if (k > sample.size()) k = sample.size();
  return sample[k - 1];
}

double cut_rate_at_quantile(const std::vector<double>& offsets, double q,
                            const std::vector<double>& reference) {
  if (offsets.empty()) throw EmptySample();
  const double r = empirical_quantile(reference, q);
  std::size_t cut = 0;
  for (double d : offsets)
    if (d < r) ++cut;
  return static_cast<double>(cut) / static_cast<double>(offsets.size());
}

std::vector<BiasShiftResult> bias_shift_test(const Network& net, const Mat& ref_batch,
                                             double c) {
  const FrozenBatch base = freeze_batch(net, ref_batch);
  const std::vector<int> all_layers = [&] {
    std::vector<int> v;
    for (std::size_t l = 1; l <= net.hidden_layer_count(); ++l)
      v.push_back(static_cast<int>(l));
    return v;
  }();

  std::vector<BiasShiftResult> results;
  for (std::size_t shift_l = 0; shift_l < net.hidden_layer_count(); ++shift_l) {
    Network shifted = net;
    for (double& b : shifted.block(shift_l).linear.b) b += c;
    const FrozenBatch after = freeze_batch(shifted, ref_batch);

    BiasShiftResult res;
    res.shifted_layer = static_cast<int>(shift_l + 1);
    res.shift = c;

    const auto base_off = offsets_by_layer(net, ref_batch, all_layers,
                                           OffsetVariant::Baseline, nullptr);
    const auto shift_off = offsets_by_layer(shifted, ref_batch, all_layers,
                                            OffsetVariant::Baseline, nullptr);

    for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
      const bool has_bn = net.block(l).bn.present;
      const HiddenBlock& blk = net.block(l);
      const HiddenBlock& blk2 = shifted.block(l);
      const CpaActivation& act = net.activation();
      for (std::size_t j = 0; j < blk.linear.out_dim(); ++j) {
        const Vec w = weight_row(blk.linear.W, j);
        if (norm_l2(w) == 0.0) continue;
        for (std::size_t q = 0; q < act.breakpoint_count(); ++q) {
          const double tau = act.breakpoints()[q];
          double bn_change = 0.0;
          if (has_bn && blk.bn.gamma[j] != 0.0) {
            const double d1 = offset_bn_frozen(w, blk.bn.gamma[j], blk.bn.beta[j],
                                               tau, blk.bn.eps,
                                               base.per_block[l].var[j]);
            const double d2 = offset_bn_frozen(w, blk2.bn.gamma[j], blk2.bn.beta[j],
                                               tau, blk2.bn.eps,
                                               after.per_block[l].var[j]);
            bn_change = std::fabs(d2 - d1);
            res.max_bn_offset_change = std::max(res.max_bn_offset_change, bn_change);
            const Hyperplane h1 = bn_hyperplane_from_stats(
                w, blk.linear.b[j], base.per_block[l].mu[j], base.per_block[l].var[j],
                blk.bn.gamma[j], blk.bn.beta[j], tau, blk.bn.eps);
            const Hyperplane h2 = bn_hyperplane_from_stats(
                w, blk2.linear.b[j], after.per_block[l].mu[j], after.per_block[l].var[j],
                blk2.bn.gamma[j], blk2.bn.beta[j], tau, blk2.bn.eps);
            res.max_bn_hyperplane_change =
                std::max(res.max_bn_hyperplane_change, std::fabs(h2.c - h1.c));
          }
          if (l == shift_l) {
            const auto& b_rows = base_off.at(static_cast<int>(l + 1));
            const auto& s_rows = shift_off.at(static_cast<int>(l + 1));
            // rows are in matching (neuron, q) order
            for (std::size_t idx = 0; idx < b_rows.size(); ++idx) {
              if (b_rows[idx].neuron == static_cast<int>(j) &&
                  b_rows[idx].breakpoint == static_cast<int>(q + 1)) {
                BiasShiftRow row;
                row.layer = static_cast<int>(l + 1);
                row.neuron = static_cast<int>(j);
                row.breakpoint = static_cast<int>(q + 1);
                row.baseline_change =
                    std::fabs(s_rows[idx].delta - b_rows[idx].delta);
                row.bn_change = bn_change;
                res.max_baseline_change =
                    std::max(res.max_baseline_change, row.baseline_change);
                res.rows.push_back(row);
                break;
              }
            }
          }
        }
      }
    }
    results.push_back(std::move(res));
  }
  return results;
}

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("pearson: size mismatch");
  if (x.size() < 2) return {false, 0.0};
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return {false, 0.0};  // undefined, not 0
  return {true, sxy / std::sqrt(sxx * syy)};
}

std::map<int, PearsonResult> bias_offset_correlation(const Network& net,
                                                     const Mat& ref_batch,
                                                     OffsetVariant variant) {
  FrozenBatch frozen;
  const FrozenBatch* fb = nullptr;
  if (variant == OffsetVariant::BnFrozen) {
    frozen = freeze_batch(net, ref_batch);
    fb = &frozen;
  }
  std::vector<int> layers;
  for (std::size_t l = 1; l <= net.hidden_layer_count(); ++l)
    layers.push_back(static_cast<int>(l));
  const auto offsets = offsets_by_layer(net, ref_batch, layers, variant, fb);

  std::map<int, PearsonResult> out;
  for (const auto& [layer, records] : offsets) {
    const HiddenBlock& blk = net.block(static_cast<std::size_t>(layer) - 1);
    std::vector<double> abs_b, deltas;
    for (const OffsetRecord& rec : records) {
      if (rec.breakpoint != 1) continue;  // one row per neuron
      abs_b.push_back(std::fabs(blk.linear.b[static_cast<std::size_t>(rec.neuron)]));
      deltas.push_back(rec.delta);
    }
    out.emplace(layer, pearson(abs_b, deltas));
  }
  return out;
}

std::map<int, std::vector<double>> distance_histogram(
    const Network& net, const Mat& data, const std::vector<int>& layers,
    OffsetVariant variant, const FrozenBatch* frozen) {
  const EvalMode mode = mode_for_variant(variant, frozen);
  const CpaActivation& act = net.activation();
  std::map<int, std::vector<double>> out;
  for (int layer : layers) {
    const HiddenBlock& blk = net.block(static_cast<std::size_t>(layer) - 1);
    const Vec centroid = layer_centroid(net, data, layer, mode);
    std::vector<double> distances;
    for (std::size_t j = 0; j < blk.linear.out_dim(); ++j) {
      const Vec w = weight_row(blk.linear.W, j);
      if (norm_l2(w) == 0.0) continue;
      for (std::size_t q = 0; q < act.breakpoint_count(); ++q) {
        const double tau = act.breakpoints()[q];
        Hyperplane h;
        switch (variant) {
          case OffsetVariant::Baseline:
            h = baseline_hyperplane(w, blk.linear.b[j], tau);
            break;
          case OffsetVariant::BnFrozen: {
            if (frozen == nullptr) throw MissingFrozenStats();
            const BatchStats& st = frozen->per_block[static_cast<std::size_t>(layer) - 1];
            h = bn_hyperplane_from_stats(w, blk.linear.b[j], st.mu[j], st.var[j],
                                         blk.bn.gamma[j], blk.bn.beta[j], tau,
                                         blk.bn.eps);
            break;
          }
          case OffsetVariant::BnRunning:
            h = bn_hyperplane_from_stats(w, blk.linear.b[j], blk.bn.running_mean[j],
                                         blk.bn.running_var[j], blk.bn.gamma[j],
                                         blk.bn.beta[j], tau, blk.bn.eps);
            break;
          case OffsetVariant::ThroughCentroid:
            h = through_centroid_hyperplane(w, centroid);
            break;
        }
        distances.push_back(centroid_distance_l2(h, centroid));
      }
    }
    out.emplace(layer, std::move(distances));
  }
  return out;
}

ConditioningSummary parent_region_conditioning(const Network& net,
                                               const EvalMode& mode,
                                               const Mat& points,
                                               std::size_t prefix_layers,
                                               double rank_threshold) {
  if (net.input_dim() != 2)
    throw DimensionMismatch("parent_region_conditioning: input must be 2D");
  const Network prefix = prefix_network(net, prefix_layers);
  ConditioningSummary sum;
  std::size_t dropped = 0;
  Vec x(points.cols);
  for (std::size_t i = 0; i < points.rows; ++i) {
    for (std::size_t j = 0; j < points.cols; ++j) x[j] = points(i, j);
    ActivationPattern pattern;
    try {
      pattern = activation_pattern(prefix, x, mode);
    } catch (const BreakpointHit&) {
      ++sum.skipped_on_switching_set;
      continue;
    }
    const AffineMap a = region_affine_map(prefix, pattern, mode);
    const TwoColSvd sv = two_col_singular_values(a.A);
    sum.sigma_min_values.push_back(sv.sigma_min);
    if (sv.sigma_min <= rank_threshold) ++dropped;
    ++sum.evaluated;
  }
  sum.drop_rank_ratio =
      sum.evaluated == 0
          ? 0.0
          : static_cast<double>(dropped) / static_cast<double>(sum.evaluated);
  return sum;
}

}  // namespace cpageo
