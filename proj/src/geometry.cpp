#include "cpageo/geometry.hpp"

#include <cmath>

namespace cpageo {

namespace {
constexpr double kZeroWeightTol = 0.0;  // exact zero vector is the excluded case

void require_nonzero(const Vec& w) {
  if (norm_l2(w) <= kZeroWeightTol) throw ZeroWeight();
}

double bn_delta(double tau, double beta, double gamma) {
  if (gamma == 0.0) throw ZeroGamma();
  return (tau - beta) / gamma;
}
}  // namespace

Hyperplane baseline_hyperplane(const Vec& w, double b, double tau) {
  require_nonzero(w);
  return {w, tau - b};
}

Hyperplane bn_hyperplane(const Vec& w, const Vec& centroid, double v, double gamma,
                         double beta, double tau, double eps) {
  require_nonzero(w);
  if (v < 0.0) throw Error("bn_hyperplane: negative variance");
  if (!(eps > 0.0)) throw Error("bn_hyperplane: eps must be positive");
  const double delta = bn_delta(tau, beta, gamma);
  return {w, dot(w, centroid) + delta * std::sqrt(v + eps)};
}

Hyperplane bn_hyperplane_from_stats(const Vec& w, double b, double mu, double v,
                                    double gamma, double beta, double tau,
                                    double eps) {
  require_nonzero(w);
  if (v < 0.0) throw Error("bn_hyperplane_from_stats: negative variance");
  if (!(eps > 0.0)) throw Error("bn_hyperplane_from_stats: eps must be positive");
  const double delta = bn_delta(tau, beta, gamma);
  return {w, (mu - b) + delta * std::sqrt(v + eps)};
}

Hyperplane through_centroid_hyperplane(const Vec& w, const Vec& centroid) {
  require_nonzero(w);
  return {w, dot(w, centroid)};
}

bool window_cut(const Hyperplane& h, const Window& b, CutBoundary boundary) {
  const double lhs = std::fabs(h.c - dot(h.w, b.center));
  const double rhs = b.r * norm_l1(h.w);
  return boundary == CutBoundary::Open ? lhs < rhs : lhs <= rhs;
}

CutClassification window_cut_classified(const Hyperplane& h, const Window& b,
                                        double tie_tol) {
  const double lhs = std::fabs(h.c - dot(h.w, b.center));
  const double rhs = b.r * norm_l1(h.w);
  CutClassification out;
  out.open_cut = lhs < rhs;
  out.closed_cut = lhs <= rhs;
  out.boundary_tie = std::fabs(lhs - rhs) <= tie_tol;
  return out;
}

double centroid_distance_l2(const Hyperplane& h, const Vec& x0) {
  require_nonzero(h.w);
  return std::fabs(h.c - dot(h.w, x0)) / norm_l2(h.w);
}

const char* variant_name(OffsetVariant v) {
  switch (v) {
    case OffsetVariant::Baseline: return "baseline";
    case OffsetVariant::BnFrozen: return "bn_frozen";
    case OffsetVariant::BnRunning: return "bn_running";
    case OffsetVariant::ThroughCentroid: return "through_centroid";
  }
  return "unknown";
}

OffsetVariant variant_from_name(const std::string& name) {
  if (name == "baseline") return OffsetVariant::Baseline;
  if (name == "bn_frozen") return OffsetVariant::BnFrozen;
  if (name == "bn_running") return OffsetVariant::BnRunning;
  if (name == "through_centroid") return OffsetVariant::ThroughCentroid;
  throw Error("unknown offset variant: " + name);
}

double offset_baseline(const Vec& w, double b, double tau, const Vec& center) {
  require_nonzero(w);
  return std::fabs(tau - (dot(w, center) + b)) / norm_l1(w);
}

double offset_bn_frozen(const Vec& w, double gamma, double beta, double tau,
                        double eps, double v) {
  require_nonzero(w);
  const double delta = bn_delta(tau, beta, gamma);
  return std::fabs(delta) * std::sqrt(v + eps) / norm_l1(w);
}

double offset_bn_general(const Vec& w, const Vec& centroid, const Vec& center,
                         double gamma, double beta, double tau, double eps,
                         double v) {
  require_nonzero(w);
  const double delta = bn_delta(tau, beta, gamma);
  return std::fabs(dot(w, sub(centroid, center)) + delta * std::sqrt(v + eps)) /
         norm_l1(w);
}

double offset_bn_running(const Vec& w, double b, double mu_run, double v_run,
                         double gamma, double beta, double tau, double eps,
                         const Vec& center) {
  require_nonzero(w);
  const double delta = bn_delta(tau, beta, gamma);
  return std::fabs(dot(w, center) + b - mu_run - delta * std::sqrt(v_run + eps)) /
         norm_l1(w);
}

LayerArrangement layer_arrangement(const Network& net, std::size_t layer,
                                   const EvalMode& mode) {
  if (layer < 1 || layer > net.hidden_layer_count())
    throw DimensionMismatch("layer_arrangement: layer out of range");
  const HiddenBlock& blk = net.block(layer - 1);
  const CpaActivation& act = net.activation();
  const std::size_t width = blk.linear.out_dim();

  LayerArrangement arr;
  for (std::size_t j = 0; j < width; ++j) {
    Vec w(blk.linear.W.cols);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = blk.linear.W(j, k);
    if (norm_l2(w) == 0.0) {
      // trained weights can die; the arrangement itself assumes w != 0
      ++arr.skipped_zero_weight;
      continue;
    }
    for (std::size_t q = 0; q < act.breakpoint_count(); ++q) {
      const double tau = act.breakpoints()[q];
      Hyperplane h;
      if (!blk.bn.present || mode.kind == ModeKind::NoBn) {
        h = baseline_hyperplane(w, blk.linear.b[j], tau);
      } else if (mode.kind == ModeKind::BnEval) {
        h = bn_hyperplane_from_stats(w, blk.linear.b[j], blk.bn.running_mean[j],
                                     blk.bn.running_var[j], blk.bn.gamma[j],
                                     blk.bn.beta[j], tau, blk.bn.eps);
      } else {
        if (mode.frozen == nullptr || layer - 1 >= mode.frozen->per_block.size())
          throw MissingFrozenStats();
        const BatchStats& st = mode.frozen->per_block[layer - 1];
        h = bn_hyperplane_from_stats(w, blk.linear.b[j], st.mu[j], st.var[j],
                                     blk.bn.gamma[j], blk.bn.beta[j], tau,
                                     blk.bn.eps);
      }
      arr.planes.push_back(std::move(h));
      arr.index.emplace_back(static_cast<int>(j), static_cast<int>(q + 1));
    }
  }
  return arr;
}

FamilyCutCounts family_cut_counts(const LayerArrangement& arr, std::size_t width,
                                  const Window& b) {
  FamilyCutCounts out;
  out.per_neuron.assign(width, 0);
  out.skipped_zero_weight = arr.skipped_zero_weight;
  for (std::size_t i = 0; i < arr.planes.size(); ++i) {
    if (window_cut(arr.planes[i], b, CutBoundary::Open)) {
      ++out.per_neuron[static_cast<std::size_t>(arr.index[i].first)];
      ++out.total;
    }
  }
  return out;
}

FamilyCutCounts family_cut_counts(const Network& net, std::size_t layer,
                                  const EvalMode& mode, const Window& b) {
  const LayerArrangement arr = layer_arrangement(net, layer, mode);
  return family_cut_counts(arr, net.hidden_width(layer - 1), b);
}

}  // namespace cpageo
