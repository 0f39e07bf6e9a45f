#include "cpageo/network.hpp"

#include <cmath>

namespace cpageo {

Network::Network(std::size_t input_dim, std::vector<HiddenBlock> blocks,
                 LinearLayer output, CpaActivation act)
    : input_dim_(input_dim),
      blocks_(std::move(blocks)),
      output_(std::move(output)),
      act_(std::move(act)) {
  std::size_t prev = input_dim_;
  for (const HiddenBlock& blk : blocks_) {
    if (blk.linear.in_dim() != prev)
      throw DimensionMismatch("Network: chained layer dimensions do not match");
    if (blk.bn.present && blk.bn.gamma.size() != blk.linear.out_dim())
      throw DimensionMismatch("Network: BN width mismatch");
    prev = blk.linear.out_dim();
  }
  if (output_.in_dim() != prev)
    throw DimensionMismatch("Network: output layer dimension mismatch");
}

std::size_t Network::total_hidden_neurons() const {
  std::size_t n = 0;
  for (const HiddenBlock& blk : blocks_) n += blk.linear.out_dim();
  return n;
}

std::vector<std::size_t> Network::widths() const {
  std::vector<std::size_t> w;
  w.push_back(input_dim_);
  for (const HiddenBlock& blk : blocks_) w.push_back(blk.linear.out_dim());
  w.push_back(output_.out_dim());
  return w;
}

Network Network::mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                     std::size_t out_dim, CpaActivation act, bool with_bn,
                     double bn_eps, double bn_momentum) {
  std::vector<HiddenBlock> blocks;
  std::size_t prev = input_dim;
  for (std::size_t width : hidden) {
    HiddenBlock blk;
    blk.linear.W = Mat(width, prev);
    blk.linear.b = Vec(width, 0.0);
    if (with_bn) {
      blk.bn.present = true;
      blk.bn.gamma = Vec(width, 1.0);
      blk.bn.beta = Vec(width, 0.0);
      blk.bn.eps = bn_eps;
      blk.bn.momentum = bn_momentum;
      blk.bn.running_mean = Vec(width, 0.0);
      blk.bn.running_var = Vec(width, 1.0);
    }
    blocks.push_back(std::move(blk));
    prev = width;
  }
  LinearLayer out;
  out.W = Mat(out_dim, prev);
  out.b = Vec(out_dim, 0.0);
  return Network(input_dim, std::move(blocks), std::move(out), std::move(act));
}

namespace {

const BatchStats& frozen_stats_for(const EvalMode& mode, std::size_t l) {
  if (mode.frozen == nullptr || l >= mode.frozen->per_block.size())
    throw MissingFrozenStats();
  return mode.frozen->per_block[l];
}

Vec apply_bn(const BatchNormSlot& bn, const Vec& z, const EvalMode& mode,
             std::size_t l) {
  switch (mode.kind) {
    case ModeKind::NoBn:
      return z;
    case ModeKind::BnEval:
      return bn_eval_transform(z, bn.running_mean, bn.running_var, bn.gamma,
                               bn.beta, bn.eps);
    case ModeKind::BnFrozen:
      return bn_train_transform(z, frozen_stats_for(mode, l), bn.gamma, bn.beta,
                                bn.eps);
  }
  return z;
}

}  // namespace

ForwardTrace forward_trace(const Network& net, const Vec& x, const EvalMode& mode) {
  if (x.size() != net.input_dim())
    throw DimensionMismatch("forward: input dimension mismatch");
  ForwardTrace trace;
  trace.layers.reserve(net.hidden_layer_count());
  Vec h = x;
  for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
    const HiddenBlock& blk = net.block(l);
    LayerTrace lt;
    lt.z_raw = add(matvec(blk.linear.W, h), blk.linear.b);
    lt.z_hat = blk.bn.present ? apply_bn(blk.bn, lt.z_raw, mode, l) : lt.z_raw;
    lt.h.resize(lt.z_hat.size());
    for (std::size_t j = 0; j < lt.z_hat.size(); ++j)
      lt.h[j] = net.activation().eval(lt.z_hat[j]);
    h = lt.h;
    trace.layers.push_back(std::move(lt));
  }
  trace.output = add(matvec(net.output_layer().W, h), net.output_layer().b);
  return trace;
}

Vec forward(const Network& net, const Vec& x, const EvalMode& mode) {
  return forward_trace(net, x, mode).output;
}

ActivationPattern activation_pattern(const Network& net, const Vec& x,
                                     const EvalMode& mode, double tol) {
  const ForwardTrace trace = forward_trace(net, x, mode);
  ActivationPattern p;
  p.reserve(net.total_hidden_neurons());
  for (const LayerTrace& lt : trace.layers)
    for (double t : lt.z_hat) p.push_back(net.activation().piece_index(t, tol));
  return p;
}

LinearLayer effective_hidden_affine(const Network& net, std::size_t l,
                                    const EvalMode& mode) {
  const HiddenBlock& blk = net.block(l);
  if (!blk.bn.present || mode.kind == ModeKind::NoBn) return blk.linear;
  BatchStats stats;
  if (mode.kind == ModeKind::BnEval) {
    stats.mu = blk.bn.running_mean;
    stats.var = blk.bn.running_var;
  } else {
    stats = frozen_stats_for(mode, l);
  }
  const BnAffine a = bn_as_affine(blk.bn.gamma, blk.bn.beta, blk.bn.eps, stats,
                                  blk.linear.b);
  LinearLayer out;
  out.W = scale_rows(a.scale, blk.linear.W);
  out.b = a.shift;
  return out;
}

namespace {

// Shared recursion over the effective layer affines, gated by the pattern.
// Returns (A, b) of the post-activation map h^(layers).
AffineMap prefix_recursion(const Network& net, const ActivationPattern& pattern,
                           const EvalMode& mode, std::size_t layers) {
  AffineMap cur;
  cur.A = Mat::identity(net.input_dim());
  cur.b = Vec(net.input_dim(), 0.0);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const LinearLayer eff = effective_hidden_affine(net, l, mode);
    const std::size_t width = eff.out_dim();
    if (offset + width > pattern.size())
      throw DimensionMismatch("region_affine_map: pattern too short");
    AffineMap pre;  // z_hat^(l) as a function of x
    pre.A = matmul(eff.W, cur.A);
    pre.b = add(matvec(eff.W, cur.b), eff.b);
    Vec slopes(width), intercepts(width);
    for (std::size_t j = 0; j < width; ++j) {
      const int piece = pattern[offset + j];
      slopes[j] = net.activation().slope(piece);
      intercepts[j] = net.activation().intercept(piece);
    }
    cur.A = scale_rows(slopes, pre.A);
    cur.b.resize(width);
    for (std::size_t j = 0; j < width; ++j)
      cur.b[j] = slopes[j] * pre.b[j] + intercepts[j];
    offset += width;
  }
  return cur;
}

}  // namespace

AffineMap region_affine_map(const Network& net, const ActivationPattern& pattern,
                            const EvalMode& mode) {
  if (pattern.size() != net.total_hidden_neurons())
    throw DimensionMismatch("region_affine_map: pattern length mismatch");
  const AffineMap hidden =
      prefix_recursion(net, pattern, mode, net.hidden_layer_count());
  AffineMap out;
  out.A = matmul(net.output_layer().W, hidden.A);
  out.b = add(matvec(net.output_layer().W, hidden.b), net.output_layer().b);
  return out;
}

AffineMap prefix_affine_map(const Network& net, const ActivationPattern& pattern,
                            const EvalMode& mode, std::size_t prefix_layers) {
  if (prefix_layers > net.hidden_layer_count())
    throw DimensionMismatch("prefix_affine_map: prefix exceeds depth");
  return prefix_recursion(net, pattern, mode, prefix_layers);
}

}  // namespace cpageo
