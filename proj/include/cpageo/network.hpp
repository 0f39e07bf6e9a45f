#pragma once

#include <cstddef>
#include <vector>

#include "cpageo/activation.hpp"
#include "cpageo/batchnorm.hpp"
#include "cpageo/linalg.hpp"

namespace cpageo {

struct LinearLayer {
  Mat W;
  Vec b;
  std::size_t out_dim() const { return W.rows; }
  std::size_t in_dim() const { return W.cols; }
};

struct HiddenBlock {
  LinearLayer linear;
  BatchNormSlot bn;
};

// Feedforward CPA network: hidden blocks (linear, optional BN, shared CPA
// activation) followed by a linear output layer.
class Network {
 public:
  Network(std::size_t input_dim, std::vector<HiddenBlock> blocks,
          LinearLayer output, CpaActivation act);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_.out_dim(); }
  std::size_t hidden_layer_count() const { return blocks_.size(); }
  std::size_t hidden_width(std::size_t l) const { return blocks_[l].linear.out_dim(); }
  std::size_t total_hidden_neurons() const;

  const HiddenBlock& block(std::size_t l) const { return blocks_[l]; }
  HiddenBlock& block(std::size_t l) { return blocks_[l]; }
  const LinearLayer& output_layer() const { return output_; }
  LinearLayer& output_layer() { return output_; }
  const CpaActivation& activation() const { return act_; }

  // [D0, D1, ..., DL]
  std::vector<std::size_t> widths() const;

  // Zero-initialized MLP skeleton; BN slots get gamma = 1, beta = 0,
  // running stats (0, 1).
  static Network mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                     std::size_t out_dim, CpaActivation act, bool with_bn,
                     double bn_eps = 1e-5, double bn_momentum = 0.1);

 private:
  std::size_t input_dim_;
  std::vector<HiddenBlock> blocks_;
  LinearLayer output_;
  CpaActivation act_;
};

enum class ModeKind { NoBn, BnEval, BnFrozen };

struct EvalMode {
  ModeKind kind = ModeKind::NoBn;
  const FrozenBatch* frozen = nullptr;

  static EvalMode no_bn() { return {ModeKind::NoBn, nullptr}; }
  static EvalMode bn_eval() { return {ModeKind::BnEval, nullptr}; }
  static EvalMode bn_frozen(const FrozenBatch& fb) { return {ModeKind::BnFrozen, &fb}; }
};

struct LayerTrace {
  Vec z_raw;  // W h + b
  Vec z_hat;  // after BN (equals z_raw when BN absent or mode NoBn)
  Vec h;      // after activation
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
  Vec output;
};

ForwardTrace forward_trace(const Network& net, const Vec& x, const EvalMode& mode);
Vec forward(const Network& net, const Vec& x, const EvalMode& mode);

// Flattened piece indices (1-based), layer-major: (l, j) at offset
// sum(D_1..D_{l-1}) + j.
using ActivationPattern = std::vector<int>;

ActivationPattern activation_pattern(const Network& net, const Vec& x,
                                     const EvalMode& mode,
                                     double tol = kBreakpointTol);

struct AffineMap {
  Mat A;
  Vec b;
  Vec apply(const Vec& x) const { return add(matvec(A, x), b); }
};

// Hidden block l with its BN slot absorbed into the linear map per mode.
LinearLayer effective_hidden_affine(const Network& net, std::size_t l,
                                    const EvalMode& mode);

// Affine coefficients (A_R, b_R) of the full network on the region with the
// given activation pattern.
AffineMap region_affine_map(const Network& net, const ActivationPattern& pattern,
                            const EvalMode& mode);

// Affine coefficients of the post-activation prefix map h^(prefix_layers);
// prefix_layers == 0 yields the identity. The pattern needs to cover at
// least the first prefix_layers hidden layers.
AffineMap prefix_affine_map(const Network& net, const ActivationPattern& pattern,
                            const EvalMode& mode, std::size_t prefix_layers);

}  // namespace cpageo
