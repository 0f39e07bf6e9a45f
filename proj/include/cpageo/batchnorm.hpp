#pragma once

#include <string>
#include <vector>

#include "cpageo/linalg.hpp"

namespace cpageo {

class Network;

// Per-feature batch statistics with the biased (1/M) variance estimator.
struct BatchStats {
  Vec mu;
  Vec var;
  std::size_t batch_size = 0;
};

// Columnwise mean/variance of an M x width matrix (two-pass).
BatchStats batch_stats(const Mat& Z);

Vec bn_train_transform(const Vec& z, const BatchStats& stats, const Vec& gamma,
                       const Vec& beta, double eps);

Vec bn_eval_transform(const Vec& z, const Vec& running_mean, const Vec& running_var,
                      const Vec& gamma, const Vec& beta, double eps);

// BN as an affine map acting on the bias-free products W h:
//   z_hat = scale (*) (W h) + shift,  scale = gamma / sqrt(v + eps),
//   shift = scale (*) (raw_bias - mu) + beta.
struct BnAffine {
  Vec scale;
  Vec shift;
};

BnAffine bn_as_affine(const Vec& gamma, const Vec& beta, double eps,
                      const BatchStats& stats, const Vec& raw_bias);

// Batch statistics captured per hidden block by propagating a fixed
// reference batch in training mode. Turns training-time BN into a
// deterministic affine reparameterization.
struct FrozenBatch {
  std::vector<BatchStats> per_block;
  std::string reference_batch_id;
};

FrozenBatch freeze_batch(const Network& net, const Mat& batch);

std::string batch_content_hash(const Mat& batch);

struct BatchNormSlot {
  bool present = false;
  Vec gamma;
  Vec beta;
  double eps = 1e-5;
  Vec running_mean;
  Vec running_var;
  double momentum = 0.1;
};

// r <- (1 - momentum) * r + momentum * batch value, for mean and variance.
void update_running_stats(BatchNormSlot& slot, const BatchStats& stats);

}  // namespace cpageo
