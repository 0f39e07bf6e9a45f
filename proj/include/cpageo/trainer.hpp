#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cpageo/network.hpp"

namespace cpageo {

struct Dataset {
  Mat X;  // n x D0
  std::vector<int> labels;
  std::string name;
  std::uint64_t seed = 0;

  std::size_t n() const { return X.rows; }
  std::size_t dim() const { return X.cols; }
  int num_classes() const;
  Vec centroid() const;
  std::vector<Vec> class_centroids() const;
  std::vector<double> class_weights() const;  // empirical pi_c
};

// Two interleaved half-circles with additive Gaussian noise.
Dataset gen_two_moons(std::size_t n, double noise, std::uint64_t seed);
// Concentric radius-quantile shells of a 2D standard Gaussian.
Dataset gen_gaussian_quantiles(std::size_t n, int classes, std::uint64_t seed);
// Uniform on [-0.5, 4.5]^2 with the fixed planar split x + y > 4.
Dataset gen_random_uniform(std::size_t n, std::uint64_t seed);

Dataset generate_dataset(const std::string& name, std::size_t n, std::uint64_t seed);

// W ~ U(+-sqrt(6/fan_in) * gain), gain = sqrt(2) for K = 2 activations;
// b ~ U(+-1/sqrt(fan_in)); gamma = 1, beta = 0.
void init_kaiming_uniform(Network& net, std::uint64_t seed);

enum class TrainMode { NoBn, BnTrain };

struct Gradients {
  std::vector<Mat> dW;
  std::vector<Vec> db;
  std::vector<Vec> dgamma;  // empty when the block has no BN
  std::vector<Vec> dbeta;
  Mat dW_out;
  Vec db_out;
};

struct LossGrad {
  double loss = 0.0;
  Gradients grad;
};

// Mean softmax cross-entropy over the batch with manual backpropagation;
// BnTrain differentiates through the batch statistics.
LossGrad loss_and_grad(const Network& net, const Mat& X, const std::vector<int>& y,
                       TrainMode mode, std::vector<BatchStats>* stats_out = nullptr);

double compute_loss(const Network& net, const Mat& X, const std::vector<int>& y,
                    TrainMode mode);

double accuracy(const Network& net, const Mat& X, const std::vector<int>& y,
                const EvalMode& mode);

struct TrainConfig {
  std::vector<std::size_t> hidden_widths;
  bool use_bn = false;
  std::size_t epochs = 100;
  double learning_rate = 1e-4;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  double val_fraction = 0.25;
  std::vector<std::size_t> checkpoint_epochs;
  CpaActivation activation = CpaActivation::relu();
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<EpochMetrics> metrics;
  std::map<std::size_t, Network> checkpoints;
  std::vector<std::size_t> train_indices;  // the held-in split, in dataset order
  std::vector<std::size_t> val_indices;
};

// Deterministic Adam training with a BN/non-BN-matched shuffling stream;
// the last incomplete mini-batch of each epoch is dropped.
TrainResult train(const Dataset& data, const TrainConfig& cfg);

// The training-row permutation used in a given epoch (1-based); a pure
// function of (seed, epoch, n), shared by BN and non-BN runs.
std::vector<std::size_t> epoch_permutation(std::uint64_t seed, std::size_t epoch,
                                           std::size_t n);

// Uniform sample without replacement of `m` training rows, for reference
// batches; the stream is independent of the training stream.
Mat sample_reference_batch(const Dataset& data, const std::vector<std::size_t>& pool,
                           std::size_t m, std::uint64_t seed);

}  // namespace cpageo
