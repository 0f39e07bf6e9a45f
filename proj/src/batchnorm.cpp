#include "cpageo/batchnorm.hpp"

#include <cmath>

#include "cpageo/hash.hpp"
#include "cpageo/network.hpp"

namespace cpageo {

BatchStats batch_stats(const Mat& Z) {
  if (Z.rows == 0) throw Error("batch_stats: need M >= 1");
  const std::size_t m = Z.rows, width = Z.cols;
  BatchStats s;
  s.batch_size = m;
  s.mu.assign(width, 0.0);
  s.var.assign(width, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < width; ++j) s.mu[j] += Z(i, j);
  for (std::size_t j = 0; j < width; ++j) s.mu[j] /= static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < width; ++j) {
      const double d = Z(i, j) - s.mu[j];
      s.var[j] += d * d;
    }
  for (std::size_t j = 0; j < width; ++j) s.var[j] /= static_cast<double>(m);
  return s;
}

Vec bn_train_transform(const Vec& z, const BatchStats& stats, const Vec& gamma,
                       const Vec& beta, double eps) {
  if (z.size() != stats.mu.size() || z.size() != gamma.size() || z.size() != beta.size())
    throw DimensionMismatch("bn_train_transform: size mismatch");
  if (!(eps > 0.0)) throw Error("bn_train_transform: eps must be positive");
  Vec out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    out[j] = gamma[j] * (z[j] - stats.mu[j]) / std::sqrt(stats.var[j] + eps) + beta[j];
  return out;
}

Vec bn_eval_transform(const Vec& z, const Vec& running_mean, const Vec& running_var,
                      const Vec& gamma, const Vec& beta, double eps) {
  BatchStats stats;
  stats.mu = running_mean;
  stats.var = running_var;
  stats.batch_size = 0;
  return bn_train_transform(z, stats, gamma, beta, eps);
}

BnAffine bn_as_affine(const Vec& gamma, const Vec& beta, double eps,
                      const BatchStats& stats, const Vec& raw_bias) {
  if (!(eps > 0.0)) throw Error("bn_as_affine: eps must be positive");
  if (gamma.size() != stats.mu.size() || raw_bias.size() != gamma.size())
    throw DimensionMismatch("bn_as_affine: size mismatch");
  BnAffine a;
  a.scale.resize(gamma.size());
  a.shift.resize(gamma.size());
  for (std::size_t j = 0; j < gamma.size(); ++j) {
    a.scale[j] = gamma[j] / std::sqrt(stats.var[j] + eps);
    a.shift[j] = a.scale[j] * (raw_bias[j] - stats.mu[j]) + beta[j];
  }
  return a;
}

std::string batch_content_hash(const Mat& batch) {
  std::uint64_t h = fnv1a64(batch.data.data(), batch.data.size() * sizeof(double));
  h = fnv1a64(&batch.cols, sizeof(batch.cols), h);
  return to_hex(h);
}

FrozenBatch freeze_batch(const Network& net, const Mat& batch) {
  if (batch.cols != net.input_dim())
    throw DimensionMismatch("freeze_batch: batch dimension mismatch");
  if (batch.rows == 0) throw Error("freeze_batch: need M >= 1");

  FrozenBatch fb;
  fb.reference_batch_id = batch_content_hash(batch);
  fb.per_block.reserve(net.hidden_layer_count());

  Mat h = batch;  // M x D_{l-1}
  const CpaActivation& act = net.activation();
  for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
    const HiddenBlock& blk = net.block(l);
    const std::size_t width = blk.linear.out_dim();
    Mat z(h.rows, width);
    for (std::size_t i = 0; i < h.rows; ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        double s = blk.linear.b[j];
        const double* wr = blk.linear.W.row(j);
        for (std::size_t k = 0; k < h.cols; ++k) s += wr[k] * h(i, k);
        z(i, j) = s;
      }
    }
    BatchStats stats = batch_stats(z);
    Mat next(h.rows, width);
    for (std::size_t i = 0; i < h.rows; ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        double t = z(i, j);
        if (blk.bn.present)
          t = blk.bn.gamma[j] * (t - stats.mu[j]) / std::sqrt(stats.var[j] + blk.bn.eps) +
              blk.bn.beta[j];
        next(i, j) = act.eval(t);
      }
    }
    fb.per_block.push_back(std::move(stats));
    h = std::move(next);
  }
  return fb;
}

void update_running_stats(BatchNormSlot& slot, const BatchStats& stats) {
  if (!(slot.momentum > 0.0 && slot.momentum <= 1.0))
    throw Error("update_running_stats: momentum must be in (0, 1]");
  for (std::size_t j = 0; j < slot.running_mean.size(); ++j) {
    slot.running_mean[j] = (1.0 - slot.momentum) * slot.running_mean[j] +
                           slot.momentum * stats.mu[j];
    slot.running_var[j] = (1.0 - slot.momentum) * slot.running_var[j] +
                          slot.momentum * stats.var[j];
  }
}

}  // namespace cpageo
