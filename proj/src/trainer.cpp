#include "cpageo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpageo/rng.hpp"

namespace cpageo {

int Dataset::num_classes() const {
  int c = 0;
  for (int l : labels) c = std::max(c, l + 1);
  return c;
}

Vec Dataset::centroid() const {
  Vec m(dim(), 0.0);
  for (std::size_t i = 0; i < n(); ++i)
    for (std::size_t j = 0; j < dim(); ++j) m[j] += X(i, j);
  for (double& x : m) x /= static_cast<double>(n());
  return m;
}

std::vector<Vec> Dataset::class_centroids() const {
  const int c = num_classes();
  std::vector<Vec> centers(static_cast<std::size_t>(c), Vec(dim(), 0.0));
  std::vector<std::size_t> counts(static_cast<std::size_t>(c), 0);
  for (std::size_t i = 0; i < n(); ++i) {
    const auto li = static_cast<std::size_t>(labels[i]);
    ++counts[li];
    for (std::size_t j = 0; j < dim(); ++j) centers[li][j] += X(i, j);
  }
  for (std::size_t li = 0; li < centers.size(); ++li)
    if (counts[li] > 0)
      for (double& x : centers[li]) x /= static_cast<double>(counts[li]);
  return centers;
}

std::vector<double> Dataset::class_weights() const {
  const int c = num_classes();
  std::vector<double> w(static_cast<std::size_t>(c), 0.0);
  for (int l : labels) w[static_cast<std::size_t>(l)] += 1.0;
  for (double& x : w) x /= static_cast<double>(n());
  return w;
}

namespace {

void shuffle_dataset(Dataset& d, Rng& rng) {
  std::vector<std::size_t> idx(d.n());
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  Mat X2(d.n(), d.dim());
  std::vector<int> l2(d.n());
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t j = 0; j < d.dim(); ++j) X2(i, j) = d.X(idx[i], j);
    l2[i] = d.labels[idx[i]];
  }
  d.X = std::move(X2);
  d.labels = std::move(l2);
}

}  // namespace

Dataset gen_two_moons(std::size_t n, double noise, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.name = "two-moons";
  d.seed = seed;
  d.X = Mat(n, 2);
  d.labels.resize(n);
  const std::size_t m_out = n / 2;
  const std::size_t m_in = n - m_out;
  for (std::size_t i = 0; i < m_out; ++i) {
    const double t = M_PI * static_cast<double>(i) /
                     static_cast<double>(std::max<std::size_t>(m_out - 1, 1));
    d.X(i, 0) = std::cos(t);
    d.X(i, 1) = std::sin(t);
    d.labels[i] = 0;
  }
  for (std::size_t i = 0; i < m_in; ++i) {
    const double t = M_PI * static_cast<double>(i) /
                     static_cast<double>(std::max<std::size_t>(m_in - 1, 1));
    d.X(m_out + i, 0) = 1.0 - std::cos(t);
    d.X(m_out + i, 1) = 0.5 - std::sin(t);
    d.labels[m_out + i] = 1;
  }
  if (noise > 0.0)
    for (std::size_t i = 0; i < n; ++i) {
      d.X(i, 0) += noise * rng.normal();
      d.X(i, 1) += noise * rng.normal();
    }
  shuffle_dataset(d, rng);
  return d;
}

Dataset gen_gaussian_quantiles(std::size_t n, int classes, std::uint64_t seed) {
  if (classes < 1 || n < static_cast<std::size_t>(classes))
    throw Error("gen_gaussian_quantiles: need n >= classes >= 1");
  Rng rng(seed);
  Dataset d;
  d.name = "gauss-quantiles";
  d.seed = seed;
  d.X = Mat(n, 2);
  d.labels.assign(n, 0);
  std::vector<double> r2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.X(i, 0) = rng.normal();
    d.X(i, 1) = rng.normal();
    r2[i] = d.X(i, 0) * d.X(i, 0) + d.X(i, 1) * d.X(i, 1);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return r2[a] < r2[b]; });
  for (std::size_t rank = 0; rank < n; ++rank)
    d.labels[order[rank]] =
        static_cast<int>(rank * static_cast<std::size_t>(classes) / n);
  shuffle_dataset(d, rng);
  return d;
}

Dataset gen_random_uniform(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.name = "random-uniform";
  d.seed = seed;
  d.X = Mat(n, 2);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.X(i, 0) = rng.uniform(-0.5, 4.5);
    d.X(i, 1) = rng.uniform(-0.5, 4.5);
    d.labels[i] = (d.X(i, 0) + d.X(i, 1) > 4.0) ? 1 : 0;
  }
  return d;
}

Dataset generate_dataset(const std::string& name, std::size_t n, std::uint64_t seed) {
  if (name == "two-moons") return gen_two_moons(n, 0.1, seed);
  if (name == "gauss-quantiles") return gen_gaussian_quantiles(n, 5, seed);
  if (name == "random-uniform") return gen_random_uniform(n, seed);
  throw Error("unknown dataset: " + name);
}

void init_kaiming_uniform(Network& net, std::uint64_t seed) {
  Rng rng(seed);
  const double gain = net.activation().is_relu_family() ? std::sqrt(2.0) : 1.0;
  auto init_linear = [&](LinearLayer& lin) {
    const double fan_in = static_cast<double>(lin.in_dim());
    const double w_bound = std::sqrt(6.0 / fan_in) * gain;
    const double b_bound = 1.0 / std::sqrt(fan_in);
    for (double& w : lin.W.data) w = rng.uniform(-w_bound, w_bound);
    for (double& b : lin.b) b = rng.uniform(-b_bound, b_bound);
  };
  for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
    init_linear(net.block(l).linear);
    BatchNormSlot& bn = net.block(l).bn;
    if (bn.present) {
      std::fill(bn.gamma.begin(), bn.gamma.end(), 1.0);
      std::fill(bn.beta.begin(), bn.beta.end(), 0.0);
      std::fill(bn.running_mean.begin(), bn.running_mean.end(), 0.0);
      std::fill(bn.running_var.begin(), bn.running_var.end(), 1.0);
    }
  }
  init_linear(net.output_layer());
}

namespace {

struct LayerCache {
  Mat z;      // M x width, raw pre-activation
  Mat x_hat;  // standardized (BN layers only)
  Mat h;      // post-activation
  Mat slope;  // active piece slopes at z_hat
  BatchStats stats;
  bool bn = false;
};

Mat linear_forward(const Mat& H, const LinearLayer& lin) {
  Mat Z(H.rows, lin.out_dim());
  for (std::size_t i = 0; i < H.rows; ++i)
    for (std::size_t j = 0; j < lin.out_dim(); ++j) {
      double s = lin.b[j];
      const double* w = lin.W.row(j);
      for (std::size_t k = 0; k < H.cols; ++k) s += w[k] * H(i, k);
      Z(i, j) = s;
    }
  return Z;
}

double softmax_ce(const Mat& logits, const std::vector<int>& y, Mat* dlogits) {
  const std::size_t m = logits.rows, c = logits.cols;
  double loss = 0.0;
  if (dlogits != nullptr) *dlogits = Mat(m, c);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = logits(i, 0);
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, logits(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp(logits(i, j) - mx);
    const auto yi = static_cast<std::size_t>(y[i]);
    loss += -(logits(i, yi) - mx) + std::log(denom);
    if (dlogits != nullptr)
      for (std::size_t j = 0; j < c; ++j) {
        const double p = std::exp(logits(i, j) - mx) / denom;
        (*dlogits)(i, j) = (p - (j == yi ? 1.0 : 0.0)) / static_cast<double>(m);
      }
  }
  return loss / static_cast<double>(m);
}

}  // namespace

LossGrad loss_and_grad(const Network& net, const Mat& X, const std::vector<int>& y,
                       TrainMode mode, std::vector<BatchStats>* stats_out) {
  if (X.rows != y.size()) throw DimensionMismatch("loss_and_grad: X/y mismatch");
  const std::size_t m = X.rows;
  const std::size_t depth = net.hidden_layer_count();
  const CpaActivation& act = net.activation();

  std::vector<LayerCache> cache(depth);
  Mat h = X;
  for (std::size_t l = 0; l < depth; ++l) {
    const HiddenBlock& blk = net.block(l);
    LayerCache& c = cache[l];
    c.z = linear_forward(h, blk.linear);
    c.bn = blk.bn.present && mode == TrainMode::BnTrain;
    const std::size_t width = blk.linear.out_dim();
    c.h = Mat(m, width);
    c.slope = Mat(m, width);
    if (c.bn) {
      c.stats = batch_stats(c.z);
      c.x_hat = Mat(m, width);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < width; ++j) {
          const double xh =
              (c.z(i, j) - c.stats.mu[j]) / std::sqrt(c.stats.var[j] + blk.bn.eps);
          c.x_hat(i, j) = xh;
          const double zh = blk.bn.gamma[j] * xh + blk.bn.beta[j];
          const int piece = act.piece_index_unchecked(zh);
          c.h(i, j) = act.slope(piece) * zh + act.intercept(piece);
          c.slope(i, j) = act.slope(piece);
        }
    } else {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < width; ++j) {
          const double zh = c.z(i, j);
          const int piece = act.piece_index_unchecked(zh);
          c.h(i, j) = act.slope(piece) * zh + act.intercept(piece);
          c.slope(i, j) = act.slope(piece);
        }
    }
    h = c.h;
  }
  const Mat logits = linear_forward(h, net.output_layer());

  LossGrad out;
  Mat g;  // dloss/dlogits
  out.loss = softmax_ce(logits, y, &g);
  if (!std::isfinite(out.loss)) throw NonFiniteLoss("loss is not finite");

  // output layer
  const Mat& h_last = depth > 0 ? cache[depth - 1].h : X;
  out.grad.dW_out = Mat(net.output_dim(), h_last.cols);
  out.grad.db_out = Vec(net.output_dim(), 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < net.output_dim(); ++j) {
      out.grad.db_out[j] += g(i, j);
      for (std::size_t k = 0; k < h_last.cols; ++k)
        out.grad.dW_out(j, k) += g(i, j) * h_last(i, k);
    }
  // dH = g * W_out
  Mat dh(m, h_last.cols);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < h_last.cols; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < net.output_dim(); ++j)
        s += g(i, j) * net.output_layer().W(j, k);
      dh(i, k) = s;
    }

  out.grad.dW.resize(depth);
  out.grad.db.resize(depth);
  out.grad.dgamma.resize(depth);
  out.grad.dbeta.resize(depth);

  for (std::size_t li = depth; li-- > 0;) {
    const HiddenBlock& blk = net.block(li);
    const LayerCache& c = cache[li];
    const std::size_t width = blk.linear.out_dim();

    Mat dz_hat(m, width);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < width; ++j)
        dz_hat(i, j) = dh(i, j) * c.slope(i, j);

    Mat dz;
    if (c.bn) {
      out.grad.dgamma[li] = Vec(width, 0.0);
      out.grad.dbeta[li] = Vec(width, 0.0);
      Vec sum_dxhat(width, 0.0), sum_dxhat_xhat(width, 0.0);
      Mat dxhat(m, width);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < width; ++j) {
          out.grad.dgamma[li][j] += dz_hat(i, j) * c.x_hat(i, j);
          out.grad.dbeta[li][j] += dz_hat(i, j);
          dxhat(i, j) = dz_hat(i, j) * blk.bn.gamma[j];
          sum_dxhat[j] += dxhat(i, j);
          sum_dxhat_xhat[j] += dxhat(i, j) * c.x_hat(i, j);
        }
      dz = Mat(m, width);
      const double inv_m = 1.0 / static_cast<double>(m);
      for (std::size_t j = 0; j < width; ++j) {
        const double inv_std = 1.0 / std::sqrt(c.stats.var[j] + blk.bn.eps);
        for (std::size_t i = 0; i < m; ++i)
          dz(i, j) = inv_m * inv_std *
                     (static_cast<double>(m) * dxhat(i, j) - sum_dxhat[j] -
                      c.x_hat(i, j) * sum_dxhat_xhat[j]);
      }
    } else {
      dz = std::move(dz_hat);
    }

    const Mat& h_prev = li > 0 ? cache[li - 1].h : X;
    out.grad.dW[li] = Mat(width, h_prev.cols);
    out.grad.db[li] = Vec(width, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < width; ++j) {
        out.grad.db[li][j] += dz(i, j);
        for (std::size_t k = 0; k < h_prev.cols; ++k)
          out.grad.dW[li](j, k) += dz(i, j) * h_prev(i, k);
      }
    if (li > 0) {
      Mat dprev(m, h_prev.cols);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < h_prev.cols; ++k) {
          double s = 0.0;
          for (std::size_t j = 0; j < width; ++j)
            s += dz(i, j) * blk.linear.W(j, k);
          dprev(i, k) = s;
        }
      dh = std::move(dprev);
    }
  }

  if (stats_out != nullptr) {
    stats_out->clear();
    for (const LayerCache& c : cache) stats_out->push_back(c.stats);
  }
  return out;
}

double compute_loss(const Network& net, const Mat& X, const std::vector<int>& y,
                    TrainMode mode) {
  const std::size_t m = X.rows;
  const CpaActivation& act = net.activation();
  Mat h = X;
  for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
    const HiddenBlock& blk = net.block(l);
    Mat z = linear_forward(h, blk.linear);
    if (blk.bn.present && mode == TrainMode::BnTrain) {
      const BatchStats stats = batch_stats(z);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < z.cols; ++j)
          z(i, j) = blk.bn.gamma[j] * (z(i, j) - stats.mu[j]) /
                        std::sqrt(stats.var[j] + blk.bn.eps) +
                    blk.bn.beta[j];
    }
    for (double& t : z.data) t = act.eval(t);
    h = std::move(z);
  }
  return softmax_ce(linear_forward(h, net.output_layer()), y, nullptr);
}

double accuracy(const Network& net, const Mat& X, const std::vector<int>& y,
                const EvalMode& mode) {
  if (X.rows == 0) return 0.0;
  std::size_t hits = 0;
  Vec x(X.cols);
  for (std::size_t i = 0; i < X.rows; ++i) {
    for (std::size_t j = 0; j < X.cols; ++j) x[j] = X(i, j);
    const Vec out = forward(net, x, mode);
    std::size_t best = 0;
    for (std::size_t j = 1; j < out.size(); ++j)
      if (out[j] > out[best]) best = j;
    if (static_cast<int>(best) == y[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(X.rows);
}

namespace {

struct AdamState {
  std::vector<double> m, v;
  std::size_t t = 0;

  void init(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
};

class AdamOptimizer {
 public:
  AdamOptimizer(const TrainConfig& cfg) : cfg_(cfg) {}

  void register_params(std::vector<double*> tensors,
                       std::vector<std::size_t> sizes) {
    params_ = std::move(tensors);
    sizes_ = std::move(sizes);
    std::size_t total = 0;
    for (std::size_t s : sizes_) total += s;
    state_.init(total);
  }

  void step(const std::vector<const double*>& grads) {
    ++state_.t;
    const double bc1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(state_.t));
    const double bc2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(state_.t));
    std::size_t off = 0;
    for (std::size_t p = 0; p < params_.size(); ++p) {
      double* w = params_[p];
      const double* gptr = grads[p];
      for (std::size_t i = 0; i < sizes_[p]; ++i) {
        const double gi = gptr[i];
        double& mi = state_.m[off + i];
        double& vi = state_.v[off + i];
        mi = cfg_.adam_beta1 * mi + (1.0 - cfg_.adam_beta1) * gi;
        vi = cfg_.adam_beta2 * vi + (1.0 - cfg_.adam_beta2) * gi * gi;
        w[i] -= cfg_.learning_rate * (mi / bc1) / (std::sqrt(vi / bc2) + cfg_.adam_eps);
      }
      off += sizes_[p];
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<double*> params_;
  std::vector<std::size_t> sizes_;
  AdamState state_;
};

constexpr std::uint64_t kShuffleSalt = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kSplitSalt = 0xd1b54a32d192ed03ull;

}  // namespace

std::vector<std::size_t> epoch_permutation(std::uint64_t seed, std::size_t epoch,
                                           std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed ^ kShuffleSalt ^ (0x100000001b3ull * epoch));
  rng.shuffle(perm);
  return perm;
}

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  if (cfg.batch_size == 0 || cfg.batch_size > data.n())
    throw Error("train: batch size must be in [1, n]");

  Network net = Network::mlp(data.dim(), cfg.hidden_widths,
                             static_cast<std::size_t>(data.num_classes()),
                             cfg.activation, cfg.use_bn, cfg.bn_eps,
                             cfg.bn_momentum);
  init_kaiming_uniform(net, cfg.seed);

  // validation split fixed by the dataset seed
  std::vector<std::size_t> idx(data.n());
  std::iota(idx.begin(), idx.end(), 0);
  Rng split_rng(data.seed ^ kSplitSalt);
  split_rng.shuffle(idx);
  const std::size_t n_val =
      static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(data.n()));

  TrainResult result{net, {}, {}, {}, {}};
  result.val_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  result.train_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  std::sort(result.val_indices.begin(), result.val_indices.end());
  std::sort(result.train_indices.begin(), result.train_indices.end());

  const std::size_t n_train = result.train_indices.size();
  Mat x_train(n_train, data.dim());
  std::vector<int> y_train(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j)
      x_train(i, j) = data.X(result.train_indices[i], j);
    y_train[i] = data.labels[result.train_indices[i]];
  }
  Mat x_val(result.val_indices.size(), data.dim());
  std::vector<int> y_val(result.val_indices.size());
  for (std::size_t i = 0; i < result.val_indices.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j)
      x_val(i, j) = data.X(result.val_indices[i], j);
    y_val[i] = data.labels[result.val_indices[i]];
  }

  const TrainMode mode = cfg.use_bn ? TrainMode::BnTrain : TrainMode::NoBn;
  const EvalMode eval_mode = cfg.use_bn ? EvalMode::bn_eval() : EvalMode::no_bn();

  auto want_checkpoint = [&](std::size_t epoch) {
    return std::find(cfg.checkpoint_epochs.begin(), cfg.checkpoint_epochs.end(),
                     epoch) != cfg.checkpoint_epochs.end();
  };
  if (want_checkpoint(0)) result.checkpoints.emplace(0, net);

  AdamOptimizer adam(cfg);
  {
    std::vector<double*> tensors;
    std::vector<std::size_t> sizes;
    for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
      HiddenBlock& blk = net.block(l);
      tensors.push_back(blk.linear.W.data.data());
      sizes.push_back(blk.linear.W.data.size());
      tensors.push_back(blk.linear.b.data());
      sizes.push_back(blk.linear.b.size());
      if (blk.bn.present) {
        tensors.push_back(blk.bn.gamma.data());
        sizes.push_back(blk.bn.gamma.size());
        tensors.push_back(blk.bn.beta.data());
        sizes.push_back(blk.bn.beta.size());
      }
    }
    tensors.push_back(net.output_layer().W.data.data());
    sizes.push_back(net.output_layer().W.data.size());
    tensors.push_back(net.output_layer().b.data());
    sizes.push_back(net.output_layer().b.size());
    adam.register_params(std::move(tensors), std::move(sizes));
  }

  const std::size_t batches = n_train / cfg.batch_size;  // drop the remainder

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // the shuffling stream must match between BN and non-BN runs
    const std::vector<std::size_t> perm =
        epoch_permutation(cfg.seed, epoch, n_train);
    double epoch_loss = 0.0;

    for (std::size_t bidx = 0; bidx < batches; ++bidx) {
      Mat xb(cfg.batch_size, data.dim());
      std::vector<int> yb(cfg.batch_size);
      for (std::size_t i = 0; i < cfg.batch_size; ++i) {
        const std::size_t src = perm[bidx * cfg.batch_size + i];
        for (std::size_t j = 0; j < data.dim(); ++j) xb(i, j) = x_train(src, j);
        yb[i] = y_train[src];
      }
      std::vector<BatchStats> stats;
      const LossGrad lg = loss_and_grad(net, xb, yb, mode, &stats);
      epoch_loss += lg.loss;

      if (cfg.use_bn)
        for (std::size_t l = 0; l < net.hidden_layer_count(); ++l)
          if (net.block(l).bn.present)
            update_running_stats(net.block(l).bn, stats[l]);

      std::vector<const double*> grads;
      for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
        grads.push_back(lg.grad.dW[l].data.data());
        grads.push_back(lg.grad.db[l].data());
        if (net.block(l).bn.present) {
          grads.push_back(lg.grad.dgamma[l].data());
          grads.push_back(lg.grad.dbeta[l].data());
        }
      }
      grads.push_back(lg.grad.dW_out.data.data());
      grads.push_back(lg.grad.db_out.data());
      adam.step(grads);
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.loss = batches > 0 ? epoch_loss / static_cast<double>(batches) : 0.0;
    em.train_acc = accuracy(net, x_train, y_train, eval_mode);
    em.val_acc = accuracy(net, x_val, y_val, eval_mode);
    result.metrics.push_back(em);

    if (want_checkpoint(epoch)) result.checkpoints.emplace(epoch, net);
  }

  result.net = net;
  return result;
}

Mat sample_reference_batch(const Dataset& data, const std::vector<std::size_t>& pool,
                           std::size_t m, std::uint64_t seed) {
  if (m == 0 || m > pool.size())
    throw Error("sample_reference_batch: batch size out of range");
  std::vector<std::size_t> idx = pool;
  Rng rng(seed);
  rng.shuffle(idx);
  Mat batch(m, data.dim());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < data.dim(); ++j) batch(i, j) = data.X(idx[i], j);
  return batch;
}

}  // namespace cpageo
