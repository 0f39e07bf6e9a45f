#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cpageo/network.hpp"
#include "cpageo/rng.hpp"
#include "test_util.hpp"

using namespace cpageo;

namespace {

Network identity_relu_net() {
  // W = I, b = 0, ReLU, output W = I
  Network net = Network::mlp(2, {2}, 2, CpaActivation::relu(), false);
  net.block(0).linear.W = Mat::identity(2);
  net.output_layer().W = Mat::identity(2);
  return net;
}

}  // namespace

TEST_CASE("identity relu forward") {
  const Network net = identity_relu_net();
  const Vec out = forward(net, {1.0, -1.0}, EvalMode::no_bn());
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 0.0);
}

TEST_CASE("singleton frozen batch standardizes to beta") {
  Network net = Network::mlp(2, {3}, 2, CpaActivation::relu(), true);
  Rng rng(2);
  net.block(0).linear.W = testutil::random_mat(rng, 3, 2, -1.0, 1.0);
  net.output_layer().W = testutil::random_mat(rng, 2, 3, -1.0, 1.0);
  Mat batch(1, 2);
  batch(0, 0) = 0.7;
  batch(0, 1) = -0.2;
  const FrozenBatch fb = freeze_batch(net, batch);
  const ForwardTrace tr = forward_trace(net, {0.7, -0.2}, EvalMode::bn_frozen(fb));
  for (double zh : tr.layers[0].z_hat) CHECK(zh == doctest::Approx(0.0));  // beta = 0
}

TEST_CASE("frozen forward matches a stepwise re-implementation") {
  const Network net = testutil::random_net(2, {8, 8}, 3, true, 42);
  Rng rng(42);
  const Mat batch = testutil::random_mat(rng, 32, 2, -1.5, 1.5);
  const FrozenBatch fb = freeze_batch(net, batch);

  // independent stepwise evaluation of the frozen-batch map
  Vec centroid(2, 0.0);
  for (std::size_t i = 0; i < batch.rows; ++i) {
    centroid[0] += batch(i, 0);
    centroid[1] += batch(i, 1);
  }
  centroid[0] /= static_cast<double>(batch.rows);
  centroid[1] /= static_cast<double>(batch.rows);

  const Vec x = centroid;
  Vec h = x;
  const CpaActivation& act = net.activation();
  for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
    const HiddenBlock& blk = net.block(l);
    Vec z = add(matvec(blk.linear.W, h), blk.linear.b);
    const BatchStats& st = fb.per_block[l];
    for (std::size_t j = 0; j < z.size(); ++j)
      z[j] = blk.bn.gamma[j] * (z[j] - st.mu[j]) / std::sqrt(st.var[j] + blk.bn.eps) +
             blk.bn.beta[j];
    for (double& t : z) t = act.eval(t);
    h = z;
  }
  const Vec expected = add(matvec(net.output_layer().W, h), net.output_layer().b);
  const Vec got = forward(net, x, EvalMode::bn_frozen(fb));
  for (std::size_t j = 0; j < got.size(); ++j)
    CHECK(got[j] == doctest::Approx(expected[j]).epsilon(1e-12));
}

TEST_CASE("activation pattern for a single neuron") {
  Network net = Network::mlp(2, {1}, 1, CpaActivation::relu(), false);
  net.block(0).linear.W(0, 0) = 1.0;
  net.output_layer().W(0, 0) = 1.0;
  CHECK(activation_pattern(net, {1.0, 0.0}, EvalMode::no_bn()) ==
        ActivationPattern{2});
  CHECK(activation_pattern(net, {-1.0, 0.0}, EvalMode::no_bn()) ==
        ActivationPattern{1});
  CHECK_THROWS_AS(activation_pattern(net, {0.0, 5.0}, EvalMode::no_bn()),
                  BreakpointHit);
}

TEST_CASE("linear activation collapses to a matrix product") {
  Network net = testutil::random_net(2, {4, 3}, 2, false, 5,
                                     CpaActivation::leaky_relu(1.0));
  const ActivationPattern pattern(7, 2);  // identity piece everywhere
  const AffineMap m = region_affine_map(net, pattern, EvalMode::no_bn());
  const Mat product = matmul(net.output_layer().W,
                             matmul(net.block(1).linear.W, net.block(0).linear.W));
  for (std::size_t i = 0; i < product.rows; ++i)
    for (std::size_t j = 0; j < product.cols; ++j)
      CHECK(m.A(i, j) == doctest::Approx(product(i, j)).epsilon(1e-12));
}

TEST_CASE("dead relu pattern zeroes the affine part") {
  Network net = Network::mlp(2, {1}, 1, CpaActivation::relu(), false);
  net.block(0).linear.W(0, 0) = 2.0;
  net.block(0).linear.W(0, 1) = -1.0;
  net.output_layer().W(0, 0) = 3.0;
  net.output_layer().b[0] = 0.25;
  const AffineMap m = region_affine_map(net, {1}, EvalMode::no_bn());
  CHECK(m.A(0, 0) == 0.0);
  CHECK(m.A(0, 1) == 0.0);
  CHECK(m.b[0] == 0.25);
}

TEST_CASE("region affine map agrees with forward at the defining point") {
  Rng rng(100);
  for (int trial = 0; trial < 1000; ++trial) {
    const bool bn = trial % 2 == 0;
    const Network net =
        testutil::random_net(2, {5, 4}, 2, bn, 1000 + static_cast<std::uint64_t>(trial));
    Mat batch = testutil::random_mat(rng, 8, 2, -1.0, 1.0);
    const FrozenBatch fb = bn ? freeze_batch(net, batch) : FrozenBatch{};
    const EvalMode mode = bn ? EvalMode::bn_frozen(fb) : EvalMode::no_bn();
    const Vec x = testutil::random_vec(rng, 2, -2.0, 2.0);
    ActivationPattern pattern;
    try {
      pattern = activation_pattern(net, x, mode);
    } catch (const BreakpointHit&) {
      continue;  // measure-zero switching set
    }
    const AffineMap m = region_affine_map(net, pattern, mode);
    const Vec direct = forward(net, x, mode);
    const Vec via_map = m.apply(x);
    for (std::size_t j = 0; j < direct.size(); ++j) {
      const double scale = 1.0 + std::fabs(direct[j]);
      CHECK(std::fabs(via_map[j] - direct[j]) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("forward is continuous across breakpoint crossings") {
  Rng rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    const Network net =
        testutil::random_net(2, {6, 6}, 2, false, 2000 + static_cast<std::uint64_t>(trial));
    const Vec a = testutil::random_vec(rng, 2, -1.5, 1.5);
    const Vec b = testutil::random_vec(rng, 2, -1.5, 1.5);
    // walk the segment; the map must be continuous even when the pattern flips
    Vec prev = forward(net, a, EvalMode::no_bn());
    const int steps = 200;
    for (int s = 1; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      const Vec x{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
      const Vec cur = forward(net, x, EvalMode::no_bn());
      for (std::size_t j = 0; j < cur.size(); ++j)
        CHECK(std::fabs(cur[j] - prev[j]) < 1.0);  // no jumps at this step size
      prev = cur;
    }
  }
}

TEST_CASE("mode errors") {
  const Network net = testutil::random_net(2, {3}, 2, true, 1);
  CHECK_THROWS_AS(forward(net, {1.0, 2.0, 3.0}, EvalMode::no_bn()),
                  DimensionMismatch);
  EvalMode bad{ModeKind::BnFrozen, nullptr};
  CHECK_THROWS_AS(forward(net, {1.0, 2.0}, bad), MissingFrozenStats);
}

TEST_CASE("bn_eval equals bn_frozen when running stats equal frozen stats") {
  Network net = testutil::random_net(2, {4}, 2, true, 77);
  Rng rng(78);
  const Mat batch = testutil::random_mat(rng, 16, 2, -1.0, 1.0);
  const FrozenBatch fb = freeze_batch(net, batch);
  net.block(0).bn.running_mean = fb.per_block[0].mu;
  net.block(0).bn.running_var = fb.per_block[0].var;
  for (int k = 0; k < 20; ++k) {
    const Vec x = testutil::random_vec(rng, 2, -2.0, 2.0);
    const Vec a = forward(net, x, EvalMode::bn_eval());
    const Vec b = forward(net, x, EvalMode::bn_frozen(fb));
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
  }
}
