#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cpageo/enumeration.hpp"
#include "test_util.hpp"

using namespace cpageo;

TEST_CASE("pullback at layer 1 is trivially equal") {
  const Network net = testutil::random_net(2, {6}, 2, false, 100);
  const Window domain{{0.0, 0.0}, 2.0};
  const PullbackReport rep = pullback_check(net, EvalMode::no_bn(), 1,
                                            {0.1, -0.2}, 0.5, domain);
  CHECK(rep.rank == 2);
  CHECK(rep.sigma_min == doctest::Approx(1.0));
  CHECK(rep.jacobian == doctest::Approx(1.0));
  CHECK(rep.counts_equal);
  CHECK(rep.in_region_support >= 0.95);
}

TEST_CASE("orthonormal prefix gives unit jacobian") {
  // rotation as the first layer; large bias keeps every relu active, so the
  // parent region covers the whole window and the prefix embedding is (R, b)
  Network net = Network::mlp(2, {2, 3}, 2, CpaActivation::relu(), false);
  const double th = 0.7;
  net.block(0).linear.W(0, 0) = std::cos(th);
  net.block(0).linear.W(0, 1) = -std::sin(th);
  net.block(0).linear.W(1, 0) = std::sin(th);
  net.block(0).linear.W(1, 1) = std::cos(th);
  net.block(0).linear.b[0] = 10.0;
  net.block(0).linear.b[1] = 10.0;
  Rng rng(101);
  for (double& w : net.block(1).linear.W.data) w = rng.uniform(-1.0, 1.0);
  for (double& b : net.block(1).linear.b) b = rng.uniform(-0.5, 0.5);
  for (double& w : net.output_layer().W.data) w = rng.uniform(-1.0, 1.0);
  const Window domain{{0.0, 0.0}, 2.0};
  const PullbackReport rep = pullback_check(net, EvalMode::no_bn(), 2,
                                            {0.3, 0.1}, 0.4, domain);
  CHECK(rep.jacobian == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.sigma_min == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.counts_equal);
}

TEST_CASE("pullback counts agree on random deep nets") {
  Rng rng(102);
  int retained = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const bool bn = trial % 2 == 0;
    const Network net = testutil::random_net(
        2, {8, 6}, 2, bn, 500 + static_cast<std::uint64_t>(trial));
    const Mat batch = testutil::random_mat(rng, 16, 2, -1.0, 1.0);
    const FrozenBatch fb = bn ? freeze_batch(net, batch) : FrozenBatch{};
    const EvalMode mode = bn ? EvalMode::bn_frozen(fb) : EvalMode::no_bn();
    const Window domain{{0.0, 0.0}, 2.0};
    const Network prefix = prefix_network(net, 1);
    const EnumerationResult prefix_cells = enumerate_regions(prefix, mode, domain);
    for (int k = 0; k < 6; ++k) {
      const Vec anchor{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      for (double r : {0.5, 0.25, 0.1, 0.05}) {
        try {
          const PullbackReport rep =
              pullback_check(net, mode, 2, anchor, r, prefix_cells);
          CHECK(rep.counts_equal);
          CHECK(rep.rank == 2);
          ++retained;
          break;
        } catch (const WindowNotContained&) {
        } catch (const RankDeficient&) {
          break;
        }
      }
    }
  }
  CHECK(retained >= 20);
}

TEST_CASE("rank-deficient prefix raises") {
  Network net = Network::mlp(2, {1, 3}, 2, CpaActivation::leaky_relu(1.0), false);
  net.block(0).linear.W(0, 0) = 1.0;
  net.block(0).linear.W(0, 1) = 0.5;  // rank-1 prefix into width 1
  Rng rng(103);
  for (double& w : net.block(1).linear.W.data) w = rng.uniform(-1.0, 1.0);
  for (double& w : net.output_layer().W.data) w = rng.uniform(-1.0, 1.0);
  const Window domain{{0.0, 0.0}, 1.0};
  CHECK_THROWS_AS(
      pullback_check(net, EvalMode::no_bn(), 2, {0.1, 0.1}, 0.2, domain),
      RankDeficient);
}

TEST_CASE("linear two-class net has one boundary line and two regions") {
  // no hidden blocks: the map is a single affine layer
  Network net = Network::mlp(2, {}, 2, CpaActivation::relu(), false);
  net.output_layer().W(0, 0) = 1.0;   // logit0 = x
  net.output_layer().W(1, 1) = 1.0;   // logit1 = y
  const Window w{{0.0, 0.0}, 1.0};
  const EnumerationResult res = enumerate_regions(net, EvalMode::no_bn(), w);
  CHECK(res.cells.size() == 1);
  const DecisionMap dm = decision_regions(res.cells);
  CHECK(dm.cells.size() == 2);
  CHECK(dm.boundary.size() == 1);
  // the boundary is the diagonal x = y
  const BoundaryEdge& e = dm.boundary[0];
  CHECK(std::fabs(e.a.x - e.a.y) < 1e-9);
  CHECK(std::fabs(e.b.x - e.b.y) < 1e-9);
}

TEST_CASE("constant logits give a single label and empty boundary") {
  Network net = Network::mlp(2, {2}, 3, CpaActivation::relu(), false);
  // all-zero output weights: logits identically zero
  const Window w{{0.0, 0.0}, 1.0};
  const EnumerationResult res = enumerate_regions(net, EvalMode::no_bn(), w);
  const DecisionMap dm = decision_regions(res.cells);
  CHECK(dm.boundary.empty());
  for (const DecisionCell& c : dm.cells) CHECK(c.label == 0);  // tie to lowest
  CHECK(dm.tie_count > 0);
}

TEST_CASE("decision labels match the forward argmax on a dense grid") {
  Rng rng(104);
  const Network net = testutil::random_net(2, {10, 8}, 3, false, 700);
  const Window w{{0.0, 0.0}, 1.2};
  const EnumerationResult res = enumerate_regions(net, EvalMode::no_bn(), w);
  const DecisionMap dm = decision_regions(res.cells);

  int checked = 0, mismatches = 0;
  const int grid_n = 100;  // 10^4 grid points
  for (int gi = 0; gi < grid_n; ++gi) {
    for (int gj = 0; gj < grid_n; ++gj) {
      const Point2 p{-1.2 + 2.4 * (gi + 0.5) / grid_n,
                     -1.2 + 2.4 * (gj + 0.5) / grid_n};
      // locate the decision cell containing p
      int found = -1;
      for (std::size_t c = 0; c < dm.cells.size(); ++c)
        if (polygon_contains(dm.cells[c].polygon, p, 1e-12)) {
          found = static_cast<int>(c);
          break;
        }
      if (found < 0) continue;  // exactly on an edge
      const Vec out = forward(net, {p.x, p.y}, EvalMode::no_bn());
      int best = 0;
      for (std::size_t j = 1; j < out.size(); ++j)
        if (out[j] > out[best]) best = static_cast<int>(j);
      ++checked;
      if (dm.cells[static_cast<std::size_t>(found)].label != best) ++mismatches;
    }
  }
  CHECK(checked > 9000);
  CHECK(mismatches == 0);
}
