#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cpageo/activation.hpp"
#include "cpageo/errors.hpp"

using namespace cpageo;

TEST_CASE("relu evaluation") {
  const CpaActivation relu = CpaActivation::relu();
  CHECK(relu.eval(-1.0) == 0.0);
  CHECK(relu.eval(2.0) == 2.0);
  CHECK(relu.eval(0.0) == 0.0);  // shared limit at the breakpoint
}

TEST_CASE("leaky relu slope arithmetic") {
  const CpaActivation lrelu = CpaActivation::leaky_relu(0.1);
  CHECK(lrelu.eval(-3.0) == doctest::Approx(-0.3));
  CHECK(lrelu.eval(3.0) == 3.0);
}

TEST_CASE("hard tanh pieces") {
  const CpaActivation ht = CpaActivation::hard_tanh();
  CHECK(ht.piece_count() == 3);
  CHECK(ht.eval(-2.0) == -1.0);
  CHECK(ht.eval(0.3) == doctest::Approx(0.3));
  CHECK(ht.eval(5.0) == 1.0);
  CHECK(ht.piece_index(-2.0) == 1);
}

TEST_CASE("piece index and breakpoint hit") {
  const CpaActivation relu = CpaActivation::relu();
  CHECK(relu.piece_index(0.5) == 2);
  CHECK(relu.piece_index(-0.5) == 1);
  CHECK_THROWS_AS(relu.piece_index(0.0, 1e-12), BreakpointHit);
  CHECK_THROWS_AS(relu.piece_index(5e-13, 1e-12), BreakpointHit);
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(CpaActivation({1.0, 1.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}), Error);
  // discontinuous at 0: left piece gives 0, right piece gives 1
  CHECK_THROWS_AS(CpaActivation({0.0}, {0.0, 0.0}, {0.0, 1.0}), Error);
  CHECK_THROWS_AS(CpaActivation({}, {1.0}, {0.0}), Error);
}

TEST_CASE("continuity across breakpoints for generic cpa") {
  // slopes 2 then 3 joined continuously at tau = 1: 2*1+0 = 3*1-1
  const CpaActivation act({1.0}, {2.0, 3.0}, {0.0, -1.0});
  const double left = act.eval(1.0 - 1e-9);
  const double right = act.eval(1.0 + 1e-9);
  CHECK(std::fabs(left - right) < 1e-8);
}
