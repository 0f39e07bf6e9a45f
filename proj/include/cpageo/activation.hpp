#pragma once

#include <cstddef>
#include <vector>

namespace cpageo {

inline constexpr double kBreakpointTol = 1e-12;

// Elementwise continuous piecewise-affine activation. Piece k (1-based,
// k = 1..K) applies slope_k * t + intercept_k on the open interval between
// breakpoints tau_{k-1} and tau_k, with tau_0 = -inf and tau_K = +inf.
// Adjacent pieces must agree at the shared breakpoint.
class CpaActivation {
 public:
  CpaActivation(std::vector<double> breakpoints, std::vector<double> slopes,
                std::vector<double> intercepts);

  static CpaActivation relu();
  static CpaActivation leaky_relu(double alpha);
  static CpaActivation hard_tanh();

  std::size_t piece_count() const { return slopes_.size(); }       // K
  std::size_t breakpoint_count() const { return breaks_.size(); }  // Q = K-1

  const std::vector<double>& breakpoints() const { return breaks_; }
  double slope(int piece) const { return slopes_[static_cast<std::size_t>(piece - 1)]; }
  double intercept(int piece) const { return intercepts_[static_cast<std::size_t>(piece - 1)]; }

  double eval(double t) const;

  // 1-based piece index of the open interval containing t; throws
  // BreakpointHit when t is within tol of an internal breakpoint.
  int piece_index(double t, double tol = kBreakpointTol) const;

  // Piece selection without the breakpoint guard, for points already known
  // to be strictly inside a region (cell interiors).
  int piece_index_unchecked(double t) const;

  // K == 2 activations (ReLU, LeakyReLU) take the sqrt(2) init gain.
  bool is_relu_family() const { return piece_count() == 2; }

 private:
  std::vector<double> breaks_;
  std::vector<double> slopes_;
  std::vector<double> intercepts_;
};

}  // namespace cpageo
