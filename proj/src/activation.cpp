#include "cpageo/activation.hpp"

#include <algorithm>
#include <cmath>

#include "cpageo/errors.hpp"

namespace cpageo {

namespace {
constexpr double kContinuityTol = 1e-12;
}

CpaActivation::CpaActivation(std::vector<double> breakpoints,
                             std::vector<double> slopes,
                             std::vector<double> intercepts)
    : breaks_(std::move(breakpoints)),
      slopes_(std::move(slopes)),
      intercepts_(std::move(intercepts)) {
  if (slopes_.size() < 2) throw Error("CpaActivation: need K >= 2 pieces");
  if (slopes_.size() != intercepts_.size())
    throw DimensionMismatch("CpaActivation: slopes/intercepts size mismatch");
  if (breaks_.size() + 1 != slopes_.size())
    throw DimensionMismatch("CpaActivation: need K-1 breakpoints for K pieces");
  for (std::size_t q = 1; q < breaks_.size(); ++q)
    if (!(breaks_[q] > breaks_[q - 1]))
      throw Error("CpaActivation: breakpoints must be strictly increasing");
  for (std::size_t q = 0; q < breaks_.size(); ++q) {
    const double left = slopes_[q] * breaks_[q] + intercepts_[q];
    const double right = slopes_[q + 1] * breaks_[q] + intercepts_[q + 1];
    if (std::fabs(left - right) > kContinuityTol)
      throw Error("CpaActivation: discontinuity at breakpoint");
  }
}

CpaActivation CpaActivation::relu() {
  return CpaActivation({0.0}, {0.0, 1.0}, {0.0, 0.0});
}

CpaActivation CpaActivation::leaky_relu(double alpha) {
  return CpaActivation({0.0}, {alpha, 1.0}, {0.0, 0.0});
}

CpaActivation CpaActivation::hard_tanh() {
  return CpaActivation({-1.0, 1.0}, {0.0, 1.0, 0.0}, {-1.0, 0.0, 1.0});
}

double CpaActivation::eval(double t) const {
  const int k = piece_index_unchecked(t);
  return slope(k) * t + intercept(k);
}

int CpaActivation::piece_index_unchecked(double t) const {
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  return static_cast<int>(it - breaks_.begin()) + 1;
}

int CpaActivation::piece_index(double t, double tol) const {
  for (double tau : breaks_)
    if (std::fabs(t - tau) <= tol) throw BreakpointHit(t, tau);
  return piece_index_unchecked(t);
}

}  // namespace cpageo
