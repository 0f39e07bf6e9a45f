#pragma once

#include <stdexcept>
#include <string>

namespace cpageo {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// Input lies on a switching set: a pre-activation coincides with a breakpoint.
struct BreakpointHit : Error {
  BreakpointHit(double value, double breakpoint)
      : Error("pre-activation " + std::to_string(value) +
              " coincides with breakpoint " + std::to_string(breakpoint)),
        value(value),
        breakpoint(breakpoint) {}
  double value;
  double breakpoint;
};

struct ZeroWeight : Error {
  ZeroWeight() : Error("hyperplane normal has zero norm") {}
  using Error::Error;
};

struct ZeroGamma : Error {
  ZeroGamma() : Error("batch-norm gamma is zero; standardized offset undefined") {}
};

struct MissingFrozenStats : Error {
  MissingFrozenStats() : Error("frozen batch statistics required but absent") {}
};

struct GenerationFailed : Error {
  using Error::Error;
};

struct EmptySample : Error {
  EmptySample() : Error("empty sample") {}
};

struct RankDeficient : Error {
  using Error::Error;
};

struct WindowNotContained : Error {
  using Error::Error;
};

struct NonFiniteLoss : Error {
  using Error::Error;
};

struct CountOverflow : Error {
  CountOverflow() : Error("region count exceeds 64-bit range") {}
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace cpageo
