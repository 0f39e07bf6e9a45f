#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <vector>

#include "cpageo/geometry.hpp"
#include "cpageo/rng.hpp"

namespace cpageo {

using BigCount = boost::multiprecision::cpp_int;

// R_d(m) = sum_{k=0}^{d} binom(m, k); the cell count of a simple arrangement
// of m hyperplanes restricted to a generic convex window in dimension d.
BigCount region_count_simple(unsigned m, unsigned d);

// R_d^par(m_1..m_n) = sum over subsets S of families with |S| <= d of
// prod_{j in S} m_j (empty product 1); parallel-family arrangements.
BigCount region_count_parallel(const std::vector<unsigned>& m_vec, unsigned d);

std::uint64_t to_u64_checked(const BigCount& c);

// Hyperplanes grouped into parallel families (2D).
struct FamilyArrangement {
  std::vector<std::vector<Hyperplane>> families;
};

struct ArrangementValidityReport {
  bool family_parallel_ok = false;
  bool distinct_ok = false;
  bool transverse_ok = false;
  bool no_common_point_ok = false;  // no d+1 = 3 hyperplanes meet in B
  double eta = 0.0;                 // cross-family intersections inside B(r - eta)
  bool overall_valid = false;
  int cutting_count = 0;
  std::vector<unsigned> cutting_per_family;
};

// Checks the window-stability conditions over the hyperplanes that cut the
// open window; tolerance governs parallelism/concurrency classification.
ArrangementValidityReport check_validity(const FamilyArrangement& arr,
                                         const Window& b, double tol = 1e-9);

struct GeneratedArrangement {
  FamilyArrangement arrangement;
  ArrangementValidityReport report;
};

// Rejection-samples window-stable fixtures. Simple arrangements are
// singleton families. Throws GenerationFailed after max_attempts.
GeneratedArrangement generate_valid_arrangement_simple(unsigned m, const Window& b,
                                                       Rng& rng,
                                                       int max_attempts = 1000);
GeneratedArrangement generate_valid_arrangement_parallel(
    const std::vector<unsigned>& m_vec, const Window& b, Rng& rng,
    int max_attempts = 1000);

// Exact cell count of a set of lines inside a 2D window, by convex
// subdivision. Shared with the enumeration oracle tests.
std::size_t count_window_cells(const std::vector<Hyperplane>& lines, const Window& b);

}  // namespace cpageo
