#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cpageo/arrangement.hpp"

using namespace cpageo;

TEST_CASE("simple count formula") {
  CHECK(region_count_simple(0, 2) == 1);
  CHECK(region_count_simple(3, 2) == 7);  // 1 + 3 + 3
  CHECK(region_count_simple(64, 2) == 1 + 64 + 2016);
  // full binomial sum when d >= m
  for (unsigned m = 0; m <= 10; ++m)
    CHECK(region_count_simple(m, m) == BigCount(1) << m);
  // stress: exact value beyond 64-bit range
  CHECK(region_count_simple(300, 300) == BigCount(1) << 300);
  CHECK_THROWS_AS(to_u64_checked(region_count_simple(300, 300)), CountOverflow);
}

TEST_CASE("parallel-family count formula") {
  CHECK(region_count_parallel({2, 3}, 2) == 12);  // 1 + (2+3) + 6
  CHECK(region_count_parallel({3}, 2) == 4);      // one family of 3 cuts
  CHECK(region_count_parallel({}, 2) == 1);
  // 0/1 families reduce to the simple formula
  for (unsigned d = 1; d <= 3; ++d) {
    const std::vector<unsigned> m_vec{1, 0, 1, 1, 0, 1};
    unsigned m = 0;
    for (unsigned x : m_vec) m += x;
    CHECK(region_count_parallel(m_vec, d) == region_count_simple(m, d));
  }
}

TEST_CASE("parallel count is coordinatewise nondecreasing") {
  for (unsigned d = 1; d <= 3; ++d)
    for (unsigned n = 1; n <= 4; ++n) {
      std::vector<unsigned> m(n, 0);
      // all m vectors with entries in {0..4}, exhaustively
      unsigned total = 1;
      for (unsigned i = 0; i < n; ++i) total *= 5;
      for (unsigned code = 0; code < total; ++code) {
        unsigned c = code;
        for (unsigned i = 0; i < n; ++i) {
          m[i] = c % 5;
          c /= 5;
        }
        const BigCount base = region_count_parallel(m, d);
        for (unsigned i = 0; i < n; ++i) {
          std::vector<unsigned> bumped = m;
          ++bumped[i];
          CHECK(region_count_parallel(bumped, d) >= base);
        }
      }
    }
}

TEST_CASE("validity report flags") {
  const Window b{{0.0, 0.0}, 1.0};
  SUBCASE("coincident lines fail distinctness") {
    FamilyArrangement arr;
    arr.families.push_back({{Vec{1.0, 0.0}, 0.2}, {Vec{2.0, 0.0}, 0.4}});
    const auto rep = check_validity(arr, b);
    CHECK_FALSE(rep.distinct_ok);
    CHECK_FALSE(rep.overall_valid);
  }
  SUBCASE("cross-family parallels fail transversality") {
    FamilyArrangement arr;
    arr.families.push_back({{Vec{1.0, 0.0}, 0.2}});
    arr.families.push_back({{Vec{1.0, 0.0}, -0.3}});
    const auto rep = check_validity(arr, b);
    CHECK_FALSE(rep.transverse_ok);
  }
  SUBCASE("three concurrent lines fail the common-point clause") {
    FamilyArrangement arr;
    arr.families.push_back({{Vec{1.0, 0.0}, 0.0}});
    arr.families.push_back({{Vec{0.0, 1.0}, 0.0}});
    arr.families.push_back({{Vec{1.0, 1.0}, 0.0}});
    const auto rep = check_validity(arr, b);
    CHECK_FALSE(rep.no_common_point_ok);
  }
  SUBCASE("a generic pair is valid with positive margin") {
    FamilyArrangement arr;
    arr.families.push_back({{Vec{1.0, 0.0}, 0.1}});
    arr.families.push_back({{Vec{0.0, 1.0}, -0.2}});
    const auto rep = check_validity(arr, b);
    CHECK(rep.overall_valid);
    CHECK(rep.eta == doctest::Approx(0.8));  // intersection at (0.1, -0.2)
  }
  SUBCASE("intra-family parallels do not constrain the margin") {
    FamilyArrangement arr;
    arr.families.push_back({{Vec{1.0, 0.0}, 0.1}, {Vec{1.0, 0.0}, 0.5}});
    const auto rep = check_validity(arr, b);
    CHECK(rep.overall_valid);
    CHECK(rep.eta == 1.0);  // no cross-family intersections
  }
}

TEST_CASE("generated arrangements are valid by construction") {
  const Window b{{0.5, -0.25}, 1.3};
  Rng rng(17);
  SUBCASE("single line") {
    const auto gen = generate_valid_arrangement_simple(1, b, rng);
    CHECK(gen.report.overall_valid);
    CHECK(gen.report.cutting_count == 1);
    const std::vector<Hyperplane> lines{gen.arrangement.families[0][0]};
    CHECK(count_window_cells(lines, b) == 2);
  }
  SUBCASE("one family of three parallel cuts") {
    const auto gen = generate_valid_arrangement_parallel({3}, b, rng);
    CHECK(gen.report.overall_valid);
    std::vector<Hyperplane> lines;
    for (const auto& fam : gen.arrangement.families)
      lines.insert(lines.end(), fam.begin(), fam.end());
    CHECK(count_window_cells(lines, b) == 4);
  }
  SUBCASE("self-consistency of the validity report") {
    for (int k = 0; k < 20; ++k) {
      const auto gen = generate_valid_arrangement_parallel({2, 1, 3}, b, rng);
      const auto recheck = check_validity(gen.arrangement, b);
      CHECK(recheck.overall_valid);
    }
  }
}

TEST_CASE("generation signals failure when attempts run out") {
  Rng rng(1);
  const Window b{{0.0, 0.0}, 1.0};
  CHECK_THROWS_AS(generate_valid_arrangement_simple(5, b, rng, 0),
                  GenerationFailed);
}

TEST_CASE("formula equals enumeration on generated instances") {
  const Window b{{0.0, 0.0}, 1.0};
  Rng rng(2024);
  int instances = 0;
  for (unsigned m = 1; m <= 12 && instances < 60; ++m) {
    for (int k = 0; k < 5; ++k, ++instances) {
      const auto gen = generate_valid_arrangement_simple(m, b, rng);
      std::vector<Hyperplane> lines;
      for (const auto& fam : gen.arrangement.families)
        lines.insert(lines.end(), fam.begin(), fam.end());
      CHECK(BigCount(count_window_cells(lines, b)) == region_count_simple(m, 2));
    }
  }
  for (int k = 0; k < 40; ++k) {
    std::vector<unsigned> m_vec;
    const std::size_t n = 1 + rng.below(4);
    unsigned total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      m_vec.push_back(static_cast<unsigned>(rng.below(5)));
      total += m_vec.back();
    }
    if (total == 0) m_vec[0] = 1;
    const auto gen = generate_valid_arrangement_parallel(m_vec, b, rng);
    std::vector<Hyperplane> lines;
    for (const auto& fam : gen.arrangement.families)
      lines.insert(lines.end(), fam.begin(), fam.end());
    CHECK(BigCount(count_window_cells(lines, b)) == region_count_parallel(m_vec, 2));
  }
}
