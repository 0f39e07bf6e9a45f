#include "cpageo/arrangement.hpp"

#include <cmath>

#include "cpageo/polygon.hpp"

namespace cpageo {

BigCount region_count_simple(unsigned m, unsigned d) {
  BigCount total = 0;
  BigCount binom = 1;  // binom(m, 0)
  for (unsigned k = 0; k <= d; ++k) {
    total += binom;
    if (k >= m) break;  // binom(m, k) = 0 beyond k = m
    binom = binom * (m - k) / (k + 1);
  }
  return total;
}

BigCount region_count_parallel(const std::vector<unsigned>& m_vec, unsigned d) {
  // e[k] accumulates the elementary symmetric polynomial of degree k
  std::vector<BigCount> e(static_cast<std::size_t>(d) + 1, 0);
  e[0] = 1;
  for (unsigned mj : m_vec)
    for (std::size_t k = e.size() - 1; k >= 1; --k) e[k] += e[k - 1] * mj;
  BigCount total = 0;
  for (const BigCount& ek : e) total += ek;
  return total;
}

std::uint64_t to_u64_checked(const BigCount& c) {
  if (c < 0 || c > BigCount(UINT64_MAX)) throw CountOverflow();
  return c.convert_to<std::uint64_t>();
}

namespace {

struct Line2D {
  // unit normal and offset; line {u : <n, u> = c}
  double nx, ny, c;
  std::size_t family;
};

std::vector<Line2D> cutting_lines(const FamilyArrangement& arr, const Window& b,
                                  std::vector<unsigned>* per_family) {
  std::vector<Line2D> lines;
  per_family->assign(arr.families.size(), 0);
  for (std::size_t f = 0; f < arr.families.size(); ++f) {
    for (const Hyperplane& h : arr.families[f]) {
      if (h.w.size() != 2) throw DimensionMismatch("check_validity: need 2D");
      if (!window_cut(h, b, CutBoundary::Open)) continue;
      const double n = std::hypot(h.w[0], h.w[1]);
      lines.push_back({h.w[0] / n, h.w[1] / n, h.c / n, f});
      ++(*per_family)[f];
    }
  }
  return lines;
}

bool lines_parallel(const Line2D& a, const Line2D& b, double tol) {
  return std::fabs(a.nx * b.ny - a.ny * b.nx) <= tol;
}

bool intersect(const Line2D& a, const Line2D& b, Point2& p) {
  const double det = a.nx * b.ny - a.ny * b.nx;
  if (det == 0.0) return false;
  p.x = (a.c * b.ny - b.c * a.ny) / det;
  p.y = (a.nx * b.c - b.nx * a.c) / det;
  return true;
}

}  // namespace

ArrangementValidityReport check_validity(const FamilyArrangement& arr,
                                         const Window& b, double tol) {
  if (b.center.size() != 2) throw DimensionMismatch("check_validity: need 2D window");
  ArrangementValidityReport rep;
  std::vector<Line2D> lines = cutting_lines(arr, b, &rep.cutting_per_family);
  rep.cutting_count = static_cast<int>(lines.size());
  rep.family_parallel_ok = true;
  rep.distinct_ok = true;
  rep.transverse_ok = true;
  rep.no_common_point_ok = true;

  const Point2 x0{b.center[0], b.center[1]};
  double max_inf = 0.0;
  bool any_intersection = false;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const Line2D& a = lines[i];
      const Line2D& c = lines[j];
      const bool par = lines_parallel(a, c, tol);
      if (a.family == c.family) {
        if (!par) rep.family_parallel_ok = false;
        // distinct: same unit normal up to sign, offsets must differ
        const double sign = (a.nx * c.nx + a.ny * c.ny) >= 0.0 ? 1.0 : -1.0;
        if (par && std::fabs(a.c - sign * c.c) <= tol) rep.distinct_ok = false;
      } else {
        if (par) {
          rep.transverse_ok = false;
          continue;
        }
        Point2 p;
        if (!intersect(a, c, p)) continue;
        any_intersection = true;
        const double dist_inf =
            std::max(std::fabs(p.x - x0.x), std::fabs(p.y - x0.y));
        max_inf = std::max(max_inf, dist_inf);
        // d+1 = 3 concurrent hyperplanes through a common point inside B
        if (dist_inf <= b.r + tol) {
          for (std::size_t k = j + 1; k < lines.size(); ++k) {
            const Line2D& e = lines[k];
            if (e.family == a.family || e.family == c.family) continue;
            if (std::fabs(e.nx * p.x + e.ny * p.y - e.c) <= tol)
              rep.no_common_point_ok = false;
          }
        }
      }
    }
  }

  rep.eta = any_intersection ? (b.r - max_inf) : b.r;
  rep.overall_valid = rep.family_parallel_ok && rep.distinct_ok &&
                      rep.transverse_ok && rep.no_common_point_ok && rep.eta > 0.0;
  return rep;
}

namespace {

Hyperplane line_through_offset(double theta, double u, const Window& b) {
  const Vec w{std::cos(theta), std::sin(theta)};
  const double c = w[0] * b.center[0] + w[1] * b.center[1] + u * b.r * norm_l1(w);
  return {w, c};
}

GeneratedArrangement generate(const std::vector<unsigned>& m_vec, const Window& b,
                              Rng& rng, int max_attempts, double eta_min_frac) {
  const std::size_t n_fam = m_vec.size();
  // stratified directions keep every cross-family pair far from parallel,
  // and the offset scale shrinks with the family count so that pairwise
  // intersections stay well inside the window
  const double min_sin =
      n_fam >= 2 ? std::sin(0.6 * M_PI / static_cast<double>(n_fam)) : 1.0;
  const double offset_scale = n_fam >= 2 ? std::min(0.45, 0.30 * min_sin) : 0.45;

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    FamilyArrangement arr;
    arr.families.resize(n_fam);
    const double base = rng.uniform(0.0, M_PI);
    for (std::size_t f = 0; f < n_fam; ++f) {
      const double jitter = 0.4 * (rng.uniform() - 0.5);
      const double theta = std::fmod(
          base + M_PI * (static_cast<double>(f) + jitter) /
                     static_cast<double>(n_fam),
          M_PI);
      for (unsigned i = 0; i < m_vec[f]; ++i) {
        const double u = rng.uniform(-offset_scale, offset_scale);
        arr.families[f].push_back(line_through_offset(theta, u, b));
      }
    }
    ArrangementValidityReport rep = check_validity(arr, b);
    // all sampled lines must actually cut, so the formula argument matches
    bool all_cut = true;
    for (std::size_t f = 0; f < m_vec.size(); ++f)
      all_cut = all_cut && rep.cutting_per_family[f] == m_vec[f];
    if (rep.overall_valid && all_cut && rep.eta > eta_min_frac * b.r)
      return {std::move(arr), rep};
  }
  throw GenerationFailed("generate_valid_arrangement: rejection sampling exhausted");
}

}  // namespace

GeneratedArrangement generate_valid_arrangement_simple(unsigned m, const Window& b,
                                                       Rng& rng, int max_attempts) {
  return generate(std::vector<unsigned>(m, 1u), b, rng, max_attempts, 0.01);
}

GeneratedArrangement generate_valid_arrangement_parallel(
    const std::vector<unsigned>& m_vec, const Window& b, Rng& rng,
    int max_attempts) {
  return generate(m_vec, b, rng, max_attempts, 0.01);
}

std::size_t count_window_cells(const std::vector<Hyperplane>& lines, const Window& b) {
  if (b.center.size() != 2)
    throw DimensionMismatch("count_window_cells: need 2D window");
  SplitTolerances tol;
  tol.area_floor = 1e-14 * (2.0 * b.r) * (2.0 * b.r);
  std::vector<Polygon> cells{make_window_polygon({b.center[0], b.center[1]}, b.r)};
  for (const Hyperplane& h : lines) {
    const auto line = normalize_line(h.w[0], h.w[1], h.c);
    if (!line) continue;
    std::vector<Polygon> next;
    next.reserve(cells.size() + 8);
    for (Polygon& cell : cells) {
      SplitResult s = split_polygon(cell, *line, tol);
      if (s.crossed) {
        next.push_back(std::move(s.neg));
        next.push_back(std::move(s.pos));
      } else {
        next.push_back(std::move(cell));
      }
    }
    cells = std::move(next);
  }
  return cells.size();
}

}  // namespace cpageo
