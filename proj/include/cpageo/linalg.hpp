#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "cpageo/errors.hpp"

namespace cpageo {

using Vec = std::vector<double>;

// Dense row-major matrix. Small sizes throughout; no BLAS needed.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double* row(std::size_t i) { return data.data() + i * cols; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Vec matvec(const Mat& A, const Vec& x) {
  if (A.cols != x.size()) throw DimensionMismatch("matvec: size mismatch");
  Vec y(A.rows, 0.0);
  for (std::size_t i = 0; i < A.rows; ++i) {
    double s = 0.0;
    const double* r = A.row(i);
    for (std::size_t j = 0; j < A.cols; ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

inline Mat matmul(const Mat& A, const Mat& B) {
  if (A.cols != B.rows) throw DimensionMismatch("matmul: size mismatch");
  Mat C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t k = 0; k < A.cols; ++k) {
      const double a = A(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < B.cols; ++j) C(i, j) += a * B(k, j);
    }
  return C;
}

// diag(d) * A
inline Mat scale_rows(const Vec& d, const Mat& A) {
  if (d.size() != A.rows) throw DimensionMismatch("scale_rows: size mismatch");
  Mat C = A;
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j) C(i, j) *= d[i];
  return C;
}

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec add(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionMismatch("add: size mismatch");
  Vec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

inline Vec sub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionMismatch("sub: size mismatch");
  Vec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

inline double norm_l1(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

inline double norm_l2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double norm_inf(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}

struct TwoColSvd {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

// Singular values of a d x 2 matrix via the 2x2 Gram matrix.
inline TwoColSvd two_col_singular_values(const Mat& A) {
  if (A.cols != 2) throw DimensionMismatch("two_col_singular_values: need 2 columns");
  double g11 = 0.0, g12 = 0.0, g22 = 0.0;
  for (std::size_t i = 0; i < A.rows; ++i) {
    g11 += A(i, 0) * A(i, 0);
    g12 += A(i, 0) * A(i, 1);
    g22 += A(i, 1) * A(i, 1);
  }
  const double tr = g11 + g22;
  const double det = g11 * g22 - g12 * g12;
  double disc = tr * tr - 4.0 * det;
  if (disc < 0.0) disc = 0.0;  // rounding guard
  const double root = std::sqrt(disc);
  const double lam_max = 0.5 * (tr + root);
  const double lam_min = std::max(0.5 * (tr - root), 0.0);
  return {std::sqrt(lam_min), std::sqrt(lam_max)};
}

}  // namespace cpageo
