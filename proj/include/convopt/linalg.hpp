#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "convopt/numeric.hpp"

namespace convopt {

/// Dense row-major rational matrix. Small sizes only (LP tableaus, subgroup
/// bases); no attempt at sparsity.
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<Rat> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

  Rat& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const Rat& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  std::vector<Rat> row(std::size_t i) const {
    return std::vector<Rat>(a.begin() + i * cols, a.begin() + (i + 1) * cols);
  }
  void set_row(std::size_t i, const std::vector<Rat>& r) {
    if (r.size() != cols) throw std::invalid_argument("set_row size");
    std::copy(r.begin(), r.end(), a.begin() + i * cols);
  }
  void append_row(const std::vector<Rat>& r) {
    if (cols == 0) cols = r.size();
    if (r.size() != cols) throw std::invalid_argument("append_row size");
    a.insert(a.end(), r.begin(), r.end());
    ++rows;
  }

  bool operator==(const Mat& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }
};

inline std::vector<Rat> mat_vec(const Mat& m, const std::vector<Rat>& v) {
  if (v.size() != m.cols) throw std::invalid_argument("mat_vec size");
  std::vector<Rat> out(m.rows, Rat(0));
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      if (m(i, j) != 0) out[i] += m(i, j) * v[j];
  return out;
}

inline Rat dot(const std::vector<Rat>& x, const std::vector<Rat>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot size");
  Rat s(0);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0 && y[i] != 0) s += x[i] * y[i];
  return s;
}

inline std::size_t rank_of(Mat m) {
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols && r < m.rows; ++c) {
    std::size_t piv = r;
    while (piv < m.rows && m(piv, c) == 0) ++piv;
    if (piv == m.rows) continue;
    if (piv != r)
      for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(r, j), m(piv, j));
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == r || m(i, c) == 0) continue;
      Rat f = m(i, c) / m(r, c);
      for (std::size_t j = c; j < m.cols; ++j) m(i, j) -= f * m(r, j);
    }
    ++r;
  }
  return r;
}

/// Solves the square system A x = rhs for each rhs column; throws if A is
/// singular. rhs is rows x k; result is A.cols x k.
inline Mat solve_square(Mat a, Mat rhs) {
  if (a.rows != a.cols || rhs.rows != a.rows)
    throw std::invalid_argument("solve_square shape");
  const std::size_t n = a.rows, k = rhs.cols;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a(piv, c) == 0) ++piv;
    if (piv == n) throw std::domain_error("solve_square: singular matrix");
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
      for (std::size_t j = 0; j < k; ++j) std::swap(rhs(c, j), rhs(piv, j));
    }
    Rat d = a(c, c);
    for (std::size_t j = 0; j < n; ++j) a(c, j) /= d;
    for (std::size_t j = 0; j < k; ++j) rhs(c, j) /= d;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || a(i, c) == 0) continue;
      Rat f = a(i, c);
      for (std::size_t j = 0; j < n; ++j) a(i, j) -= f * a(c, j);
      for (std::size_t j = 0; j < k; ++j) rhs(i, j) -= f * rhs(c, j);
    }
  }
  return rhs;
}

}  // namespace convopt
