#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace abvar {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Dense row-major matrix over exact integers.
class IntMatrix {
public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static IntMatrix identity(std::size_t n) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  BigInt& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const BigInt& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<BigInt> column(std::size_t c) const {
    std::vector<BigInt> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<BigInt> data_;
};

inline IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  IntMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
    }
  return c;
}

/// Smith normal form A = left * diag(divisors) * right, where `left` and
/// `right` are unimodular. Divisors are positive and form a divisibility
/// chain; their count is the rank of A.
struct SmithForm {
  std::vector<BigInt> divisors;
  IntMatrix left;   // rows(A) x rows(A)
  IntMatrix right;  // cols(A) x cols(A)
};

namespace detail {

// Row and column operations on `work`, mirrored as inverse operations on
// `left` (columns) and `right` (rows) so that A = left * work * right holds
// throughout.
struct SmithState {
  IntMatrix work, left, right;

  void swap_rows(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t c = 0; c < work.cols(); ++c) std::swap(work(i, c), work(j, c));
    for (std::size_t r = 0; r < left.rows(); ++r) std::swap(left(r, i), left(r, j));
  }
  void swap_cols(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t r = 0; r < work.rows(); ++r) std::swap(work(r, i), work(r, j));
    for (std::size_t c = 0; c < right.cols(); ++c) std::swap(right(i, c), right(j, c));
  }
  // row_i -= q * row_j
  void sub_row(std::size_t i, std::size_t j, const BigInt& q) {
    for (std::size_t c = 0; c < work.cols(); ++c) work(i, c) -= q * work(j, c);
    for (std::size_t r = 0; r < left.rows(); ++r) left(r, j) += q * left(r, i);
  }
  // col_i -= q * col_j
  void sub_col(std::size_t i, std::size_t j, const BigInt& q) {
    for (std::size_t r = 0; r < work.rows(); ++r) work(r, i) -= q * work(r, j);
    for (std::size_t c = 0; c < right.cols(); ++c) right(j, c) += q * right(i, c);
  }
  void negate_row(std::size_t i) {
    for (std::size_t c = 0; c < work.cols(); ++c) work(i, c) = -work(i, c);
    for (std::size_t r = 0; r < left.rows(); ++r) left(r, i) = -left(r, i);
  }
};

// Floor division for cpp_int (which truncates toward zero).
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

} // namespace detail

inline SmithForm smith_normal_form(const IntMatrix& a) {
  detail::SmithState s{a, IntMatrix::identity(a.rows()), IntMatrix::identity(a.cols())};
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  std::vector<BigInt> divisors;

  for (std::size_t t = 0; t < std::min(m, n); ++t) {
    for (;;) {
      // Pivot: smallest nonzero magnitude in the trailing block.
      std::size_t pr = m, pc = n;
      BigInt best = 0;
      for (std::size_t r = t; r < m; ++r)
        for (std::size_t c = t; c < n; ++c) {
          const BigInt& v = s.work(r, c);
          if (v != 0 && (best == 0 || abs(v) < best)) {
            best = abs(v);
            pr = r;
            pc = c;
          }
        }
      if (pr == m) return {std::move(divisors), std::move(s.left), std::move(s.right)};
      s.swap_rows(t, pr);
      s.swap_cols(t, pc);

      bool clean = true;
      for (std::size_t r = t + 1; r < m; ++r) {
        if (s.work(r, t) == 0) continue;
        s.sub_row(r, t, detail::floor_div(s.work(r, t), s.work(t, t)));
        if (s.work(r, t) != 0) clean = false;
      }
      for (std::size_t c = t + 1; c < n; ++c) {
        if (s.work(t, c) == 0) continue;
        s.sub_col(c, t, detail::floor_div(s.work(t, c), s.work(t, t)));
        if (s.work(t, c) != 0) clean = false;
      }
      if (!clean) continue;

      // Enforce divisibility of the trailing block by the pivot.
      bool divides = true;
      for (std::size_t r = t + 1; r < m && divides; ++r)
        for (std::size_t c = t + 1; c < n; ++c)
          if (s.work(r, c) % s.work(t, t) != 0) {
            s.sub_row(t, r, BigInt(-1));
            divides = false;
            break;
          }
      if (divides) break;
    }
    if (s.work(t, t) < 0) s.negate_row(t);
    divisors.push_back(s.work(t, t));
  }
  return {std::move(divisors), std::move(s.left), std::move(s.right)};
}

} // namespace abvar
