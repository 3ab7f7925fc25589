#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "abvar/errors.hpp"
#include "abvar/integer_matrix.hpp"

namespace abvar {

/// Enumeration is refused above this dimension unless the caller raises it.
inline constexpr std::size_t kDefaultSvpDimensionCap = 24;
/// Relative guard band on the enumeration radius in floating-point mode.
inline constexpr double kRadiusGuard = 1e-10;

template <class Scalar>
inline constexpr bool is_exact_v = std::is_same_v<Scalar, Rational>;

/// Integer coordinates; column c of a transform is the c-th new basis vector
/// expressed in the old basis.
using IntVector = std::vector<std::int64_t>;

/// Positive definite quadratic form x^T G x on Z^dim.
///
/// Scalar is double (floating mode) or Rational (exact mode).
template <class Scalar>
class GramLattice {
public:
  static GramLattice make(std::size_t dim, std::vector<Scalar> entries) {
    if (entries.size() != dim * dim) throw ValidationError("gram_shape", "expected " + std::to_string(dim * dim) + " entries");
    if (dim == 0) throw ValidationError("gram_shape", "dimension must be positive");
    GramLattice g(dim, std::move(entries));
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (!g.symmetric_pair(i, j)) throw ValidationError("gram_symmetric", "entries (" + std::to_string(i) + "," + std::to_string(j) + ") differ");
    // LDL^T pivots must all be positive.
    const auto pivots = g.ldl_pivots();
    for (std::size_t i = 0; i < dim; ++i)
      if (!(pivots[i] > 0)) throw ValidationError("gram_positive_definite", "pivot " + std::to_string(i) + " is not positive");
    return g;
  }

  static GramLattice from_eigen(const Eigen::MatrixXd& m)
    requires std::is_same_v<Scalar, double>
  {
    const auto d = static_cast<std::size_t>(m.rows());
    if (m.rows() != m.cols()) throw ValidationError("gram_shape", "matrix is not square");
    std::vector<double> e(d * d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) e[i * d + j] = 0.5 * (m(i, j) + m(j, i));
    return make(d, std::move(e));
  }

  std::size_t dim() const noexcept { return dim_; }
  const Scalar& operator()(std::size_t i, std::size_t j) const { return g_[i * dim_ + j]; }
  const std::vector<Scalar>& entries() const noexcept { return g_; }

  Scalar norm_sq(const IntVector& x) const {
    Scalar s = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      if (x[i] == 0) continue;
      Scalar row = 0;
      for (std::size_t j = 0; j < dim_; ++j)
        if (x[j] != 0) row += (*this)(i, j) * Scalar(x[j]);
      s += Scalar(x[i]) * row;
    }
    return s;
  }

  GramLattice scaled(const Scalar& c) const {
    auto e = g_;
    for (auto& v : e) v *= c;
    return GramLattice(dim_, std::move(e));
  }

  /// T^T G T for an integer transform T (dim x dim, row-major).
  GramLattice congruent(const std::vector<std::int64_t>& t) const {
    std::vector<Scalar> tmp(dim_ * dim_, Scalar(0)), out(dim_ * dim_, Scalar(0));
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t k = 0; k < dim_; ++k)
        for (std::size_t j = 0; j < dim_; ++j)
          if (t[k * dim_ + j] != 0) tmp[i * dim_ + j] += (*this)(i, k) * Scalar(t[k * dim_ + j]);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t k = 0; k < dim_; ++k)
        if (t[k * dim_ + i] != 0)
          for (std::size_t j = 0; j < dim_; ++j) out[i * dim_ + j] += Scalar(t[k * dim_ + i]) * tmp[k * dim_ + j];
    return GramLattice(dim_, std::move(out));
  }

  Eigen::MatrixXd to_eigen() const {
    Eigen::MatrixXd m(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) {
        if constexpr (is_exact_v<Scalar>) m(i, j) = (*this)(i, j).template convert_to<double>();
        else m(i, j) = (*this)(i, j);
      }
    return m;
  }

  friend bool operator==(const GramLattice&, const GramLattice&) = default;

private:
  GramLattice(std::size_t dim, std::vector<Scalar> e) : dim_(dim), g_(std::move(e)) {}

  bool symmetric_pair(std::size_t i, std::size_t j) const {
    if constexpr (is_exact_v<Scalar>) return (*this)(i, j) == (*this)(j, i);
    else {
      const double scale = std::max({std::abs((*this)(i, i)), std::abs((*this)(j, j)), 1e-300});
      return std::abs((*this)(i, j) - (*this)(j, i)) <= 1e-9 * scale;
    }
  }

  std::vector<Scalar> ldl_pivots() const {
    std::vector<Scalar> l(dim_ * dim_, Scalar(0)), d(dim_, Scalar(0));
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        Scalar s = (*this)(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l[i * dim_ + k] * l[j * dim_ + k] * d[k];
        if (!(d[j] > 0)) return d;
        l[i * dim_ + j] = s / d[j];
      }
      Scalar s = (*this)(i, i);
      for (std::size_t k = 0; k < i; ++k) s -= l[i * dim_ + k] * l[i * dim_ + k] * d[k];
      d[i] = s;
    }
    return d;
  }

  std::size_t dim_ = 0;
  std::vector<Scalar> g_;
};

template <class Scalar>
struct LllResult {
  GramLattice<Scalar> reduced;
  /// Row-major dim x dim unimodular integer matrix T with T^T G T = reduced.
  std::vector<std::int64_t> transform;
  std::size_t swaps = 0;
};

namespace detail {

template <class Scalar>
Scalar round_nearest(const Scalar& x) {
  if constexpr (is_exact_v<Scalar>) {
    const Rational shifted = x + Rational(1, 2);
    const BigInt num = boost::multiprecision::numerator(shifted);
    const BigInt den = boost::multiprecision::denominator(shifted);
    BigInt q = num / den;
    if (num % den != 0 && num < 0) --q;
    return Rational(q);
  } else {
    return std::round(x);
  }
}

template <class Scalar>
std::int64_t to_int64(const Scalar& x) {
  if constexpr (is_exact_v<Scalar>) {
    const BigInt q = boost::multiprecision::numerator(x) / boost::multiprecision::denominator(x);
    if (abs(q) > BigInt(std::int64_t{1} << 53)) throw NumericalError("LLL coefficient overflow");
    return q.template convert_to<std::int64_t>();
  } else {
    if (!(std::abs(x) < 9.0e15)) throw NumericalError("LLL coefficient overflow");
    return static_cast<std::int64_t>(x);
  }
}

template <class Scalar>
double to_double(const Scalar& x) {
  if constexpr (is_exact_v<Scalar>) return x.template convert_to<double>();
  else return x;
}

// Gram-Schmidt data of a Gram matrix: mu (row-major, lower) and squared norms b.
template <class Scalar>
void gso(const std::vector<Scalar>& g, std::size_t d, std::vector<Scalar>& mu, std::vector<Scalar>& b) {
  mu.assign(d * d, Scalar(0));
  b.assign(d, Scalar(0));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      Scalar s = g[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= mu[j * d + k] * mu[i * d + k] * b[k];
      mu[i * d + j] = s / b[j];
    }
    Scalar s = g[i * d + i];
    for (std::size_t k = 0; k < i; ++k) s -= mu[i * d + k] * mu[i * d + k] * b[k];
    b[i] = s;
    if (!(b[i] > 0)) throw NumericalError("LLL lost positive definiteness at index " + std::to_string(i) +
                                          "; retry in exact rational mode");
  }
}

} // namespace detail

/// LLL reduction acting directly on the Gram matrix.
template <class Scalar>
LllResult<Scalar> lll_reduce(const GramLattice<Scalar>& lat, double delta = 0.99) {
  if (!(delta > 0.25 && delta < 1.0)) throw ValidationError("lll_delta", "delta must lie in (0.25, 1)");
  const std::size_t d = lat.dim();
  std::vector<Scalar> g = lat.entries();
  std::vector<std::int64_t> t(d * d, 0);
  for (std::size_t i = 0; i < d; ++i) t[i * d + i] = 1;

  Scalar dlt;
  if constexpr (is_exact_v<Scalar>) dlt = Rational(static_cast<std::int64_t>(std::llround(delta * 1e6)), 1000000);
  else dlt = delta;

  // b_k -= q b_j
  auto reduce = [&](std::size_t k, std::size_t j, std::int64_t q) {
    const Scalar qs(q);
    const Scalar gkj = g[k * d + j];
    g[k * d + k] += qs * qs * g[j * d + j] - Scalar(2) * qs * gkj;
    for (std::size_t i = 0; i < d; ++i) {
      if (i == k) continue;
      g[k * d + i] -= qs * g[j * d + i];
      g[i * d + k] = g[k * d + i];
    }
    for (std::size_t r = 0; r < d; ++r) t[r * d + k] -= q * t[r * d + j];
  };
  auto swap = [&](std::size_t a, std::size_t b) {
    for (std::size_t i = 0; i < d; ++i) std::swap(g[a * d + i], g[b * d + i]);
    for (std::size_t i = 0; i < d; ++i) std::swap(g[i * d + a], g[i * d + b]);
    for (std::size_t r = 0; r < d; ++r) std::swap(t[r * d + a], t[r * d + b]);
  };

  std::vector<Scalar> mu, b;
  std::size_t swaps = 0;
  std::size_t k = 1;
  const std::size_t max_iter = 100000 * std::max<std::size_t>(d, 1);
  for (std::size_t iter = 0; k < d; ++iter) {
    if (iter > max_iter) throw NumericalError("LLL did not terminate");
    detail::gso(g, d, mu, b);
    for (std::size_t jj = k; jj-- > 0;) {
      const Scalar q = detail::round_nearest(mu[k * d + jj]);
      if (q != 0) {
        const auto qi = detail::to_int64(q);
        reduce(k, jj, qi);
        for (std::size_t l = 0; l < jj; ++l) mu[k * d + l] -= q * mu[jj * d + l];
        mu[k * d + jj] -= q;
      }
    }
    const Scalar m = mu[k * d + k - 1];
    if (b[k] >= (dlt - m * m) * b[k - 1]) {
      ++k;
    } else {
      swap(k, k - 1);
      ++swaps;
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
  return {lat.congruent(t), std::move(t), swaps};
}

template <class Scalar>
struct SvpResult {
  Scalar length_sq{};
  IntVector witness;
  /// Enumeration tree nodes visited.
  std::size_t nodes = 0;
  /// Squared length of the shortest LLL basis vector (initial radius).
  Scalar lll_first_sq{};
  std::size_t lll_swaps = 0;
};

namespace detail {

// Integers x with b * (x - c)^2 <= rem.
template <class Scalar>
std::pair<std::int64_t, std::int64_t> integer_window(const Scalar& c, const Scalar& rem, const Scalar& b) {
  if constexpr (is_exact_v<Scalar>) {
    const double cd_ = to_double(c);
    const double half = std::sqrt(std::max(0.0, to_double(rem) / to_double(b)));
    std::int64_t lo = static_cast<std::int64_t>(std::ceil(cd_ - half));
    std::int64_t hi = static_cast<std::int64_t>(std::floor(cd_ + half));
    auto inside = [&](std::int64_t x) {
      const Rational dx = Rational(x) - c;
      return b * dx * dx <= rem;
    };
    while (inside(hi + 1)) ++hi;
    while (hi >= lo && !inside(hi)) --hi;
    while (inside(lo - 1)) --lo;
    while (lo <= hi && !inside(lo)) ++lo;
    return {lo, hi};
  } else {
    const double half = std::sqrt(std::max(0.0, rem / b));
    return {static_cast<std::int64_t>(std::ceil(c - half)), static_cast<std::int64_t>(std::floor(c + half))};
  }
}

template <class Scalar>
struct Enumerator {
  std::size_t d;
  const std::vector<Scalar>& mu;
  const std::vector<Scalar>& b;
  Scalar best;
  Scalar bound;  // best inflated by the guard band in floating mode
  IntVector x, best_x;
  std::size_t nodes = 0;

  void set_best(const Scalar& v) {
    best = v;
    if constexpr (is_exact_v<Scalar>) bound = v;
    else bound = v * (1.0 + kRadiusGuard);
  }

  // `partial` = contribution of levels > level; `top_zero` = all of them are zero.
  void search(std::size_t level, const Scalar& partial, bool top_zero) {
    Scalar c = 0;
    for (std::size_t j = level + 1; j < d; ++j)
      if (x[j] != 0) c -= mu[j * d + level] * Scalar(x[j]);
    const Scalar rem = bound - partial;
    if (rem < 0) return;
    auto [lo, hi] = integer_window(c, rem, b[level]);
    if (top_zero) lo = std::max<std::int64_t>(lo, 0);  // x and -x have equal length
    for (std::int64_t v = lo; v <= hi; ++v) {
      ++nodes;
      x[level] = v;
      const Scalar diff = Scalar(v) - c;
      const Scalar here = partial + b[level] * diff * diff;
      if (here > bound) continue;
      const bool zero_so_far = top_zero && v == 0;
      if (level == 0) {
        if (!zero_so_far && here < best) {
          set_best(here);
          best_x = x;
        }
      } else {
        search(level - 1, here, zero_so_far);
      }
    }
    x[level] = 0;
  }
};

} // namespace detail

/// Exact shortest nonzero vector: LLL preprocessing then Fincke-Pohst
/// enumeration with a shrinking radius.
template <class Scalar>
SvpResult<Scalar> shortest_vector(const GramLattice<Scalar>& lat, std::size_t dim_cap = kDefaultSvpDimensionCap) {
  const std::size_t d = lat.dim();
  if (d > dim_cap)
    throw ValidationError("svp_dimension_cap", "dimension " + std::to_string(d) + " exceeds the cap " +
                                                   std::to_string(dim_cap) +
                                                   "; raise the cap explicitly if exponential runtime is acceptable");
  const auto lll = lll_reduce(lat);
  const auto& red = lll.reduced;

  std::vector<Scalar> mu, b;
  detail::gso(red.entries(), d, mu, b);

  std::size_t first = 0;
  for (std::size_t i = 1; i < d; ++i)
    if (red(i, i) < red(first, first)) first = i;

  detail::Enumerator<Scalar> en{d, mu, b, Scalar(0), Scalar(0), IntVector(d, 0), IntVector(d, 0)};
  en.set_best(red(first, first));
  en.best_x[first] = 1;
  en.search(d - 1, Scalar(0), true);
  if (!(en.best > 0)) throw NumericalError("enumeration radius underflow");

  SvpResult<Scalar> out;
  out.length_sq = en.best;
  out.witness.assign(d, 0);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) out.witness[r] += lll.transform[r * d + c] * en.best_x[c];
  out.nodes = en.nodes;
  out.lll_first_sq = red(first, first);
  out.lll_swaps = lll.swaps;
  // Report the length evaluated on the input form so the witness reproduces it.
  out.length_sq = lat.norm_sq(out.witness);
  return out;
}

/// Box radius guaranteed to contain a shortest vector: any x with
/// x^T G x <= R satisfies x_i^2 <= R * (G^{-1})_ii; R = min diagonal entry.
template <class Scalar>
std::int64_t default_box(const GramLattice<Scalar>& lat) {
  const Eigen::MatrixXd g = lat.to_eigen();
  const Eigen::MatrixXd inv = g.inverse();
  const double r = g.diagonal().minCoeff();
  double box = 1.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) box = std::max(box, std::sqrt(std::max(0.0, r * inv(i, i))));
  return static_cast<std::int64_t>(std::floor(box * (1.0 + 1e-9))) + 0;
}

/// Exhaustive scan over all nonzero x with |x_i| <= box. Independent of
/// lll_reduce/shortest_vector; used as their oracle.
template <class Scalar>
SvpResult<Scalar> brute_force_sv(const GramLattice<Scalar>& lat, std::int64_t box = 0) {
  const std::size_t d = lat.dim();
  if (d > 8) throw ValidationError("brute_force_dimension", "brute force is limited to dimension 8");
  if (box <= 0) box = default_box(lat);

  // Exact mode scans in integers after clearing denominators.
  std::vector<__int128> ig;
  BigInt common = 1;
  if constexpr (is_exact_v<Scalar>) {
    for (const auto& v : lat.entries()) {
      const BigInt den = boost::multiprecision::denominator(v);
      common = common / boost::multiprecision::gcd(common, den) * den;
    }
    for (const auto& v : lat.entries()) {
      const BigInt iv = boost::multiprecision::numerator(v) * (common / boost::multiprecision::denominator(v));
      if (abs(iv) > BigInt(std::int64_t{1} << 40)) throw ValidationError("brute_force_range", "entries too large for exact scan");
      ig.push_back(static_cast<__int128>(iv.convert_to<std::int64_t>()));
    }
  }

  IntVector x(d, -box);
  SvpResult<Scalar> best;
  bool have = false;
  __int128 best_int = 0;
  for (;;) {
    bool nonzero = false;
    for (auto v : x) nonzero |= (v != 0);
    if (nonzero) {
      ++best.nodes;
      if constexpr (is_exact_v<Scalar>) {
        __int128 s = 0;
        for (std::size_t i = 0; i < d; ++i) {
          if (x[i] == 0) continue;
          __int128 row = 0;
          for (std::size_t j = 0; j < d; ++j) row += ig[i * d + j] * x[j];
          s += row * x[i];
        }
        if (!have || s < best_int) {
          best_int = s;
          best.witness = x;
          have = true;
        }
      } else {
        const double s = lat.norm_sq(x);
        if (!have || s < best.length_sq) {
          best.length_sq = s;
          best.witness = x;
          have = true;
        }
      }
    }
    std::size_t i = 0;
    while (i < d && x[i] == box) x[i++] = -box;
    if (i == d) break;
    ++x[i];
  }
  if constexpr (is_exact_v<Scalar>) {
    const auto lo = static_cast<std::int64_t>(best_int);
    best.length_sq = Rational(BigInt(lo), common);
  }
  return best;
}

} // namespace abvar
