#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abvar/errors.hpp"
#include "abvar/integer_matrix.hpp"
#include "abvar/invariants.hpp"
#include "abvar/torus.hpp"

namespace abvar {

/// Relative tolerance for declaring n == (pi/8) m a tie (ties count as nef).
inline constexpr double kNefTieTolerance = 1e-12;

namespace detail {

inline BigInt factorial(std::int64_t n) {
  BigInt f = 1;
  for (std::int64_t i = 2; i <= n; ++i) f *= i;
  return f;
}

inline BigInt ipow(const BigInt& base, std::int64_t e) {
  BigInt r = 1;
  for (std::int64_t i = 0; i < e; ++i) r *= base;
  return r;
}

inline BigInt ceil_rational(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  BigInt c = num / den;
  if (num % den != 0 && num > 0) ++c;
  return c;
}

inline void require_n(std::int64_t n) {
  if (n < 1) throw ValidationError("dimension", "n must be >= 1");
}

} // namespace detail

inline double pi() { return std::acos(-1.0); }

/// Buser-Sarnak value guaranteed for some member of every polarization type:
/// (2 L^n)^{1/n} / pi.
inline double bauer_m(std::int64_t n, double Ln) {
  detail::require_n(n);
  if (!(Ln > 0)) throw ValidationError("Ln_positive", "L^n must be positive");
  return std::pow(2.0 * Ln, 1.0 / static_cast<double>(n)) / pi();
}

inline double bauer_m(std::int64_t n, const BigInt& Ln) { return bauer_m(n, Ln.convert_to<double>()); }

/// Lower bound (pi/8) m for the Seshadri number of p1*L (x) p2*L along the diagonal.
inline double seshadri_lower_bound(double m_value) {
  if (!(m_value > 0)) throw ValidationError("m_positive", "m must be positive");
  return pi() / 8.0 * m_value;
}

/// n <= (pi/8) m, ties within kNefTieTolerance counting as nef.
inline bool nef_check(std::int64_t n, double m_value) {
  detail::require_n(n);
  const double lb = seshadri_lower_bound(m_value);
  const double nd = static_cast<double>(n);
  return nd <= lb || std::abs(nd - lb) <= kNefTieTolerance * nd;
}

/// Nefness under the Bauer value, decided exactly: pi cancels and the test
/// reduces to 8^n n^n <= 2 L^n.
inline bool nef_check_bauer_exact(std::int64_t n, const BigInt& Ln) {
  detail::require_n(n);
  return detail::ipow(BigInt(8 * n), n) <= 2 * Ln;
}

struct BigCheck {
  bool ok = false;
  /// (2n)!/(n! n!) * L^n * (L^n - (2n)^n)
  BigInt intersection_number;
};

inline BigCheck big_check(std::int64_t n, const BigInt& Ln) {
  detail::require_n(n);
  if (Ln < 1) throw ValidationError("Ln_positive", "L^n must be >= 1");
  const BigInt binom = detail::factorial(2 * n) / (detail::factorial(n) * detail::factorial(n));
  const BigInt threshold = detail::ipow(BigInt(2 * n), n);
  BigCheck out;
  out.intersection_number = binom * Ln * (Ln - threshold);
  out.ok = Ln > threshold;
  return out;
}

struct PaperBound {
  Rational value;      // 8^n n^n / (2 n!)
  BigInt smallest_h0;  // least integer >= value
};

inline PaperBound paper_bound(std::int64_t n) {
  detail::require_n(n);
  PaperBound b;
  b.value = Rational(detail::ipow(BigInt(8), n) * detail::ipow(BigInt(n), n), 2 * detail::factorial(n));
  b.smallest_h0 = detail::ceil_rational(b.value);
  return b;
}

/// 2^n n!; the comparison criterion is strict (h0 > bound).
inline BigInt iyer_bound(std::int64_t n) {
  detail::require_n(n);
  return detail::ipow(BigInt(2), n) * detail::factorial(n);
}

enum class Verdict { criterion_met, criterion_not_met };

inline const char* to_string(Verdict v) {
  return v == Verdict::criterion_met ? "criterion_met" : "criterion_not_met";
}

enum class MSource { bauer, computed };

inline const char* to_string(MSource s) { return s == MSource::bauer ? "bauer" : "computed"; }

struct CriteriaReport {
  std::int64_t n = 0;
  std::vector<std::int64_t> type;
  BigInt h0;
  BigInt Ln;
  MSource m_source = MSource::bauer;
  double m_value = 0.0;
  double seshadri_lb = 0.0;
  bool nef_ok = false;
  bool big_ok = false;
  BigInt intersection_number;
  bool paper_bound_ok = false;
  bool iyer_bound_ok = false;
  Verdict verdict = Verdict::criterion_not_met;
};

namespace detail {

inline CriteriaReport criteria_skeleton(const std::vector<std::int64_t>& type) {
  CriteriaReport r;
  r.n = static_cast<std::int64_t>(type.size());
  require_n(r.n);
  for (std::size_t i = 0; i < type.size(); ++i) {
    if (type[i] < 1) throw ValidationError("type_positive", "d_" + std::to_string(i + 1) + " < 1");
    if (i > 0 && type[i] % type[i - 1] != 0) throw ValidationError("divisibility_chain", "type is not a divisibility chain");
  }
  r.type = type;
  r.h0 = 1;
  for (auto d : type) r.h0 *= d;
  r.Ln = factorial(r.n) * r.h0;
  return r;
}

inline void finish(CriteriaReport& r) {
  r.seshadri_lb = seshadri_lower_bound(r.m_value);
  const auto big = big_check(r.n, r.Ln);
  r.big_ok = big.ok;
  r.intersection_number = big.intersection_number;
  r.paper_bound_ok = Rational(r.h0) >= paper_bound(r.n).value;
  r.iyer_bound_ok = r.h0 > iyer_bound(r.n);
  r.verdict = (r.nef_ok && r.big_ok) ? Verdict::criterion_met : Verdict::criterion_not_met;
}

} // namespace detail

/// Criterion pipeline with the Bauer existence value for m.
inline CriteriaReport evaluate_bauer(const std::vector<std::int64_t>& type) {
  auto r = detail::criteria_skeleton(type);
  r.m_source = MSource::bauer;
  r.m_value = bauer_m(r.n, r.Ln);
  r.nef_ok = nef_check_bauer_exact(r.n, r.Ln);
  detail::finish(r);
  return r;
}

/// Criterion pipeline with m computed from an explicit torus.
inline CriteriaReport evaluate_computed(const PolarizedTorus& torus) {
  auto r = detail::criteria_skeleton(torus.type());
  r.m_source = MSource::computed;
  r.m_value = buser_sarnak(torus).length_sq;
  r.nef_ok = nef_check(r.n, r.m_value);
  detail::finish(r);
  return r;
}

struct BoundsRow {
  std::int64_t n = 0;
  Rational paper;
  BigInt iyer;
  double ratio = 0.0;  // paper / iyer
  bool paper_smaller = false;
};

struct BoundsTable {
  std::vector<BoundsRow> rows;
  /// Least n with paper < iyer, if it occurs within the table.
  std::optional<std::int64_t> crossover;
};

inline BoundsTable bounds_table(std::int64_t n_max) {
  detail::require_n(n_max);
  BoundsTable t;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    BoundsRow row;
    row.n = n;
    row.paper = paper_bound(n).value;
    row.iyer = iyer_bound(n);
    row.ratio = (row.paper / Rational(row.iyer)).convert_to<double>();
    row.paper_smaller = row.paper < Rational(row.iyer);
    if (row.paper_smaller && !t.crossover) t.crossover = n;
    t.rows.push_back(std::move(row));
  }
  return t;
}

} // namespace abvar
