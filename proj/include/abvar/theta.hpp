#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "abvar/errors.hpp"
#include "abvar/torus.hpp"

namespace abvar {

/// Classical theta functions with characteristics for the polarization
/// level * L on the canonical torus Delta Z^n + tau Z^n.
///
/// For a in Z^n modulo level * Delta and c = (level Delta)^{-1} a,
///
///   theta_a(z) = sum_{l in Z^n} exp(pi i level (l+c)^T tau (l+c)
///                                   + 2 pi i level (l+c)^T z).
///
/// Automorphy, which the tests enforce:
///   theta_a(z + Delta m) = theta_a(z)
///   theta_a(z + tau m)   = exp(-pi i level m^T tau m - 2 pi i level m^T z) theta_a(z)
///
/// Products of two level-1 sections share the level-2 factor, which is what
/// makes the multiplication map well defined on these bases.
struct ThetaBasis {
  PolarizedTorus torus;
  int level = 1;
  /// Integer characteristics a, ordered lexicographically with a_1 slowest.
  std::vector<std::vector<std::int64_t>> characteristics;
  /// Half-width of the summation box around the dominant term.
  int truncation = 0;

  std::size_t size() const noexcept { return characteristics.size(); }
  /// c = (level Delta)^{-1} a as reals.
  Eigen::VectorXd shift(std::size_t index) const;
};

inline constexpr double kThetaTolerance = 1e-16;
inline constexpr double kMinImagEigenvalue = 1e-6;
inline constexpr std::size_t kMaxThetaDimension = 2;

inline Eigen::VectorXd ThetaBasis::shift(std::size_t index) const {
  const auto& a = characteristics.at(index);
  const auto& d = torus.type();
  Eigen::VectorXd c(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    c(static_cast<Eigen::Index>(i)) = static_cast<double>(a[i]) / static_cast<double>(level * d[i]);
  return c;
}

namespace detail {

inline double min_imag_eigenvalue(const PolarizedTorus& t) { return min_eigenvalue(t.tau().imag()); }

inline int theta_truncation(double lambda_min, int level, double tol) {
  return 1 + static_cast<int>(std::ceil(std::sqrt(-std::log(tol) / (std::acos(-1.0) * level * lambda_min))));
}

} // namespace detail

/// Basis of H^0(A, L^level) for level 1 or 2 on a torus of dimension at most 2.
inline ThetaBasis theta_basis(const PolarizedTorus& torus, int level, double tol = kThetaTolerance) {
  const std::size_t n = torus.dim();
  if (n > kMaxThetaDimension)
    throw ValidationError("theta_dimension", "theta bases are limited to n <= 2, got n = " + std::to_string(n));
  if (level != 1 && level != 2) throw ValidationError("theta_level", "level must be 1 or 2");
  if (!(tol > 0.0 && tol < 1.0)) throw ValidationError("theta_tolerance", "tolerance must lie in (0, 1)");
  const double lam = detail::min_imag_eigenvalue(torus);
  if (lam < kMinImagEigenvalue) {
    std::ostringstream os;
    os << "smallest eigenvalue of Im tau is " << lam << ", below " << kMinImagEigenvalue;
    throw ValidationError("imag_conditioning", os.str());
  }
  ThetaBasis b{torus, level, {}, detail::theta_truncation(lam, level, tol)};
  std::vector<std::int64_t> a(n, 0);
  // Odometer over prod_i [0, level d_i).
  while (true) {
    b.characteristics.push_back(a);
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++a[i] < level * torus.type()[i]) break;
      a[i] = 0;
      if (i == 0) return b;
    }
  }
}

/// Direct truncated series, centred at the dominant term for this z.
inline cd evaluate_series(const ThetaBasis& basis, std::size_t index, const Eigen::VectorXcd& z) {
  if (index >= basis.size()) throw ValidationError("theta_index", "index out of range");
  const auto& tau = basis.torus.tau();
  const auto n = tau.rows();
  if (z.size() != n) throw ValidationError("theta_point", "point has the wrong dimension");
  const double pi = std::acos(-1.0);
  const Eigen::VectorXd c = basis.shift(index);
  const Eigen::MatrixXd y = tau.imag();
  // The real part of the exponent is -pi level (x^T Y x + 2 x^T Im z) with
  // x = l + c, maximal at x = -Y^{-1} Im z.
  const Eigen::VectorXd centre = -y.ldlt().solve(z.imag()) - c;
  const int k = basis.truncation;
  const cd ipl(0.0, pi * basis.level);

  std::vector<cd> exponents;
  Eigen::VectorXi offset = Eigen::VectorXi::Constant(n, -k);
  Eigen::VectorXd base(n);
  for (Eigen::Index i = 0; i < n; ++i) base(i) = std::round(centre(i));
  double max_re = -std::numeric_limits<double>::infinity();
  while (true) {
    const Eigen::VectorXd x = base + offset.cast<double>() + c;
    const Eigen::VectorXcd xc = x.cast<cd>();
    const cd e = ipl * (xc.transpose() * tau * xc)(0, 0) + 2.0 * ipl * (xc.transpose() * z)(0, 0);
    exponents.push_back(e);
    max_re = std::max(max_re, e.real());
    Eigen::Index i = n;
    bool done = true;
    while (i > 0) {
      --i;
      if (++offset(i) <= k) {
        done = false;
        break;
      }
      offset(i) = -k;
    }
    if (done) break;
  }
  cd sum = 0.0;
  for (const cd& e : exponents) sum += std::exp(e - max_re);
  return std::exp(max_re) * sum;
}

/// exp(-pi i level m^T tau m - 2 pi i level m^T z), the factor relating
/// theta(z + tau m) to theta(z).
inline cd automorphy_factor(const ThetaBasis& basis, const Eigen::VectorXd& m, const Eigen::VectorXcd& z) {
  const double pi = std::acos(-1.0);
  const Eigen::VectorXcd mc = m.cast<cd>();
  const cd ipl(0.0, pi * basis.level);
  return std::exp(-ipl * (mc.transpose() * basis.torus.tau() * mc)(0, 0) - 2.0 * ipl * (mc.transpose() * z)(0, 0));
}

/// Section value with z first reduced into the fundamental parallelepiped;
/// the automorphy factor restores the value at z.
inline cd evaluate_section(const ThetaBasis& basis, std::size_t index, const Eigen::VectorXcd& z) {
  const auto& tau = basis.torus.tau();
  const auto n = tau.rows();
  if (z.size() != n) throw ValidationError("theta_point", "point has the wrong dimension");
  // z = Delta x + tau y with real x, y.
  const Eigen::VectorXd y = tau.imag().ldlt().solve(z.imag());
  Eigen::VectorXd m(n);
  for (Eigen::Index i = 0; i < n; ++i) m(i) = std::floor(y(i));
  const Eigen::VectorXcd shifted = z - tau * m.cast<cd>();
  Eigen::VectorXcd reduced = shifted;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(basis.torus.type()[static_cast<std::size_t>(i)]);
    const double re_tau_y = (tau.real() * (y - m))(i);
    reduced(i) -= d * std::floor((shifted(i).real() - re_tau_y) / d);
  }
  // theta(reduced + tau m) = factor(m, reduced) * theta(reduced).
  return automorphy_factor(basis, m, reduced) * evaluate_series(basis, index, reduced);
}

/// Values of every basis element at every point (rows are points).
inline Eigen::MatrixXcd evaluation_matrix(const ThetaBasis& basis, const std::vector<Eigen::VectorXcd>& points) {
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t s = 0; s < points.size(); ++s)
    for (std::size_t j = 0; j < basis.size(); ++j)
      out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = evaluate_section(basis, j, points[s]);
  return out;
}

/// Uniform points Delta x + tau y with x, y in [0,1)^n. The doubles are
/// built from the top 53 bits of each draw so the sequence is the same on
/// every platform.
inline std::vector<Eigen::VectorXcd> sample_points(const PolarizedTorus& torus, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const auto n = static_cast<Eigen::Index>(torus.dim());
  std::vector<Eigen::VectorXcd> pts;
  pts.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    Eigen::VectorXd x(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = static_cast<double>(torus.type()[static_cast<std::size_t>(i)]) * unit();
    for (Eigen::Index i = 0; i < n; ++i) y(i) = unit();
    pts.push_back(x.cast<cd>() + torus.tau() * y.cast<cd>());
  }
  return pts;
}

struct Rho2Options {
  /// Number of sample points; 0 selects 4 * dim_target.
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double tol = kThetaTolerance;
  /// Multiplies the truncation chosen from tol (used for stability checks).
  int truncation_scale = 1;
  /// Largest acceptable condition number of the level-2 evaluation matrix.
  double max_condition = 1e8;
  int max_attempts = 5;
  double rank_threshold = 1e-8;
  double max_residual = 1e-6;
};

struct Rho2Report {
  std::size_t dim_sym2 = 0;
  std::size_t dim_target = 0;
  std::vector<double> singular_values;
  std::size_t numerical_rank = 0;
  bool surjective = false;
  std::size_t sample_count = 0;
  std::uint64_t seed_used = 0;
  int attempts = 0;
  int truncation_level1 = 0;
  int truncation_level2 = 0;
  double residual = 0.0;
  double condition = 0.0;

  const char* verdict() const { return surjective ? "surjective" : "not surjective at working precision"; }
};

namespace detail {

inline void require_rho2_scope(const PolarizedTorus& torus) {
  if (torus.dim() > kMaxThetaDimension)
    throw ValidationError("theta_dimension", "rho2 is limited to n <= 2, got n = " + std::to_string(torus.dim()));
}

inline ThetaBasis scaled_basis(const PolarizedTorus& torus, int level, const Rho2Options& opt) {
  if (opt.truncation_scale < 1) throw ValidationError("truncation_scale", "must be >= 1");
  ThetaBasis b = theta_basis(torus, level, opt.tol);
  b.truncation *= opt.truncation_scale;
  return b;
}

// Max-magnitude level-2 value per row, used to equalize dynamic range.
inline Eigen::VectorXd row_scales(const Eigen::MatrixXcd& level2) {
  Eigen::VectorXd s(level2.rows());
  for (Eigen::Index r = 0; r < level2.rows(); ++r) {
    s(r) = level2.row(r).cwiseAbs().maxCoeff();
    if (!(s(r) > 0.0)) throw NumericalError("all level-2 sections vanish at a sample point");
  }
  return s;
}

inline Eigen::MatrixXcd products(const Eigen::MatrixXcd& level1) {
  const auto h = level1.cols();
  Eigen::MatrixXcd p(level1.rows(), h * (h + 1) / 2);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = i; j < h; ++j) p.col(col++) = level1.col(i).cwiseProduct(level1.col(j));
  return p;
}

} // namespace detail

/// Row-scaled matrix of products theta_i theta_j (i <= j) of level-1
/// sections at the sample points.
inline Eigen::MatrixXcd rho2_matrix(const PolarizedTorus& torus, const Rho2Options& opt = {}) {
  detail::require_rho2_scope(torus);
  const ThetaBasis b1 = detail::scaled_basis(torus, 1, opt);
  const ThetaBasis b2 = detail::scaled_basis(torus, 2, opt);
  const std::size_t target = b2.size();
  const std::size_t samples = opt.samples == 0 ? 4 * target : opt.samples;
  if (samples < 2 * target) throw ValidationError("rho2_samples", "need at least 2 * dim_target samples");
  const auto pts = sample_points(torus, samples, opt.seed);
  const Eigen::VectorXd scale = detail::row_scales(evaluation_matrix(b2, pts));
  return scale.cwiseInverse().asDiagonal() * detail::products(evaluation_matrix(b1, pts));
}

/// Rank of Sym^2 H^0(L) -> H^0(L^2): every product column is expressed in
/// the level-2 basis by least squares over the samples, and the singular
/// values of the coefficient matrix decide the rank.
inline Rho2Report rho2_rank(const PolarizedTorus& torus, const Rho2Options& opt = {}) {
  detail::require_rho2_scope(torus);
  const ThetaBasis b1 = detail::scaled_basis(torus, 1, opt);
  const ThetaBasis b2 = detail::scaled_basis(torus, 2, opt);
  const std::size_t h0 = b1.size();
  const std::size_t target = b2.size();
  const std::size_t samples = opt.samples == 0 ? 4 * target : opt.samples;
  if (samples < 2 * target) throw ValidationError("rho2_samples", "need at least 2 * dim_target samples");

  Rho2Report rep;
  rep.dim_sym2 = h0 * (h0 + 1) / 2;
  rep.dim_target = target;
  rep.sample_count = samples;
  rep.truncation_level1 = b1.truncation;
  rep.truncation_level2 = b2.truncation;

  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(attempt);
    const auto pts = sample_points(torus, samples, seed);
    const Eigen::MatrixXcd m2raw = evaluation_matrix(b2, pts);
    const Eigen::VectorXd inv = detail::row_scales(m2raw).cwiseInverse();
    const Eigen::MatrixXcd m2 = inv.asDiagonal() * m2raw;
    const Eigen::MatrixXcd p = inv.asDiagonal() * detail::products(evaluation_matrix(b1, pts));

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m2, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    rep.attempts = attempt + 1;
    rep.condition = cond;
    if (!(cond <= opt.max_condition)) continue;

    const Eigen::MatrixXcd coeff = svd.solve(p);
    rep.residual = (m2 * coeff - p).norm() / p.norm();
    if (!(rep.residual < opt.max_residual)) {
      std::ostringstream os;
      os << "least-squares residual " << rep.residual << " expressing products in the level-2 basis";
      throw NumericalError(os.str());
    }
    const Eigen::VectorXd cs = Eigen::BDCSVD<Eigen::MatrixXcd>(coeff).singularValues();
    rep.singular_values.assign(cs.data(), cs.data() + cs.size());
    const double cutoff = opt.rank_threshold * (cs.size() > 0 ? cs(0) : 0.0);
    rep.numerical_rank = static_cast<std::size_t>(std::count_if(rep.singular_values.begin(), rep.singular_values.end(),
                                                                [cutoff](double s) { return s > cutoff; }));
    rep.surjective = rep.numerical_rank == rep.dim_target;
    rep.seed_used = seed;
    return rep;
  }
  std::ostringstream os;
  os << "level-2 evaluation matrix stayed ill-conditioned (condition " << rep.condition << ") after "
     << opt.max_attempts << " sample sets";
  throw NumericalError(os.str());
}

} // namespace abvar
