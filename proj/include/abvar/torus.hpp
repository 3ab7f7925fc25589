#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "abvar/errors.hpp"
#include "abvar/integer_matrix.hpp"

namespace abvar {

using cd = std::complex<double>;

/// Acceptance threshold for symmetry, integrality and subspace residuals.
inline constexpr double kResidualTolerance = 1e-9;

/// Raw period data as read from input, before any validation.
struct TorusInput {
  std::vector<std::int64_t> type;
  Eigen::MatrixXcd tau;
};

struct InvariantCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<InvariantCheck> checks;
  std::vector<std::int64_t> recovered_type;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
  const InvariantCheck* first_failure() const {
    for (const auto& c : checks)
      if (!c.passed) return &c;
    return nullptr;
  }
  const InvariantCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {

// Real coordinates of C^n are (Re z, Im z) stacked.
inline Eigen::VectorXd to_real(const Eigen::VectorXcd& z) {
  const auto n = z.size();
  Eigen::VectorXd x(2 * n);
  x.head(n) = z.real();
  x.tail(n) = z.imag();
  return x;
}

inline Eigen::VectorXcd to_complex(const Eigen::VectorXd& x) {
  const auto n = x.size() / 2;
  Eigen::VectorXcd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = cd(x(i), x(n + i));
  return z;
}

/// Multiplication by i in real coordinates.
inline Eigen::MatrixXd complex_structure(Eigen::Index n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  j.block(0, n, n, n) = -Eigen::MatrixXd::Identity(n, n);
  j.block(n, 0, n, n) = Eigen::MatrixXd::Identity(n, n);
  return j;
}

inline double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline std::string format_vector(const std::vector<BigInt>& v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

} // namespace detail

/// Polarized complex torus in canonical form: lattice Delta*Z^n + tau*Z^n,
/// metric H(u,v) = u^T (Im tau)^{-1} conj(v).
///
/// Lattice basis order is d_1 e_1, ..., d_n e_n, tau e_1, ..., tau e_n; all
/// integer coordinate vectors below refer to this order.
class PolarizedTorus {
public:
  std::size_t dim() const noexcept { return type_.size(); }
  const std::vector<std::int64_t>& type() const noexcept { return type_; }
  const Eigen::MatrixXcd& tau() const noexcept { return tau_; }
  /// n x 2n complex matrix whose columns are the lattice generators.
  const Eigen::MatrixXcd& lattice_basis() const noexcept { return basis_; }
  /// Same generators in real coordinates (2n x 2n).
  const Eigen::MatrixXd& real_basis() const noexcept { return real_basis_; }
  /// Re H on R^{2n} in real coordinates.
  const Eigen::MatrixXd& real_metric() const noexcept { return real_metric_; }
  /// (Im tau)^{-1}
  const Eigen::MatrixXd& hermitian_metric() const noexcept { return metric_; }
  /// Re H(lambda_i, lambda_j) on the lattice basis.
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }
  /// Im H(lambda_i, lambda_j) on the lattice basis, rounded to integers.
  const IntMatrix& pairing() const noexcept { return pairing_; }
  const BigInt& h0() const noexcept { return h0_; }
  /// L^n = n! * h0
  const BigInt& Ln() const noexcept { return ln_; }

  /// Point of C^n with the given lattice coordinates.
  Eigen::VectorXcd point(const Eigen::VectorXd& coords) const { return basis_ * coords.cast<cd>(); }

  cd hermitian(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
    return (u.transpose() * metric_.cast<cd>() * v.conjugate())(0, 0);
  }
  double norm_sq(const Eigen::VectorXcd& u) const { return hermitian(u, u).real(); }

  friend PolarizedTorus make_torus(const TorusInput& input);

private:
  std::vector<std::int64_t> type_;
  Eigen::MatrixXcd tau_;
  Eigen::MatrixXcd basis_;
  Eigen::MatrixXd real_basis_;
  Eigen::MatrixXd real_metric_;
  Eigen::MatrixXd metric_;
  Eigen::MatrixXd gram_;
  IntMatrix pairing_;
  BigInt h0_;
  BigInt ln_;
};

namespace detail {

struct DerivedData {
  Eigen::MatrixXcd basis;
  Eigen::MatrixXd metric;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd pairing;
};

inline DerivedData derive(const std::vector<std::int64_t>& type, const Eigen::MatrixXcd& tau) {
  const auto n = static_cast<Eigen::Index>(type.size());
  DerivedData out;
  out.basis.resize(n, 2 * n);
  out.basis.setZero();
  for (Eigen::Index i = 0; i < n; ++i) out.basis(i, i) = static_cast<double>(type[i]);
  out.basis.rightCols(n) = tau;

  const Eigen::MatrixXd y = 0.5 * (tau.imag() + tau.imag().transpose());
  out.metric = y.inverse();
  out.metric = 0.5 * (out.metric + out.metric.transpose());

  const Eigen::MatrixXd re = out.basis.real();
  const Eigen::MatrixXd im = out.basis.imag();
  out.gram = re.transpose() * out.metric * re + im.transpose() * out.metric * im;
  out.gram = 0.5 * (out.gram + out.gram.transpose());
  out.pairing = im.transpose() * out.metric * re - re.transpose() * out.metric * im;
  return out;
}

// Elementary divisors of an alternating integer matrix, taken once per pair.
inline std::optional<std::vector<std::int64_t>> paired_divisors(const IntMatrix& pairing) {
  auto snf = smith_normal_form(pairing);
  if (snf.divisors.size() != pairing.rows() || snf.divisors.size() % 2 != 0) return std::nullopt;
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < snf.divisors.size(); i += 2) {
    if (snf.divisors[i] != snf.divisors[i + 1]) return std::nullopt;
    out.push_back(snf.divisors[i].convert_to<std::int64_t>());
  }
  return out;
}

} // namespace detail

/// Checks every torus invariant and reports residuals. Never throws.
inline ValidationReport validate(const TorusInput& input) {
  ValidationReport rep;
  const auto n = input.type.size();
  {
    InvariantCheck c{"dimension", true, 0.0, ""};
    if (n == 0) {
      c.passed = false;
      c.detail = "polarization type is empty";
    } else if (static_cast<std::size_t>(input.tau.rows()) != n || static_cast<std::size_t>(input.tau.cols()) != n) {
      c.passed = false;
      c.detail = "tau is " + std::to_string(input.tau.rows()) + "x" + std::to_string(input.tau.cols()) +
                 ", type has length " + std::to_string(n);
    }
    rep.checks.push_back(c);
    if (!c.passed) return rep;
  }
  {
    InvariantCheck pos{"type_positive", true, 0.0, ""};
    InvariantCheck chain{"divisibility_chain", true, 0.0, ""};
    for (std::size_t i = 0; i < n; ++i) {
      if (input.type[i] < 1) {
        pos.passed = false;
        pos.detail = "d_" + std::to_string(i + 1) + " = " + std::to_string(input.type[i]);
      }
    }
    if (pos.passed)
      for (std::size_t i = 0; i + 1 < n; ++i)
        if (input.type[i + 1] % input.type[i] != 0) {
          chain.passed = false;
          chain.detail = std::to_string(input.type[i]) + " does not divide " + std::to_string(input.type[i + 1]);
          break;
        }
    rep.checks.push_back(pos);
    rep.checks.push_back(chain);
    if (!pos.passed) return rep;
  }

  const Eigen::MatrixXcd& tau = input.tau;
  const double asym = (tau - tau.transpose()).cwiseAbs().maxCoeff();
  rep.checks.push_back({"tau_symmetric", asym <= kResidualTolerance, asym, ""});

  const Eigen::MatrixXd y = 0.5 * (tau.imag() + tau.imag().transpose());
  const double y_min = detail::min_eigenvalue(y);
  rep.checks.push_back({"imag_positive_definite", y_min > 0.0, y_min, "minimum eigenvalue of Im tau"});
  if (!(y_min > 0.0) || !tau.allFinite()) return rep;

  const auto data = detail::derive(input.type, tau);
  const double g_min = detail::min_eigenvalue(data.gram);
  rep.checks.push_back({"gram_positive_definite", g_min > 0.0, g_min, "minimum eigenvalue of the Gram matrix"});

  const Eigen::MatrixXd rounded = data.pairing.array().round().matrix();
  const double frac = (data.pairing - rounded).cwiseAbs().maxCoeff();
  rep.checks.push_back({"pairing_integral", frac <= kResidualTolerance, frac, ""});
  if (frac > kResidualTolerance) return rep;

  IntMatrix pairing(rounded.rows(), rounded.cols());
  for (Eigen::Index i = 0; i < rounded.rows(); ++i)
    for (Eigen::Index j = 0; j < rounded.cols(); ++j) pairing(i, j) = static_cast<std::int64_t>(rounded(i, j));
  InvariantCheck rec{"type_recovered", false, 0.0, ""};
  if (auto d = detail::paired_divisors(pairing)) {
    rep.recovered_type = *d;
    rec.passed = (*d == input.type);
    if (!rec.passed) rec.detail = "elementary divisors differ from the declared type";
  } else {
    rec.detail = "pairing is degenerate or its divisors are not paired";
  }
  rep.checks.push_back(rec);
  return rep;
}

/// Builds a torus, throwing ValidationError named after the first violated invariant.
inline PolarizedTorus make_torus(const TorusInput& input) {
  const auto rep = validate(input);
  if (const auto* bad = rep.first_failure()) {
    std::ostringstream os;
    os << "residual " << bad->residual;
    if (!bad->detail.empty()) os << " (" << bad->detail << ")";
    throw ValidationError(bad->name, os.str());
  }

  PolarizedTorus t;
  t.type_ = input.type;
  t.tau_ = input.tau;
  auto data = detail::derive(input.type, input.tau);
  const auto n = static_cast<Eigen::Index>(input.type.size());
  t.basis_ = std::move(data.basis);
  t.metric_ = std::move(data.metric);
  t.gram_ = std::move(data.gram);
  t.real_basis_.resize(2 * n, 2 * n);
  t.real_basis_.topRows(n) = t.basis_.real();
  t.real_basis_.bottomRows(n) = t.basis_.imag();
  t.real_metric_ = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  t.real_metric_.topLeftCorner(n, n) = t.metric_;
  t.real_metric_.bottomRightCorner(n, n) = t.metric_;
  t.pairing_ = IntMatrix(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < 2 * n; ++i)
    for (Eigen::Index j = 0; j < 2 * n; ++j)
      t.pairing_(i, j) = static_cast<std::int64_t>(std::llround(data.pairing(i, j)));
  t.h0_ = 1;
  for (auto d : input.type) t.h0_ *= d;
  BigInt fact = 1;
  for (std::int64_t i = 2; i <= n; ++i) fact *= i;
  t.ln_ = fact * t.h0_;
  return t;
}

inline ValidationReport validate(const PolarizedTorus& torus) { return validate(TorusInput{torus.type(), torus.tau()}); }

/// Complex subtorus S = F / (Lambda cap F) given by a saturated sublattice.
class Subtorus {
public:
  const PolarizedTorus& parent() const noexcept { return parent_; }
  /// Complex dimension of F.
  std::size_t k() const noexcept { return k_; }
  /// 2n x 2k integer coordinates of the generators of Lambda_S.
  const IntMatrix& sublattice() const noexcept { return sublattice_; }
  /// 2n x 2(n-k) integer coordinates completing Lambda_S to a basis of Lambda.
  const IntMatrix& complement() const noexcept { return complement_; }
  /// H-orthonormal complex frame of F (n x k).
  const Eigen::MatrixXcd& f_frame() const noexcept { return f_frame_; }
  /// H-orthonormal complex frame of the orthogonal complement (n x (n-k)).
  const Eigen::MatrixXcd& perp_frame() const noexcept { return perp_frame_; }
  /// Orthogonal projection onto F-perp in real coordinates (self-adjoint for Re H).
  const Eigen::MatrixXd& proj_perp() const noexcept { return proj_perp_; }

  Eigen::VectorXcd project_perp(const Eigen::VectorXcd& z) const {
    return detail::to_complex(proj_perp_ * detail::to_real(z));
  }

  friend Subtorus make_subtorus(const PolarizedTorus& torus, const IntMatrix& sublattice);

private:
  PolarizedTorus parent_;
  std::size_t k_ = 0;
  IntMatrix sublattice_;
  IntMatrix complement_;
  Eigen::MatrixXcd f_frame_;
  Eigen::MatrixXcd perp_frame_;
  Eigen::MatrixXd proj_perp_;
};

namespace detail {

// Complex Gram-Schmidt under H; keeps vectors whose residual norm exceeds eps.
inline Eigen::MatrixXcd orthonormalize(const PolarizedTorus& t, const std::vector<Eigen::VectorXcd>& candidates,
                                       const Eigen::MatrixXcd& against, std::size_t want, double eps = 1e-8) {
  std::vector<Eigen::VectorXcd> kept;
  for (const auto& c : candidates) {
    if (kept.size() == want) break;
    Eigen::VectorXcd v = c;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < against.cols(); ++j) v -= t.hermitian(v, against.col(j)) * against.col(j);
      for (const auto& q : kept) v -= t.hermitian(v, q) * q;
    }
    const double nrm = std::sqrt(t.norm_sq(v));
    const double ref = std::sqrt(t.norm_sq(c));
    if (nrm > eps * std::max(1.0, ref)) kept.push_back(v / nrm);
  }
  Eigen::MatrixXcd out(t.dim(), kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = kept[i];
  return out;
}

} // namespace detail

/// Builds the subtorus spanned by the integer lattice coordinates in the
/// columns of `sublattice`; rejects dependent, non-complex or non-saturated input.
inline Subtorus make_subtorus(const PolarizedTorus& torus, const IntMatrix& sublattice) {
  const std::size_t n = torus.dim();
  if (sublattice.rows() != 2 * n)
    throw ValidationError("sublattice_shape", "columns must have length " + std::to_string(2 * n));
  if (sublattice.cols() % 2 != 0)
    throw ValidationError("sublattice_shape", "a complex subtorus needs an even number of generators");
  const std::size_t k = sublattice.cols() / 2;
  if (k >= n) throw ValidationError("proper_subtorus", "k = " + std::to_string(k) + " must be < n = " + std::to_string(n));

  const auto snf = smith_normal_form(sublattice);
  if (snf.divisors.size() != 2 * k)
    throw ValidationError("sublattice_independent",
                          "rank " + std::to_string(snf.divisors.size()) + " < " + std::to_string(2 * k));

  const auto m = static_cast<Eigen::Index>(2 * n);
  const Eigen::MatrixXd& g = torus.real_metric();
  Eigen::MatrixXd span(m, static_cast<Eigen::Index>(2 * k));
  for (std::size_t c = 0; c < 2 * k; ++c) {
    Eigen::VectorXd coords(m);
    for (Eigen::Index r = 0; r < m; ++r) coords(r) = sublattice(r, c).convert_to<double>();
    span.col(static_cast<Eigen::Index>(c)) = torus.real_basis() * coords;
  }

  Eigen::MatrixXd proj_f = Eigen::MatrixXd::Zero(m, m);
  if (k > 0) {
    const Eigen::MatrixXd gram_f = span.transpose() * g * span;
    proj_f = span * gram_f.ldlt().solve(span.transpose() * g);
  }
  const Eigen::MatrixXd proj_perp = Eigen::MatrixXd::Identity(m, m) - proj_f;

  if (k > 0) {
    const Eigen::MatrixXd jspan = detail::complex_structure(static_cast<Eigen::Index>(n)) * span;
    const Eigen::MatrixXd off = proj_perp * jspan;
    double defect = 0.0;
    for (Eigen::Index c = 0; c < off.cols(); ++c) {
      const double num = std::sqrt(off.col(c).dot(g * off.col(c)));
      const double den = std::sqrt(jspan.col(c).dot(g * jspan.col(c)));
      defect = std::max(defect, num / den);
    }
    if (defect > kResidualTolerance) {
      std::ostringstream os;
      os << "defect norm of J*F against F is " << defect;
      throw ValidationError("complex_subspace", os.str());
    }
  }

  for (std::size_t i = 0; i < snf.divisors.size(); ++i)
    if (snf.divisors[i] != 1) {
      const auto witness = snf.left.column(i);
      throw ValidationError("saturated", "lattice vector " + detail::format_vector(witness) +
                                             " lies in F but not in the sublattice (invariant factor " +
                                             snf.divisors[i].str() + ")");
    }

  Subtorus s;
  s.parent_ = torus;
  s.k_ = k;
  s.sublattice_ = sublattice;
  s.complement_ = IntMatrix(2 * n, 2 * (n - k));
  for (std::size_t r = 0; r < 2 * n; ++r)
    for (std::size_t c = 0; c < 2 * (n - k); ++c) s.complement_(r, c) = snf.left(r, 2 * k + c);
  s.proj_perp_ = proj_perp;

  std::vector<Eigen::VectorXcd> f_candidates;
  for (Eigen::Index c = 0; c < span.cols(); ++c) f_candidates.push_back(detail::to_complex(span.col(c)));
  s.f_frame_ = detail::orthonormalize(torus, f_candidates, Eigen::MatrixXcd(n, 0), k);
  std::vector<Eigen::VectorXcd> perp_candidates;
  for (std::size_t i = 0; i < n; ++i) perp_candidates.push_back(Eigen::VectorXcd::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)));
  s.perp_frame_ = detail::orthonormalize(torus, perp_candidates, s.f_frame_, n - k);
  if (static_cast<std::size_t>(s.f_frame_.cols()) != k || static_cast<std::size_t>(s.perp_frame_.cols()) != n - k)
    throw NumericalError("failed to build orthonormal frames for F and its complement");
  return s;
}

} // namespace abvar
