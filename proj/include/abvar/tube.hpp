#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "abvar/errors.hpp"
#include "abvar/invariants.hpp"
#include "abvar/quadrature.hpp"
#include "abvar/torus.hpp"

namespace abvar {

/// Vector-valued polynomial; coefficient j multiplies t^j.
using VectorPoly = std::vector<Eigen::VectorXcd>;

namespace poly {

inline Eigen::VectorXcd eval(const VectorPoly& c, cd t, Eigen::Index dim) {
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(dim);
  for (std::size_t j = c.size(); j-- > 0;) acc = acc * t + c[j];
  return acc;
}

inline Eigen::VectorXcd derivative(const VectorPoly& c, cd t, Eigen::Index dim) {
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(dim);
  for (std::size_t j = c.size(); j-- > 1;) acc = acc * t + static_cast<double>(j) * c[j];
  return acc;
}

inline double scale(const VectorPoly& c) {
  double s = 0.0;
  for (const auto& v : c)
    if (v.size() > 0) s = std::max(s, v.cwiseAbs().maxCoeff());
  return s;
}

/// Taylor coefficients at t0: coefficient j multiplies (t - t0)^j.
inline VectorPoly shift(const VectorPoly& c, cd t0) {
  VectorPoly out = c;
  // Repeated synthetic division.
  const std::size_t deg = c.size();
  for (std::size_t k = 0; k < deg; ++k)
    for (std::size_t j = deg - 1; j > k; --j) out[j - 1] += t0 * out[j];
  return out;
}

/// Order of vanishing at t0; -1 when the polynomial is identically zero.
inline int vanishing_order(const VectorPoly& c, cd t0, double rel_tol = 1e-9) {
  const double s = scale(c);
  if (s == 0.0) return -1;
  const auto taylor = shift(c, t0);
  const double ref = s * std::pow(1.0 + std::abs(t0), static_cast<double>(c.size()));
  for (std::size_t j = 0; j < taylor.size(); ++j)
    if (taylor[j].norm() > rel_tol * ref) return static_cast<int>(j);
  return -1;
}

/// Roots of a scalar polynomial (coefficient j multiplies t^j).
inline std::vector<cd> roots(std::vector<cd> a) {
  while (!a.empty() && std::abs(a.back()) == 0.0) a.pop_back();
  if (a.size() <= 1) return {};
  const auto deg = static_cast<Eigen::Index>(a.size() - 1);
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (Eigen::Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < deg; ++i) comp(i, deg - 1) = -a[static_cast<std::size_t>(i)] / a.back();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<cd> out(es.eigenvalues().data(), es.eigenvalues().data() + deg);
  return out;
}

} // namespace poly

struct IntersectionPoint {
  cd t;
  int multiplicity = 0;
};

/// Polynomial holomorphic curve t -> F_frame f(t) + perp_frame p(t), with
/// f and p given in H-orthonormal coordinates of F and its complement.
/// The parameter domain is the square |Re t|, |Im t| <= domain_radius.
struct CurveSpec {
  VectorPoly f;
  VectorPoly p;
  double domain_radius = 1.0;
  std::vector<IntersectionPoint> mults;
};

/// Geodesic tube of radius r around a subtorus; r is capped by half the
/// square root of the relative Buser-Sarnak invariant.
class TubeSpec {
public:
  const Subtorus& sub() const noexcept { return sub_; }
  double r() const noexcept { return r_; }
  double relative_invariant() const noexcept { return m_rel_; }
  double max_radius() const noexcept { return std::sqrt(m_rel_) / 2.0; }

  friend TubeSpec make_tube(const Subtorus& sub, double r);

private:
  Subtorus sub_;
  double r_ = 0.0;
  double m_rel_ = 0.0;
};

inline TubeSpec make_tube(const Subtorus& sub, double r) {
  TubeSpec t;
  t.sub_ = sub;
  t.m_rel_ = relative_buser_sarnak(sub).length_sq;
  if (!(r > 0.0) || r > t.max_radius() + 1e-12) {
    std::ostringstream os;
    os << "r = " << r << " must lie in (0, " << t.max_radius() << "]";
    throw ValidationError("tube_radius", os.str());
  }
  t.r_ = r;
  return t;
}

namespace detail {

inline bool in_domain(cd t, double half_width) {
  return std::abs(t.real()) <= half_width && std::abs(t.imag()) <= half_width;
}

// Common zeros of a vector polynomial inside the parameter square, clustered.
inline std::vector<cd> common_zeros(const VectorPoly& p, Eigen::Index dim, double half_width) {
  const double s = poly::scale(p);
  // Component with the fewest roots among those not identically zero.
  Eigen::Index best = -1;
  std::size_t best_deg = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    std::size_t deg = 0;
    for (std::size_t j = 0; j < p.size(); ++j)
      if (std::abs(p[j](i)) > 1e-14 * s) deg = j + 1;
    if (deg > 0 && (best < 0 || deg < best_deg)) {
      best = i;
      best_deg = deg;
    }
  }
  std::vector<cd> out;
  if (best < 0) return out;
  std::vector<cd> a;
  for (const auto& c : p) a.push_back(c(best));
  for (cd z : poly::roots(a)) {
    const double ref = s * std::pow(1.0 + std::abs(z), static_cast<double>(p.size()));
    if (poly::eval(p, z, dim).norm() > 1e-6 * ref) continue;
    if (!in_domain(z, half_width * (1 + 1e-9))) continue;
    bool merged = false;
    for (auto& o : out)
      if (std::abs(o - z) < 1e-3) merged = true;
    if (!merged) out.push_back(z);
  }
  return out;
}

} // namespace detail

/// Checks a curve against a tube and returns the total intersection with
/// the exceptional divisor: the sum of vanishing orders of the F-perp
/// component over the declared points.
inline int exceptional_intersection(const TubeSpec& tube, const CurveSpec& curve) {
  const auto& sub = tube.sub();
  const auto k = static_cast<Eigen::Index>(sub.k());
  const auto q = static_cast<Eigen::Index>(sub.parent().dim() - sub.k());
  for (const auto& c : curve.f)
    if (c.size() != k) throw ValidationError("curve_shape", "F-component coefficients must have length " + std::to_string(k));
  for (const auto& c : curve.p)
    if (c.size() != q) throw ValidationError("curve_shape", "F-perp coefficients must have length " + std::to_string(q));
  if (!(curve.domain_radius > 0)) throw ValidationError("curve_domain", "domain_radius must be positive");
  if (poly::scale(curve.p) == 0.0) throw ValidationError("curve_not_in_S", "F-perp component is identically zero");
  auto nonconstant = [](const VectorPoly& c) {
    return c.size() > 1 && poly::scale(VectorPoly(c.begin() + 1, c.end())) > 0.0;
  };
  if (!nonconstant(curve.f) && !nonconstant(curve.p)) throw ValidationError("curve_nonconstant", "curve is constant");

  int total = 0;
  for (const auto& pt : curve.mults) {
    const int order = poly::vanishing_order(curve.p, pt.t);
    std::ostringstream where;
    where << "t = " << pt.t;
    if (order == 0)
      throw ValidationError("curve_multiplicity", where.str() + " does not map into S");
    if (order != pt.multiplicity)
      throw ValidationError("curve_multiplicity", where.str() + ": declared " + std::to_string(pt.multiplicity) +
                                                      ", vanishing order is " + std::to_string(order));
    const double dnorm = poly::derivative(curve.f, pt.t, k).norm() + poly::derivative(curve.p, pt.t, q).norm();
    if (dnorm <= 1e-9 * std::max(1.0, poly::scale(curve.f) + poly::scale(curve.p)))
      throw ValidationError("curve_singular_at_S", where.str() + ": curve is singular where it meets S");
    total += order;
  }
  for (cd z : detail::common_zeros(curve.p, q, curve.domain_radius)) {
    bool declared = false;
    for (const auto& pt : curve.mults) declared |= std::abs(pt.t - z) < 1e-3;
    if (!declared) {
      std::ostringstream os;
      os << "curve meets S at t = " << z << " which is not declared";
      throw ValidationError("curve_multiplicity", os.str());
    }
  }
  return total;
}

/// Area of the part of the curve inside the tube, measured with the
/// Kaehler form of the polarization: integral of |gamma'(t)|_H^2 over
/// {t : |q_perp(gamma(t))| < r}.
inline QuadratureResult curve_area_in_tube(const TubeSpec& tube, const CurveSpec& curve, QuadratureOptions opt = {}) {
  const auto& sub = tube.sub();
  const auto& torus = sub.parent();
  const auto k = static_cast<Eigen::Index>(sub.k());
  const auto q = static_cast<Eigen::Index>(torus.dim() - sub.k());
  const Eigen::MatrixXcd ff = sub.f_frame();
  const Eigen::MatrixXcd pf = sub.perp_frame();
  const double r2 = tube.r() * tube.r();

  auto gamma = [&](cd t) {
    Eigen::VectorXcd z = pf * poly::eval(curve.p, t, q);
    if (k > 0) z += ff * poly::eval(curve.f, t, k);
    return z;
  };
  auto gamma_prime = [&](cd t) {
    Eigen::VectorXcd z = pf * poly::derivative(curve.p, t, q);
    if (k > 0) z += ff * poly::derivative(curve.f, t, k);
    return z;
  };
  auto level = [&](cd t) {
    const Eigen::VectorXcd w = sub.project_perp(gamma(t));
    const Eigen::VectorXcd dw = sub.project_perp(gamma_prime(t));
    const cd h = torus.hermitian(dw, w);
    return LevelValue{torus.norm_sq(w) - r2, 2.0 * h.real(), -2.0 * h.imag()};
  };
  auto density = [&](cd t) { return torus.norm_sq(gamma_prime(t)); };
  auto res = integrate_region(level, density, curve.domain_radius, opt);
  if (!res.converged) {
    std::ostringstream os;
    os << "quadrature error estimate " << res.error_estimate << " above tolerance " << opt.abs_tol
       << " (best value " << res.value << ")";
    throw NumericalError(os.str());
  }
  return res;
}

struct VolumeReport {
  double volume = 0.0;
  double bound = 0.0;  // pi r^2 * (sum of multiplicities)
  double slack = 0.0;  // volume - bound
  double quadrature_error_estimate = 0.0;
  int intersection = 0;

  bool inequality_holds() const { return slack >= -quadrature_error_estimate; }
};

/// Volume lower bound check for a union of curves in the tube.
inline VolumeReport prop23_check(const TubeSpec& tube, const std::vector<CurveSpec>& curves, QuadratureOptions opt = {}) {
  VolumeReport rep;
  const double disc = std::acos(-1.0) * tube.r() * tube.r();
  for (const auto& c : curves) {
    const int m = exceptional_intersection(tube, c);
    const auto area = curve_area_in_tube(tube, c, opt);
    rep.intersection += m;
    rep.volume += area.value;
    rep.quadrature_error_estimate += area.error_estimate;
  }
  rep.bound = disc * rep.intersection;
  rep.slack = rep.volume - rep.bound;
  return rep;
}

inline VolumeReport prop23_check(const TubeSpec& tube, const CurveSpec& curve, QuadratureOptions opt = {}) {
  return prop23_check(tube, std::vector<CurveSpec>{curve}, opt);
}

struct FedererReport {
  double area = 0.0;
  double bound = 0.0;  // mu * pi * r^2
  int multiplicity = 0;
  double quadrature_error_estimate = 0.0;

  bool inequality_holds() const { return area >= bound - quadrature_error_estimate; }
};

/// Area of a polynomial curve through the origin of C^N inside the
/// Euclidean ball of radius r, against mu * pi * r^2 where mu is the
/// vanishing order at t = 0.
inline FedererReport federer_check(const VectorPoly& curve, double r, double domain_radius, QuadratureOptions opt = {}) {
  if (curve.empty()) throw ValidationError("curve_shape", "no coefficients");
  const auto dim = curve.front().size();
  for (const auto& c : curve)
    if (c.size() != dim) throw ValidationError("curve_shape", "coefficient vectors differ in length");
  if (!(r > 0)) throw ValidationError("ball_radius", "r must be positive");
  if (curve.front().norm() > 1e-12 * std::max(1.0, poly::scale(curve)))
    throw ValidationError("curve_through_origin", "gamma(0) must be 0");
  const int mu = poly::vanishing_order(curve, 0.0);
  if (mu < 0) throw ValidationError("curve_nonconstant", "curve is identically zero");

  const double r2 = r * r;
  auto level = [&](cd t) {
    const Eigen::VectorXcd w = poly::eval(curve, t, dim);
    const Eigen::VectorXcd dw = poly::derivative(curve, t, dim);
    const cd h = w.dot(dw);  // sum conj(w_i) dw_i
    return LevelValue{w.squaredNorm() - r2, 2.0 * h.real(), -2.0 * h.imag()};
  };
  auto density = [&](cd t) { return poly::derivative(curve, t, dim).squaredNorm(); };
  const auto res = integrate_region(level, density, domain_radius, opt);
  if (!res.converged) {
    std::ostringstream os;
    os << "quadrature error estimate " << res.error_estimate << " above tolerance (best value " << res.value << ")";
    throw NumericalError(os.str());
  }
  FedererReport rep;
  rep.area = res.value;
  rep.multiplicity = mu;
  rep.bound = mu * std::acos(-1.0) * r2;
  rep.quadrature_error_estimate = res.error_estimate;
  return rep;
}

} // namespace abvar
