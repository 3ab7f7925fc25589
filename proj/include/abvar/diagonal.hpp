#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "abvar/invariants.hpp"

namespace abvar {

/// (A x A, p1*L (x) p2*L) together with its diagonal subtorus.
///
/// The product uses interleaved coordinates (z_1, w_1, ..., z_n, w_n) so
/// that its type d_1, d_1, d_2, d_2, ... stays a divisibility chain.
struct ProductTorus {
  PolarizedTorus base;
  PolarizedTorus product;
  Subtorus diagonal;

  /// Index in the product lattice basis of base generator `i` in factor `f` (0 or 1).
  static std::size_t embed_index(std::size_t n, std::size_t i, std::size_t f) {
    return i < n ? 2 * i + f : 2 * n + 2 * (i - n) + f;
  }

  IntVector embed(const IntVector& lam1, const IntVector& lam2) const {
    const std::size_t n = base.dim();
    IntVector out(4 * n, 0);
    for (std::size_t i = 0; i < 2 * n; ++i) {
      out[embed_index(n, i, 0)] = lam1[i];
      out[embed_index(n, i, 1)] = lam2[i];
    }
    return out;
  }
};

inline ProductTorus product_with_diagonal(const PolarizedTorus& torus) {
  const std::size_t n = torus.dim();
  const auto nn = static_cast<Eigen::Index>(n);
  TorusInput in;
  for (auto d : torus.type()) {
    in.type.push_back(d);
    in.type.push_back(d);
  }
  in.tau = Eigen::MatrixXcd::Zero(2 * nn, 2 * nn);
  for (Eigen::Index i = 0; i < nn; ++i)
    for (Eigen::Index j = 0; j < nn; ++j)
      for (Eigen::Index f = 0; f < 2; ++f) in.tau(2 * i + f, 2 * j + f) = torus.tau()(i, j);
  PolarizedTorus prod = make_torus(in);

  IntMatrix diag(4 * n, 2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    diag(ProductTorus::embed_index(n, i, 0), i) = 1;
    diag(ProductTorus::embed_index(n, i, 1), i) = 1;
  }
  Subtorus d = make_subtorus(prod, diag);
  return {torus, std::move(prod), std::move(d)};
}

/// |q_perp(lam1, lam2)|^2 through the generic projection, cross-checked
/// against |lam1 - lam2|^2 / 2 and the closed form ((l1-l2)/2, (l2-l1)/2).
inline double projection_length_sq(const ProductTorus& prod, const IntVector& lam1, const IntVector& lam2) {
  const auto& base = prod.base;
  const IntVector coords = prod.embed(lam1, lam2);
  const double generic = perp_length_sq(prod.diagonal, coords);

  IntVector diff(lam1.size());
  for (std::size_t i = 0; i < lam1.size(); ++i) diff[i] = lam1[i] - lam2[i];
  Eigen::VectorXd dx(static_cast<Eigen::Index>(diff.size()));
  for (std::size_t i = 0; i < diff.size(); ++i) dx(static_cast<Eigen::Index>(i)) = static_cast<double>(diff[i]);
  const double halved = 0.5 * dx.dot(base.gram() * dx);

  // Closed form of the projection, evaluated in the product metric.
  const Eigen::VectorXcd delta = base.point(dx);
  const auto n = static_cast<Eigen::Index>(base.dim());
  Eigen::VectorXcd closed(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    closed(2 * i) = 0.5 * delta(i);
    closed(2 * i + 1) = -0.5 * delta(i);
  }
  const double closed_sq = prod.product.norm_sq(closed);

  const double scale = std::max({std::abs(halved), std::abs(generic), 1e-300});
  if (std::abs(generic - halved) > 1e-12 * scale + 1e-14 || std::abs(closed_sq - halved) > 1e-12 * scale + 1e-14)
    throw NumericalError("diagonal projection disagrees with |l1-l2|^2/2");
  return generic;
}

struct Lemma31Check {
  double lhs = 0.0;  // relative invariant of the diagonal
  double rhs = 0.0;  // half the invariant of the base
  double rel_err = 0.0;
  IntVector lhs_witness;
};

/// Compares the relative invariant of the diagonal with half the base invariant.
inline Lemma31Check lemma31_check(const PolarizedTorus& torus) {
  const auto prod = product_with_diagonal(torus);
  const auto rel = relative_buser_sarnak(prod.diagonal);
  const auto abs_ = buser_sarnak(torus);
  Lemma31Check out;
  out.lhs = rel.length_sq;
  out.rhs = abs_.length_sq / 2.0;
  out.rel_err = std::abs(out.lhs - out.rhs) / out.rhs;
  out.lhs_witness = rel.witness;
  return out;
}

} // namespace abvar
