#pragma once

#include <cstdint>

#include "abvar/lattice.hpp"
#include "abvar/torus.hpp"

namespace abvar {

/// Squared length of the shortest nonzero lattice vector in the polarization metric.
inline SvpResult<double> buser_sarnak(const PolarizedTorus& torus, std::size_t dim_cap = kDefaultSvpDimensionCap) {
  return shortest_vector(GramLattice<double>::from_eigen(torus.gram()), dim_cap);
}

/// Gram matrix of the projected lattice q_perp(Lambda) on the images of
/// the complement generators.
inline Eigen::MatrixXd projected_gram(const Subtorus& sub) {
  const auto& t = sub.parent();
  const auto& comp = sub.complement();
  const auto m = static_cast<Eigen::Index>(comp.rows());
  Eigen::MatrixXd w(m, static_cast<Eigen::Index>(comp.cols()));
  for (std::size_t c = 0; c < comp.cols(); ++c) {
    Eigen::VectorXd coords(m);
    for (Eigen::Index r = 0; r < m; ++r) coords(r) = comp(r, c).convert_to<double>();
    w.col(static_cast<Eigen::Index>(c)) = sub.proj_perp() * (t.real_basis() * coords);
  }
  Eigen::MatrixXd g = w.transpose() * t.real_metric() * w;
  return 0.5 * (g + g.transpose());
}

/// min over lambda in Lambda \ Lambda_S of |q_perp(lambda)|^2. The witness is
/// a preimage in lattice coordinates of the parent torus.
inline SvpResult<double> relative_buser_sarnak(const Subtorus& sub, std::size_t dim_cap = kDefaultSvpDimensionCap) {
  if (sub.k() >= sub.parent().dim()) throw ValidationError("proper_subtorus", "k must be < n");
  auto res = shortest_vector(GramLattice<double>::from_eigen(projected_gram(sub)), dim_cap);
  const auto& comp = sub.complement();
  IntVector lifted(comp.rows(), 0);
  for (std::size_t r = 0; r < comp.rows(); ++r)
    for (std::size_t c = 0; c < comp.cols(); ++c)
      lifted[r] += comp(r, c).convert_to<std::int64_t>() * res.witness[c];
  res.witness = std::move(lifted);
  return res;
}

/// |q_perp(lambda)|^2 for a parent lattice vector given in lattice coordinates.
inline double perp_length_sq(const Subtorus& sub, const IntVector& coords) {
  const auto& t = sub.parent();
  Eigen::VectorXd x(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) x(static_cast<Eigen::Index>(i)) = static_cast<double>(coords[i]);
  const Eigen::VectorXd p = sub.proj_perp() * (t.real_basis() * x);
  return p.dot(t.real_metric() * p);
}

} // namespace abvar
