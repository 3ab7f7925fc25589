#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "abvar/torus.hpp"

namespace abvar::testing {

inline const double kPi = std::acos(-1.0);
inline const cd kHex = std::polar(1.0, kPi / 3.0);

inline TorusInput torus_input(std::vector<std::int64_t> type, Eigen::MatrixXcd tau) {
  return TorusInput{std::move(type), std::move(tau)};
}

inline PolarizedTorus square_torus(std::int64_t d = 1) {
  return make_torus(torus_input({d}, Eigen::MatrixXcd::Constant(1, 1, cd(0, 1))));
}

inline PolarizedTorus hex_torus(std::int64_t d = 1) {
  return make_torus(torus_input({d}, Eigen::MatrixXcd::Constant(1, 1, static_cast<double>(d) * kHex)));
}

/// Random point of the Siegel upper half space: X symmetric in [-1/2,1/2],
/// Y = M M^T + c I.
inline Eigen::MatrixXcd random_siegel(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd x(nn, nn), m(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) x(i, j) = x(j, i) = u(rng);
  for (Eigen::Index i = 0; i < nn; ++i)
    for (Eigen::Index j = 0; j < nn; ++j) m(i, j) = u(rng);
  Eigen::MatrixXd y = m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(nn, nn);
  Eigen::MatrixXcd tau(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i)
    for (Eigen::Index j = 0; j < nn; ++j) tau(i, j) = cd(x(i, j), y(i, j));
  return tau;
}

/// Random divisibility chain with small entries.
inline std::vector<std::int64_t> random_type(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> step(1, 3);
  std::vector<std::int64_t> d{1};
  std::uniform_int_distribution<int> first(1, 2);
  d[0] = first(rng);
  while (d.size() < n) d.push_back(d.back() * step(rng));
  return d;
}

} // namespace abvar::testing
