#include <gtest/gtest.h>

#include <cmath>

#include "abvar/tube.hpp"
#include "test_support.hpp"

namespace abvar {
namespace {

using testing::kPi;

Eigen::VectorXcd vec1(cd v) {
  Eigen::VectorXcd x(1);
  x(0) = v;
  return x;
}

// Product of two square elliptic curves with S the first factor.
Subtorus square_product_axis() {
  Eigen::MatrixXcd tau = Eigen::MatrixXcd::Zero(2, 2);
  tau(0, 0) = tau(1, 1) = cd(0, 1);
  const auto t = make_torus({{1, 1}, tau});
  IntMatrix s(4, 2);
  s(0, 0) = 1;
  s(2, 1) = 1;
  return make_subtorus(t, s);
}

// A line in F-perp direction through the point c of S.
CurveSpec orthogonal_line(cd c, double domain = 0.5) {
  CurveSpec curve;
  curve.f = {vec1(c)};
  curve.p = {vec1(0.0), vec1(1.0)};
  curve.domain_radius = domain;
  curve.mults = {{0.0, 1}};
  return curve;
}

CurveSpec tilted_line(cd slope, double domain = 0.5) {
  CurveSpec curve;
  curve.f = {vec1(0.0), vec1(slope)};
  curve.p = {vec1(0.0), vec1(1.0)};
  curve.domain_radius = domain;
  curve.mults = {{0.0, 1}};
  return curve;
}

// t -> (a t, t^2): tangent to S at the origin with contact order two.
CurveSpec tangent_parabola(cd a, double domain = 0.7) {
  CurveSpec curve;
  curve.f = {vec1(0.0), vec1(a)};
  curve.p = {vec1(0.0), vec1(0.0), vec1(1.0)};
  curve.domain_radius = domain;
  curve.mults = {{0.0, 2}};
  return curve;
}

TEST(Tube, RelativeInvariantOfAxisAndRadiusCap) {
  const auto sub = square_product_axis();
  const auto tube = make_tube(sub, 0.4);
  EXPECT_NEAR(tube.relative_invariant(), 1.0, 1e-12);
  EXPECT_NEAR(tube.max_radius(), 0.5, 1e-12);
  EXPECT_NO_THROW(make_tube(sub, 0.5));
  try {
    make_tube(sub, 0.51);
    FAIL() << "radius above the cap accepted";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.invariant(), "tube_radius");
  }
  EXPECT_THROW(make_tube(sub, 0.0), ValidationError);
  EXPECT_THROW(make_tube(sub, -0.1), ValidationError);
}

TEST(Tube, OrthogonalLineAttainsTheDiscArea) {
  const auto tube = make_tube(square_product_axis(), 0.4);
  const auto rep = prop23_check(tube, orthogonal_line(0.1));
  EXPECT_EQ(rep.intersection, 1);
  EXPECT_NEAR(rep.volume, kPi * 0.16, 1e-6);
  EXPECT_NEAR(rep.bound, kPi * 0.16, 1e-15);
  EXPECT_TRUE(rep.inequality_holds());
  EXPECT_LE(rep.quadrature_error_estimate, 1e-7);
}

TEST(Tube, TiltedLineArea) {
  const auto tube = make_tube(square_product_axis(), 0.4);
  const auto rep = prop23_check(tube, tilted_line(1.0));
  EXPECT_NEAR(rep.volume, 2.0 * kPi * 0.16, 1e-5);
  EXPECT_GT(rep.slack, 0.0);
  EXPECT_TRUE(rep.inequality_holds());
}

TEST(Tube, TangentCurveCountsContactOrder) {
  const auto tube = make_tube(square_product_axis(), 0.4);
  const cd a = 0.5;
  const auto rep = prop23_check(tube, tangent_parabola(a));
  EXPECT_EQ(rep.intersection, 2);
  // |t|^2 < r on the region, density |a|^2 + 4|t|^2.
  const double exact = kPi * std::norm(a) * 0.4 + 2.0 * kPi * 0.16;
  EXPECT_NEAR(rep.volume, exact, 1e-6);
  EXPECT_GE(rep.volume, 2.0 * kPi * 0.16 - 1e-5);
  EXPECT_TRUE(rep.inequality_holds());
}

TEST(Tube, UnionOfLinesAddsUp) {
  const auto tube = make_tube(square_product_axis(), 0.3);
  const std::vector<CurveSpec> lines{orthogonal_line(0.0), orthogonal_line(cd(0.2, 0.1)), tilted_line(cd(0, 0.5))};
  const auto rep = prop23_check(tube, lines);
  EXPECT_EQ(rep.intersection, 3);
  EXPECT_NEAR(rep.bound, 3.0 * kPi * 0.09, 1e-14);
  EXPECT_NEAR(rep.volume, kPi * 0.09 * (1.0 + 1.0 + 1.25), 1e-5);
  EXPECT_TRUE(rep.inequality_holds());
}

TEST(Tube, SlackGrowsWithRadius) {
  const auto sub = square_product_axis();
  double previous = -1.0;
  for (double r : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const auto rep = prop23_check(make_tube(sub, r), tilted_line(0.7));
    EXPECT_TRUE(rep.inequality_holds()) << "r = " << r;
    EXPECT_GT(rep.slack, previous) << "r = " << r;
    EXPECT_NEAR(rep.slack, 0.49 * kPi * r * r, 1e-5);
    previous = rep.slack;
  }
}

TEST(Tube, CurveMissingSubtorus) {
  const auto tube = make_tube(square_product_axis(), 0.4);
  CurveSpec curve;
  curve.f = {vec1(0.0), vec1(1.0)};
  curve.p = {vec1(1.0)};
  curve.domain_radius = 0.5;
  const auto rep = prop23_check(tube, curve);
  EXPECT_EQ(rep.intersection, 0);
  EXPECT_NEAR(rep.volume, 0.0, 1e-12);
  EXPECT_TRUE(rep.inequality_holds());
}

TEST(Tube, MultiplicityDeclarationsAreChecked) {
  const auto tube = make_tube(square_product_axis(), 0.4);
  auto expect_invariant = [&](const CurveSpec& c, const std::string& name) {
    try {
      exceptional_intersection(tube, c);
      FAIL() << "expected " << name;
    } catch (const ValidationError& e) {
      EXPECT_EQ(e.invariant(), name);
    }
  };

  auto wrong_order = tangent_parabola(0.5);
  wrong_order.mults = {{0.0, 1}};
  expect_invariant(wrong_order, "curve_multiplicity");

  auto undeclared = orthogonal_line(0.0);
  undeclared.mults.clear();
  expect_invariant(undeclared, "curve_multiplicity");

  auto off_subtorus = orthogonal_line(0.0);
  off_subtorus.mults = {{cd(0.3, 0.0), 1}, {0.0, 1}};
  expect_invariant(off_subtorus, "curve_multiplicity");

  auto singular = tangent_parabola(0.0);
  singular.f = {vec1(0.0)};
  expect_invariant(singular, "curve_singular_at_S");

  CurveSpec inside_s;
  inside_s.f = {vec1(0.0), vec1(1.0)};
  inside_s.p = {vec1(0.0)};
  expect_invariant(inside_s, "curve_not_in_S");

  CurveSpec constant;
  constant.f = {vec1(0.2)};
  constant.p = {vec1(1.0)};
  expect_invariant(constant, "curve_nonconstant");

  CurveSpec bad_shape = orthogonal_line(0.0);
  bad_shape.p = {Eigen::VectorXcd::Zero(2), Eigen::VectorXcd::Ones(2)};
  expect_invariant(bad_shape, "curve_shape");
}

TEST(Tube, AreaIsIntrinsicOnSkewFactors) {
  // The curve is written in H-orthonormal frames, so the area of an
  // orthogonal line is the disc area whatever the period matrix.
  Eigen::MatrixXcd tau = Eigen::MatrixXcd::Zero(2, 2);
  tau(0, 0) = cd(0.3, 1.4);
  tau(1, 1) = cd(-0.2, 0.7);
  const auto t = make_torus({{1, 2}, tau});
  IntMatrix s(4, 2);
  s(0, 0) = 1;
  s(2, 1) = 1;
  const auto sub = make_subtorus(t, s);
  const double r = 0.8 * make_tube(sub, 1e-3).max_radius();
  const auto tube = make_tube(sub, r);
  const double domain = 1.2 * r;
  const auto ortho = prop23_check(tube, orthogonal_line(0.0, domain));
  EXPECT_NEAR(ortho.volume, kPi * r * r, 1e-6);
  const auto tilted = prop23_check(tube, tilted_line(cd(0.3, -0.4), domain));
  EXPECT_NEAR(tilted.volume, 1.25 * kPi * r * r, 1e-5);
}

TEST(Tube, QuadratureReportsNonConvergence) {
  const auto tube = make_tube(square_product_axis(), 0.4);
  QuadratureOptions opt;
  // A zero tolerance can only be met by an exactly vanishing estimate.
  opt.abs_tol = 0.0;
  opt.max_depth = 7;
  EXPECT_THROW(curve_area_in_tube(tube, tangent_parabola(0.5), opt), NumericalError);
}

TEST(Federer, LineThroughOrigin) {
  const VectorPoly line{Eigen::VectorXcd::Zero(2), Eigen::Vector2cd(cd(0.6, 0), cd(0, 0.8))};
  const auto rep = federer_check(line, 0.7, 1.0);
  EXPECT_EQ(rep.multiplicity, 1);
  EXPECT_NEAR(rep.area, kPi * 0.49, 1e-6);
  EXPECT_TRUE(rep.inequality_holds());
}

TEST(Federer, Parabola) {
  const VectorPoly curve{Eigen::Vector2cd::Zero(), Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1)};
  const auto rep = federer_check(curve, 1.0, 1.0);
  const double rho2 = (std::sqrt(5.0) - 1.0) / 2.0;
  EXPECT_EQ(rep.multiplicity, 1);
  EXPECT_NEAR(rep.area, kPi * (rho2 + 2.0 * rho2 * rho2), 1e-6);
  EXPECT_TRUE(rep.inequality_holds());
}

TEST(Federer, Cusp) {
  const VectorPoly curve{Eigen::Vector2cd::Zero(), Eigen::Vector2cd::Zero(), Eigen::Vector2cd(1, 0),
                         Eigen::Vector2cd(0, 1)};
  const auto rep = federer_check(curve, 1.0, 1.0);
  // s = |t|^2 at the boundary solves s^2 + s^3 = 1.
  double s = 0.75;
  for (int i = 0; i < 50; ++i) s -= (s * s + s * s * s - 1.0) / (2.0 * s + 3.0 * s * s);
  EXPECT_EQ(rep.multiplicity, 2);
  EXPECT_NEAR(rep.bound, 2.0 * kPi, 1e-14);
  EXPECT_NEAR(rep.area, 2.0 * kPi * s * s + 3.0 * kPi * s * s * s, 1e-6);
  EXPECT_TRUE(rep.inequality_holds());
}

TEST(Federer, RejectsCurvesMissingOrigin) {
  const VectorPoly curve{Eigen::Vector2cd(0.1, 0), Eigen::Vector2cd(1, 0)};
  EXPECT_THROW(federer_check(curve, 1.0, 1.0), ValidationError);
  const VectorPoly zero{Eigen::Vector2cd::Zero(), Eigen::Vector2cd::Zero()};
  EXPECT_THROW(federer_check(zero, 1.0, 1.0), ValidationError);
  EXPECT_THROW(federer_check({Eigen::Vector2cd::Zero(), Eigen::Vector2cd(1, 0)}, 0.0, 1.0), ValidationError);
}

TEST(Quadrature, DiscMomentsMatchClosedForms) {
  // Area of the unit disc and its second moment.
  auto level = [](cd t) { return LevelValue{std::norm(t) - 1.0, 2.0 * t.real(), 2.0 * t.imag()}; };
  const auto area = integrate_region(level, [](cd) { return 1.0; }, 1.2);
  EXPECT_TRUE(area.converged);
  EXPECT_NEAR(area.value, kPi, 1e-7);
  const auto moment = integrate_region(level, [](cd t) { return std::norm(t); }, 1.2);
  EXPECT_NEAR(moment.value, kPi / 2.0, 1e-7);
}

TEST(Quadrature, SingularDensityDoesNotConvergeAtShallowDepth) {
  auto level = [](cd t) { return LevelValue{std::norm(t) - 1.0, 2.0 * t.real(), 2.0 * t.imag()}; };
  QuadratureOptions opt;
  opt.abs_tol = 1e-10;
  opt.max_depth = 8;
  const auto res = integrate_region(level, [](cd t) { return 1.0 / std::sqrt(std::abs(t)); }, 1.2, opt);
  EXPECT_FALSE(res.converged);
  EXPECT_GT(res.error_estimate, opt.abs_tol);
  // Integral of |t|^(-1/2) over the unit disc is 4 pi / 3.
  EXPECT_NEAR(res.value, 4.0 * kPi / 3.0, 1e-2);
}

TEST(Quadrature, DeterministicAcrossRuns) {
  auto level = [](cd t) { return LevelValue{std::norm(t) - 0.5, 2.0 * t.real(), 2.0 * t.imag()}; };
  auto density = [](cd t) { return 1.0 + std::exp(t.real()); };
  const auto a = integrate_region(level, density, 1.0);
  const auto b = integrate_region(level, density, 1.0);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.leaf_cells, b.leaf_cells);
}

} // namespace
} // namespace abvar
