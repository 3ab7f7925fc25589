#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace abvar {

/// Adaptive integration of a smooth density over {t : phi(t) < 0} inside
/// the square |Re t|, |Im t| <= half_width.
///
/// The level function supplies phi and its gradient. A cell whose centre
/// value keeps it clear of the boundary by twice the linearized reach is
/// either skipped or integrated with a tensor Gauss rule. Other cells are
/// integrated along Gauss lines in the direction where phi varies most, with
/// the boundary located on every line by safeguarded Newton iteration and
/// the outer rule split where the boundary leaves through a side edge. Each
/// leaf compares this rule on the cell against the sum over its four
/// children and reports |fine - coarse| as its error. Leaves are split in
/// order of decreasing error until the total drops below the tolerance.
struct QuadratureOptions {
  double abs_tol = 1e-7;
  int max_depth = 16;
  /// Depth of the initial uniform grid.
  int initial_depth = 5;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
  std::size_t leaf_cells = 0;
};

struct LevelValue {
  double phi;
  double dphi_dx;
  double dphi_dy;
};

namespace detail {

// Five-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                                   0.5384693101056831, 0.9061798459386640};
inline constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                     0.4786286704993665, 0.2369268850561891};

} // namespace detail

template <class Level, class Density>
class RegionIntegrator {
public:
  RegionIntegrator(Level level, Density density, QuadratureOptions opt)
      : level_(std::move(level)), density_(std::move(density)), opt_(opt) {}

  QuadratureResult integrate(double half_width) {
    leaves_.clear();
    const int cells = 1 << opt_.initial_depth;
    const double h = half_width / cells;
    for (int i = 0; i < cells; ++i)
      for (int j = 0; j < cells; ++j) {
        const double cx = -half_width + (2 * j + 1) * h;
        const double cy = -half_width + (2 * i + 1) * h;
        push(make_leaf(cx, cy, h, rule(cx, cy, h), opt_.initial_depth));
      }
    double total_err = 0.0;
    for (const auto& l : leaves_) total_err += l.err;
    while (total_err > opt_.abs_tol && !leaves_.empty() && leaves_.front().depth + 1 < opt_.max_depth) {
      std::pop_heap(leaves_.begin(), leaves_.end(), by_error);
      const Leaf worst = leaves_.back();
      leaves_.pop_back();
      total_err -= worst.err;
      const double hh = 0.5 * worst.h;
      for (std::size_t i = 0; i < 4; ++i) {
        const Leaf kid = make_leaf(worst.kx[i], worst.ky[i], hh, worst.kv[i], worst.depth + 1);
        total_err += kid.err;
        push(kid);
      }
    }
    // Leaves are summed in a canonical order so the result does not depend
    // on the heap layout.
    std::sort(leaves_.begin(), leaves_.end(), [](const Leaf& a, const Leaf& b) {
      return a.cy != b.cy ? a.cy < b.cy : a.cx < b.cx;
    });
    QuadratureResult res;
    for (const auto& l : leaves_) {
      res.value += l.value;
      res.error_estimate += l.err;
    }
    res.leaf_cells = leaves_.size();
    res.converged = res.error_estimate <= opt_.abs_tol;
    return res;
  }

private:
  struct Leaf {
    double cx, cy, h;
    int depth;
    double value, err;
    std::array<double, 4> kx, ky, kv;
  };

  static bool by_error(const Leaf& a, const Leaf& b) { return a.err < b.err; }

  void push(Leaf l) {
    leaves_.push_back(std::move(l));
    std::push_heap(leaves_.begin(), leaves_.end(), by_error);
  }

  Leaf make_leaf(double cx, double cy, double h, double coarse, int depth) {
    Leaf l{cx, cy, h, depth, 0.0, 0.0, {}, {}, {}};
    const double hh = 0.5 * h;
    l.kx = {cx - hh, cx + hh, cx - hh, cx + hh};
    l.ky = {cy - hh, cy - hh, cy + hh, cy + hh};
    double fine = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      l.kv[i] = rule(l.kx[i], l.ky[i], hh);
      fine += l.kv[i];
    }
    l.err = std::abs(fine - coarse);
    l.value = fine;
    return l;
  }

  double rule(double cx, double cy, double h) {
    const LevelValue lv = level_(std::complex<double>(cx, cy));
    const double reach = std::sqrt(2.0) * h * std::hypot(lv.dphi_dx, lv.dphi_dy);
    if (lv.phi >= 2.0 * reach) return 0.0;
    if (lv.phi <= -2.0 * reach) return full_cell(cx, cy, h);
    // The boundary may cross the cell. Integrate along lines parallel to the
    // direction in which the level function changes most, locating the
    // boundary on every line. The outer integrand has kinks where the
    // boundary passes through the two cell edges parallel to the outer
    // variable, so the outer interval is split there.
    const bool along_y = std::abs(lv.dphi_dy) >= std::abs(lv.dphi_dx);
    const double u0 = along_y ? cx : cy;
    const double v0 = along_y ? cy : cx;
    auto at = [along_y](double u, double v) {
      return along_y ? std::complex<double>(u, v) : std::complex<double>(v, u);
    };
    std::vector<double> breaks{u0 - h, u0 + h};
    for (double v : {v0 - h, v0 + h}) {
      const auto pa = at(u0 - h, v), pb = at(u0 + h, v);
      const double fa = level_(pa).phi, fb = level_(pb).phi;
      if ((fa < 0.0) != (fb < 0.0)) breaks.push_back(u0 - h + 2.0 * h * crossing(pa, pb, fa, fb));
    }
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
      const double mid = 0.5 * (breaks[k] + breaks[k + 1]);
      const double half = 0.5 * (breaks[k + 1] - breaks[k]);
      if (half <= 0.0) continue;
      double piece = 0.0;
      for (std::size_t i = 0; i < detail::kGaussNodes.size(); ++i)
        piece += detail::kGaussWeights[i] * line_integral(at(mid + half * detail::kGaussNodes[i], v0 - h),
                                                          at(mid + half * detail::kGaussNodes[i], v0 + h));
      total += half * piece;
    }
    return total;
  }

  // Parameter s in [0, 1] where phi changes sign on the segment from a to b,
  // by safeguarded Newton iteration on the directional derivative.
  double crossing(std::complex<double> a, std::complex<double> b, double fa, double fb) {
    const std::complex<double> d = b - a;
    double left = 0.0, right = 1.0;
    const bool neg_left = fa < 0.0;
    double s = fa / (fa - fb);
    for (int it = 0; it < 100; ++it) {
      if (!(s > left && s < right)) s = 0.5 * (left + right);
      const LevelValue f = level_(a + s * d);
      if ((f.phi < 0.0) == neg_left) left = s;
      else right = s;
      const double slope = f.dphi_dx * d.real() + f.dphi_dy * d.imag();
      const double next = slope != 0.0 ? s - f.phi / slope : 0.5 * (left + right);
      const bool done = std::abs(next - s) <= 1e-15 || right - left <= 1e-15;
      s = next;
      if (done) break;
    }
    return std::clamp(s, 0.0, 1.0);
  }

  // Integral of the density over the part of the segment from a to b where
  // phi < 0, assuming the boundary crosses the segment at most once.
  double line_integral(std::complex<double> a, std::complex<double> b) {
    const double fa = level_(a).phi, fb = level_(b).phi;
    const bool in_a = fa < 0.0, in_b = fb < 0.0;
    if (!in_a && !in_b) return 0.0;
    double s0 = 0.0, s1 = 1.0;
    if (in_a != in_b) (in_a ? s1 : s0) = crossing(a, b, fa, fb);
    const std::complex<double> d = b - a;
    const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
    double sum = 0.0;
    for (std::size_t j = 0; j < detail::kGaussNodes.size(); ++j)
      sum += detail::kGaussWeights[j] * density_(a + (mid + half * detail::kGaussNodes[j]) * d);
    return half * std::abs(d) * sum;
  }

  double full_cell(double cx, double cy, double h) {
    double sum = 0.0;
    for (std::size_t i = 0; i < detail::kGaussNodes.size(); ++i)
      for (std::size_t j = 0; j < detail::kGaussNodes.size(); ++j)
        sum += detail::kGaussWeights[i] * detail::kGaussWeights[j] *
               density_(std::complex<double>(cx + h * detail::kGaussNodes[j], cy + h * detail::kGaussNodes[i]));
    return h * h * sum;
  }

  Level level_;
  Density density_;
  QuadratureOptions opt_;
  std::vector<Leaf> leaves_;
};

template <class Level, class Density>
QuadratureResult integrate_region(Level level, Density density, double half_width, QuadratureOptions opt = {}) {
  RegionIntegrator<Level, Density> integ(std::move(level), std::move(density), opt);
  return integ.integrate(half_width);
}

} // namespace abvar
