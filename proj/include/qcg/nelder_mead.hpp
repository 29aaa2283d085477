#pragma once

/// @file nelder_mead.hpp
/// @brief Budgeted Nelder-Mead simplex search on a box.
///
/// Coefficients are fixed: reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2. Points are clamped to [lower, upper] coordinate-wise before
/// evaluation. The only stopping rule is the evaluation budget; the best
/// point ever evaluated is returned.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace qcg {

struct NelderMeadOptions {
  std::size_t budget = 300;
  double lower = -1.0;
  double upper = 1.0;
  /// Per-coordinate offsets of the initial simplex vertices from the start point.
  std::vector<double> steps;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
};

template <typename F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const NelderMeadOptions& opt) {
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  const std::size_t dim = x0.size();
  NelderMeadResult best;
  auto clamp = [&](std::vector<double>& p) {
    for (double& v : p) v = std::clamp(v, opt.lower, opt.upper);
  };
  // Returns false once the budget is spent; value is only valid when true.
  auto eval = [&](std::vector<double>& p, double& value) {
    if (best.evaluations >= opt.budget) return false;
    clamp(p);
    value = f(static_cast<const std::vector<double>&>(p));
    if (best.evaluations == 0 || value < best.value) {
      best.value = value;
      best.x = p;
    }
    ++best.evaluations;
    return true;
  };

  std::vector<std::vector<double>> simplex{x0};
  std::vector<double> fx(1);
  if (!eval(simplex[0], fx[0])) return best;
  if (dim == 0) return best;

  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> v = simplex[0];
    const double step = i < opt.steps.size() ? opt.steps[i] : 0.1;
    v[i] += step;
    // Stepping outside the box would collapse the vertex onto the start point.
    if (v[i] > opt.upper || v[i] < opt.lower) v[i] = simplex[0][i] - step;
    double value;
    if (!eval(v, value)) return best;
    simplex.push_back(std::move(v));
    fx.push_back(value);
  }

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim);
  auto affine = [&](const std::vector<double>& from, const std::vector<double>& to, double t) {
    std::vector<double> p(dim);
    for (std::size_t i = 0; i < dim; ++i) p[i] = from[i] + t * (to[i] - from[i]);
    return p;
  };

  for (;;) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    const std::size_t lo = order.front();
    const std::size_t hi = order.back();
    const std::size_t second = order[dim - 1];

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= dim; ++k) {
      if (k == hi) continue;
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[k][i] / static_cast<double>(dim);
    }

    std::vector<double> xr = affine(centroid, simplex[hi], -kReflect);
    double fr;
    if (!eval(xr, fr)) return best;

    if (fr < fx[lo]) {
      std::vector<double> xe = affine(centroid, simplex[hi], -kExpand);
      double fe;
      if (!eval(xe, fe)) return best;
      if (fe < fr) {
        simplex[hi] = std::move(xe);
        fx[hi] = fe;
      } else {
        simplex[hi] = std::move(xr);
        fx[hi] = fr;
      }
      continue;
    }
    if (fr < fx[second]) {
      simplex[hi] = std::move(xr);
      fx[hi] = fr;
      continue;
    }

    const bool outside = fr < fx[hi];
    std::vector<double> xc = outside ? affine(centroid, xr, kContract) : affine(centroid, simplex[hi], kContract);
    double fc;
    if (!eval(xc, fc)) return best;
    if (fc < (outside ? fr : fx[hi])) {
      simplex[hi] = std::move(xc);
      fx[hi] = fc;
      continue;
    }

    for (std::size_t k = 0; k <= dim; ++k) {
      if (k == lo) continue;
      simplex[k] = affine(simplex[lo], simplex[k], kShrink);
      if (!eval(simplex[k], fx[k])) return best;
    }
  }
}

}  // namespace qcg
