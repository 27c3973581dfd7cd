#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "singlab/common.hpp"
#include "singlab/domain.hpp"
#include "singlab/grid.hpp"

namespace singlab {

enum class MarcinkiewiczWeight { One, Distance, DistancePower };

namespace detail {

inline double weight_value(const Domain& dom, Vec2 x, MarcinkiewiczWeight w, double alpha) {
  switch (w) {
    case MarcinkiewiczWeight::One:
      return 1.0;
    case MarcinkiewiczWeight::Distance:
      return boundary_distance(dom, x);
    case MarcinkiewiczWeight::DistancePower:
      return std::pow(boundary_distance(dom, x), alpha);
  }
  return 1.0;
}

}  // namespace detail

/// Weak-L^p quasi-norm estimator: the smallest C with
///   int_E |f| h dx <= C |E|_h^{1 - 1/p}
/// over the sweep of super-level sets E = {|f| > lambda}. Super-level sets
/// attain the supremum for the monotone-rearranged fields this artifact
/// produces; any slack against general Borel E is a fixed equivalence factor.
inline double marcinkiewicz_norm(const GridField& f, double p,
                                 MarcinkiewiczWeight w = MarcinkiewiczWeight::One,
                                 double alpha = 1.0) {
  if (!(p > 1)) fail("QOutOfRange", "need p > 1");
  struct Cell {
    double absf, h, area;
  };
  std::vector<Cell> cells;
  cells.reserve(std::size_t(f.n_r()) * f.n_theta());
  const Domain& dom = f.domain();
  for (int i = 0; i < f.n_r(); ++i)
    for (int j = 0; j < f.n_theta(); ++j) {
      double hv = detail::weight_value(dom, f.point(i, j), w, alpha);
      cells.push_back({std::abs(f.at(i, j)), hv, f.cell_area(i, j)});
    }
  if (f.has_center())
    cells.push_back({std::abs(f.center()), detail::weight_value(dom, {0, 0}, w, alpha),
                     f.center_cell_area()});
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.absf > b.absf; });
  double best = 0, mass = 0, meas = 0;
  for (const auto& c : cells) {
    mass += c.absf * c.h * c.area;
    meas += c.h * c.area;
    if (meas <= 0) continue;
    double ratio = mass / std::pow(meas, 1.0 - 1.0 / p);
    best = std::max(best, ratio);
  }
  return best;
}

/// Checks the distribution-function inequality |{|f| >= lambda}|_h <=
/// lambda^-p ||f||^p with the norm from the estimator above.
inline bool weak_tail_check(const GridField& f, double lambda, double p,
                            MarcinkiewiczWeight w = MarcinkiewiczWeight::One,
                            double alpha = 1.0) {
  if (!(lambda > 0)) fail("QOutOfRange", "need lambda > 0");
  double norm = marcinkiewicz_norm(f, p, w, alpha);
  const Domain& dom = f.domain();
  double meas = 0;
  for (int i = 0; i < f.n_r(); ++i)
    for (int j = 0; j < f.n_theta(); ++j) {
      if (std::abs(f.at(i, j)) >= lambda)
        meas += detail::weight_value(dom, f.point(i, j), w, alpha) * f.cell_area(i, j);
    }
  if (f.has_center() && std::abs(f.center()) >= lambda)
    meas += detail::weight_value(dom, {0, 0}, w, alpha) * f.center_cell_area();
  return meas <= std::pow(lambda, -p) * std::pow(norm, p) * (1 + 1e-12) + 1e-300;
}

}  // namespace singlab
