#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "singlab/common.hpp"
#include "singlab/domain.hpp"

namespace singlab {

struct BoundaryAtom {
  Vec2 point;
  double mass = 0;
};

/// Finite positive measure on the boundary: atoms plus a piecewise-smooth
/// density with respect to arc length, given as a callable evaluated at
/// boundary points.
struct BoundaryMeasure {
  std::vector<BoundaryAtom> atoms;
  std::function<double(Vec2)> density;  ///< may be empty
  int quad_nodes = 2048;                ///< resolution used for density integrals

  static BoundaryMeasure zero() { return {}; }

  static BoundaryMeasure atom(Vec2 at, double mass) {
    if (!(mass > 0)) fail("BadMeasure", "atom mass must be positive");
    BoundaryMeasure m;
    m.atoms.push_back({at, mass});
    return m;
  }

  static BoundaryMeasure with_density(std::function<double(Vec2)> f) {
    BoundaryMeasure m;
    m.density = std::move(f);
    return m;
  }

  bool has_density() const { return static_cast<bool>(density); }

  double total_mass(const Domain& dom) const {
    double s = 0;
    for (const auto& a : atoms) s += a.mass;
    if (has_density()) {
      auto q = level_surface(dom, 0.0, quad_nodes);
      for (std::size_t k = 0; k < q.nodes.size(); ++k) {
        double d = density(q.nodes[k]);
        if (d < -1e-12) fail("BadMeasure", "density must be nonnegative");
        s += q.weights[k] * d;
      }
    }
    return s;
  }

  BoundaryMeasure scaled(double c) const {
    if (!(c >= 0)) fail("BadMeasure", "scale must be nonnegative");
    BoundaryMeasure m = *this;
    for (auto& a : m.atoms) a.mass *= c;
    if (has_density()) {
      auto f = density;
      m.density = [f, c](Vec2 x) { return c * f(x); };
    }
    return m;
  }
};

struct InteriorAtom {
  Vec2 point;
  double mass = 0;
};

/// Finite positive measure in the interior: atoms (compactly inside) plus an
/// optional density callable.
struct InteriorMeasure {
  std::vector<InteriorAtom> atoms;
  std::function<double(Vec2)> density;

  static InteriorMeasure zero() { return {}; }

  static InteriorMeasure atom(Vec2 at, double mass) {
    if (!(mass > 0)) fail("BadMeasure", "atom mass must be positive");
    InteriorMeasure m;
    m.atoms.push_back({at, mass});
    return m;
  }

  bool has_density() const { return static_cast<bool>(density); }
};

}  // namespace singlab
