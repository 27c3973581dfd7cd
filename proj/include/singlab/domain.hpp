#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "singlab/common.hpp"

namespace singlab {

enum class DomainKind { Ball, HalfDisk };

/// Canonical geometry: the ball B_R, or the half disk B_R intersected with
/// the upper half plane. The singular anchor is the boundary point all graded
/// grids and singularity probes are organized around: (0,-R) for the ball,
/// the corner origin for the half disk.
struct Domain {
  DomainKind kind = DomainKind::Ball;
  int N = 2;
  double R = 1.0;

  static Domain ball(int n, double radius) {
    check(n, radius);
    return {DomainKind::Ball, n, radius};
  }
  static Domain half_disk(int n, double radius) {
    check(n, radius);
    return {DomainKind::HalfDisk, n, radius};
  }

  /// Reach of the flow coordinates (delta*).
  double flow_reach() const { return kind == DomainKind::Ball ? R : R / 2; }

  Vec2 anchor() const {
    return kind == DomainKind::Ball ? Vec2{0.0, -R} : Vec2{0.0, 0.0};
  }

  /// Anchor angle in the polar chart about the chart center (the ball center,
  /// or the half-disk corner). Only meaningful for the ball, where the anchor
  /// sits on the outer circle.
  double anchor_angle() const { return -pi / 2; }

 private:
  static void check(int n, double radius) {
    if (n != 2 && n != 3) fail("UnsupportedDimension", "N must be 2 or 3");
    if (!(radius > 0)) fail("BadRadius", "R must be positive");
  }
};

namespace detail {
inline bool inside_closure(const Domain& dom, Vec2 x, double slack = 1e-12) {
  double r = x.norm();
  if (r > dom.R * (1 + slack)) return false;
  if (dom.kind == DomainKind::HalfDisk && x.y < -dom.R * slack) return false;
  return true;
}
}  // namespace detail

/// Exact Euclidean distance to the boundary.
inline double boundary_distance(const Domain& dom, Vec2 x) {
  if (dom.N != 2) fail("UnsupportedDimension", "Vec2 overload needs N=2");
  if (!detail::inside_closure(dom, x)) fail("PointOutsideDomain", "x outside closure(Omega)");
  double to_arc = dom.R - x.norm();
  if (dom.kind == DomainKind::Ball) return std::max(0.0, to_arc);
  return std::max(0.0, std::min(x.y, to_arc));
}

inline double boundary_distance(const Domain& dom, Vec3 x) {
  if (dom.N != 3) fail("UnsupportedDimension", "Vec3 overload needs N=3");
  double r = x.norm();
  if (r > dom.R * (1 + 1e-12)) fail("PointOutsideDomain", "x outside closure(Omega)");
  double to_sphere = dom.R - r;
  if (dom.kind == DomainKind::Ball) return std::max(0.0, to_sphere);
  if (x.z < -dom.R * 1e-12) fail("PointOutsideDomain", "x outside closure(Omega)");
  return std::max(0.0, std::min(x.z, to_sphere));
}

struct FlowCoordinates {
  double delta = 0;  ///< boundary distance
  Vec2 sigma;        ///< nearest boundary point
};

/// The flow chart x = sigma - delta n_sigma, defined for 0 < d(x) < delta*.
inline FlowCoordinates flow_coordinates(const Domain& dom, Vec2 x) {
  double d = boundary_distance(dom, x);
  if (!(d > 0) || d >= dom.flow_reach())
    fail("OutsideFlowRegion", "flow coordinates need 0 < d(x) < delta*");
  if (dom.kind == DomainKind::Ball) {
    double r = x.norm();
    return {d, x * (dom.R / r)};
  }
  double to_flat = x.y;
  double to_arc = dom.R - x.norm();
  if (std::abs(to_flat - to_arc) < 1e-13 * dom.R)
    fail("OutsideFlowRegion", "x on the corner ridge: projection not unique");
  if (to_flat < to_arc) return {d, Vec2{x.x, 0.0}};
  return {d, x * (dom.R / x.norm())};
}

/// Outward unit normal at a boundary point.
inline Vec2 outward_normal(const Domain& dom, Vec2 sigma) {
  if (dom.kind == DomainKind::Ball) return sigma * (1.0 / sigma.norm());
  if (std::abs(sigma.y) < 1e-12 * dom.R) return Vec2{0.0, -1.0};
  return sigma * (1.0 / sigma.norm());
}

/// Reconstruct x from (delta, sigma).
inline Vec2 from_flow(const Domain& dom, double delta, Vec2 sigma) {
  Vec2 n = outward_normal(dom, sigma);
  return sigma - n * delta;
}

/// Quadrature on the level curve Sigma_delta = {d(x) = delta}.
struct SurfaceQuadrature {
  double delta = 0;
  std::vector<Vec2> nodes;
  std::vector<double> weights;

  double total() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
  }
};

/// Exact length of Sigma_delta (closed form for both canonical domains).
inline double level_surface_measure(const Domain& dom, double delta) {
  if (dom.N != 2) fail("UnsupportedDimension", "level surfaces implemented for N=2");
  if (delta < 0 || delta >= dom.flow_reach()) fail("LevelTooDeep", "need 0 <= delta < delta*");
  double rho = dom.R - delta;
  if (dom.kind == DomainKind::Ball) return 2 * pi * rho;
  double half_chord = std::sqrt(std::max(0.0, rho * rho - delta * delta));
  double phi0 = std::asin(std::min(1.0, delta / rho));
  return 2 * half_chord + rho * (pi - 2 * phi0);
}

inline SurfaceQuadrature level_surface(const Domain& dom, double delta, int m) {
  if (dom.N != 2) fail("UnsupportedDimension", "level surfaces implemented for N=2");
  if (delta < 0 || delta >= dom.flow_reach()) fail("LevelTooDeep", "need 0 <= delta < delta*");
  if (m < 8) fail("TooFewNodes", "need m >= 8");
  SurfaceQuadrature q;
  q.delta = delta;
  double rho = dom.R - delta;
  if (dom.kind == DomainKind::Ball) {
    double w = 2 * pi * rho / m;
    q.nodes.reserve(m);
    for (int j = 0; j < m; ++j) {
      double th = 2 * pi * j / m;
      q.nodes.push_back({rho * std::cos(th), rho * std::sin(th)});
      q.weights.push_back(w);
    }
    return q;
  }
  // HalfDisk: two horizontal segments at height delta plus the inner arc,
  // nodes split proportionally to length, trapezoid weights on each piece.
  double half_chord = std::sqrt(std::max(0.0, rho * rho - delta * delta));
  double phi0 = std::asin(std::min(1.0, delta / rho));
  double len_seg = 2 * half_chord;
  double len_arc = rho * (pi - 2 * phi0);
  double len = len_seg + len_arc;
  int m_seg = std::max(4, static_cast<int>(std::lround(m * len_seg / len)));
  int m_arc = std::max(4, m - m_seg);
  // segment x1 in [-half_chord, half_chord] at height delta, midpoint rule
  for (int j = 0; j < m_seg; ++j) {
    double t = (j + 0.5) / m_seg;
    q.nodes.push_back({-half_chord + t * len_seg, delta});
    q.weights.push_back(len_seg / m_seg);
  }
  for (int j = 0; j < m_arc; ++j) {
    double t = (j + 0.5) / m_arc;
    double phi = phi0 + t * (pi - 2 * phi0);
    q.nodes.push_back({rho * std::cos(phi), rho * std::sin(phi)});
    q.weights.push_back(len_arc / m_arc);
  }
  return q;
}

/// Boundary projection of a level-surface node (unique away from the ridge).
inline Vec2 project_to_boundary(const Domain& dom, Vec2 x) {
  if (x.norm() >= dom.R * (1 - 1e-13)) return x * (dom.R / x.norm());
  if (dom.kind == DomainKind::Ball) return x * (dom.R / std::max(x.norm(), 1e-300));
  double to_flat = x.y;
  double to_arc = dom.R - x.norm();
  if (to_flat <= to_arc) return Vec2{x.x, 0.0};
  return x * (dom.R / x.norm());
}

}  // namespace singlab
