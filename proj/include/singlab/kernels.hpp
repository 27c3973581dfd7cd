#pragma once

#include <cmath>
#include <vector>

#include "singlab/common.hpp"
#include "singlab/domain.hpp"
#include "singlab/grid.hpp"
#include "singlab/measure.hpp"

namespace singlab {

namespace detail {

// Symmetric invariants of the ball Green function:
//   A = |x|^2 |y|^2 / R^2 - 2 x.y + R^2  (= |y|^2 |x - y*|^2 / R^2)
//   B = |x - y|^2
inline void ball_invariants(double R, Vec2 x, Vec2 y, double& A, double& B) {
  double xx = x.dot(x), yy = y.dot(y), xy = x.dot(y);
  A = xx * yy / (R * R) - 2 * xy + R * R;
  B = xx - 2 * xy + yy;
}

inline double green_ball2(double R, Vec2 x, Vec2 y) {
  double A, B;
  ball_invariants(R, x, y, A, B);
  return std::log(A / B) / (4 * pi);
}

inline Vec2 grad_y_green_ball2(double R, Vec2 x, Vec2 y) {
  double A, B;
  ball_invariants(R, x, y, A, B);
  Vec2 dA = y * (2 * x.dot(x) / (R * R)) - x * 2.0;
  Vec2 dB = (y - x) * 2.0;
  return (dA * (1.0 / A) - dB * (1.0 / B)) * (1.0 / (4 * pi));
}

inline double green_ball3(double R, Vec3 x, Vec3 y) {
  double xx = x.dot(x), yy = y.dot(y), xy = x.dot(y);
  double A = xx * yy / (R * R) - 2 * xy + R * R;
  double B = xx - 2 * xy + yy;
  return (1.0 / std::sqrt(B) - 1.0 / std::sqrt(A)) / (4 * pi);
}

inline Vec2 reflect(Vec2 y) { return {y.x, -y.y}; }
inline Vec3 reflect(Vec3 y) { return {y.x, y.y, -y.z}; }

/// Integrate the Poisson kernel of the disk against a boundary density by the
/// harmonic-measure substitution: boundary angles are sampled where the
/// kernel seen from x puts equal mass,
///   theta(u) = phi + 2 atan2((R-r) sin(u/2), (R+r) cos(u/2)),
/// so the periodic trapezoid sum (1/M) sum f(theta(u_k)) converges spectrally
/// and is exact for constants.
template <class F>
inline double poisson_density_ball(double R, Vec2 x, const F& f_of_angle, int m) {
  double r = x.norm();
  double phi = (r > 0) ? std::atan2(x.y, x.x) : 0.0;
  double acc = 0;
  for (int k = 0; k < m; ++k) {
    double u = -pi + 2 * pi * (k + 0.5) / m;
    double th = phi + 2 * std::atan2((R - r) * std::sin(u / 2), (R + r) * std::cos(u / 2));
    acc += f_of_angle(th);
  }
  return acc / m;
}

}  // namespace detail

/// Green function of -Lap with Dirichlet conditions on the canonical domain.
/// Half-disk values come from the ball kernel by reflection across the flat
/// side.
inline double green_kernel(const Domain& dom, Vec2 x, Vec2 y) {
  if (dom.N != 2) fail("UnsupportedDimension", "Vec2 overload needs N=2");
  if ((x - y).norm() < 1e-14) fail("CoincidentPoints", "x == y");
  double g = detail::green_ball2(dom.R, x, y);
  if (dom.kind == DomainKind::HalfDisk) g -= detail::green_ball2(dom.R, x, detail::reflect(y));
  return g;
}

inline double green_kernel(const Domain& dom, Vec3 x, Vec3 y) {
  if (dom.N != 3) fail("UnsupportedDimension", "Vec3 overload needs N=3");
  if ((x - y).norm() < 1e-14) fail("CoincidentPoints", "x == y");
  double g = detail::green_ball3(dom.R, x, y);
  if (dom.kind == DomainKind::HalfDisk) g -= detail::green_ball3(dom.R, x, detail::reflect(y));
  return g;
}

/// Poisson kernel P(x, sigma) with respect to arc length at sigma.
inline double poisson_kernel(const Domain& dom, Vec2 x, Vec2 sigma) {
  if (dom.N != 2) fail("UnsupportedDimension", "Vec2 overload needs N=2");
  double R = dom.R;
  if (dom.kind == DomainKind::Ball) {
    double b = (x - sigma).dot(x - sigma);
    if (b < 1e-28) fail("CoincidentPoints", "x at the kernel pole");
    return (R * R - x.dot(x)) / (2 * pi * R * b);
  }
  bool on_flat = std::abs(sigma.y) < 1e-12 * R;
  if (on_flat) {
    // double normal derivative of the reflected ball kernel
    Vec2 g = detail::grad_y_green_ball2(R, x, sigma);
    return 2.0 * g.y;
  }
  double b1 = (x - sigma).dot(x - sigma);
  Vec2 sr = detail::reflect(sigma);
  double b2 = (x - sr).dot(x - sr);
  if (b1 < 1e-28) fail("CoincidentPoints", "x at the kernel pole");
  double c = (R * R - x.dot(x)) / (2 * pi * R);
  return c * (1.0 / b1 - 1.0 / b2);
}

/// P[mu] sampled on a grid: exact kernel evaluation for atoms, subtracted
/// trapezoid quadrature for the density part (the constant is extended
/// exactly, so the peaked kernel integrates against f - f(sigma_x) only).
inline GridField apply_poisson(const Domain& dom, const BoundaryMeasure& mu,
                               const GridSpec& spec) {
  GridField out(dom, spec);
  SurfaceQuadrature q;
  std::vector<double> fs;
  const bool ball = dom.kind == DomainKind::Ball;
  if (mu.has_density() && !ball) {
    q = level_surface(dom, 0.0, mu.quad_nodes);
    fs.resize(q.nodes.size());
    for (std::size_t k = 0; k < q.nodes.size(); ++k) fs[k] = mu.density(q.nodes[k]);
  }
  auto eval = [&](Vec2 x, bool boundary_node) {
    double val = 0;
    if (!boundary_node) {
      for (const auto& a : mu.atoms) val += a.mass * poisson_kernel(dom, x, a.point);
      if (mu.has_density() && ball) {
        double R = dom.R;
        auto f_of_angle = [&](double th) {
          return mu.density(Vec2{R * std::cos(th), R * std::sin(th)});
        };
        val += detail::poisson_density_ball(R, x, f_of_angle, mu.quad_nodes);
      } else if (mu.has_density()) {
        Vec2 sx = project_to_boundary(dom, x);
        double f0 = mu.density(sx);
        double s = f0;
        for (std::size_t k = 0; k < q.nodes.size(); ++k)
          s += q.weights[k] * poisson_kernel(dom, x, q.nodes[k]) * (fs[k] - f0);
        val += s;
      }
    } else {
      // the trace of the absolutely continuous part; atoms contribute 0
      // almost everywhere on the boundary
      if (mu.has_density()) val += mu.density(project_to_boundary(dom, x));
    }
    return val;
  };
  for (int i = 0; i < out.n_r(); ++i)
    for (int j = 0; j < out.n_theta(); ++j)
      out.at(i, j) = eval(out.point(i, j), out.is_boundary(i, j));
  if (out.has_center()) out.center() = eval(Vec2{0, 0}, false);
  return out;
}

/// P[mu] at a single point (interior).
inline double poisson_value(const Domain& dom, const BoundaryMeasure& mu, Vec2 x) {
  double val = 0;
  for (const auto& a : mu.atoms) val += a.mass * poisson_kernel(dom, x, a.point);
  if (mu.has_density()) {
    if (dom.kind == DomainKind::Ball) {
      double R = dom.R;
      auto f_of_angle = [&](double th) {
        return mu.density(Vec2{R * std::cos(th), R * std::sin(th)});
      };
      val += detail::poisson_density_ball(R, x, f_of_angle, mu.quad_nodes);
    } else {
      auto q = level_surface(dom, 0.0, mu.quad_nodes);
      Vec2 sx = project_to_boundary(dom, x);
      double f0 = mu.density(sx);
      double s = f0;
      for (std::size_t k = 0; k < q.nodes.size(); ++k)
        s += q.weights[k] * poisson_kernel(dom, x, q.nodes[k]) * (mu.density(q.nodes[k]) - f0);
      val += s;
    }
  }
  return val;
}

/// G[f] at arbitrary target points by cell quadrature. On the ball the
/// dominant singular error is removed by subtracting the target value
/// against the exact torsion function,
///   G[f](x) = f(x) T(x) + int G(x,y) (f(y) - f(x)) dy,  T = (R^2-|x|^2)/4,
/// which zeroes the self cell. On the half disk (no closed-form torsion)
/// the self cell integrates the free-space log kernel over an equal-area
/// disk with the image part at the cell center.
inline std::vector<double> apply_green_at(const Domain& dom, const GridField& f,
                                          const std::vector<Vec2>& targets) {
  if (dom.N != 2) fail("UnsupportedDimension", "apply_green needs N=2");
  int nr = f.n_r(), nt = f.n_theta();
  // weighted integrability guard
  double wsum = 0;
  for (int i = 0; i < nr - 1; ++i)
    for (int j = 0; j < nt; ++j) {
      if (f.is_boundary(i, j)) continue;
      double d = boundary_distance(dom, f.point(i, j));
      wsum += std::abs(f.at(i, j)) * d * f.cell_area(i, j);
    }
  if (!std::isfinite(wsum)) fail("NonIntegrableInput", "sum |f| d dx overflows");

  const bool subtract = dom.kind == DomainKind::Ball;
  std::vector<double> out(targets.size(), 0.0);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    Vec2 x = targets[t];
    double fx = subtract ? f.value_at(x) : 0.0;
    double acc = 0;
    for (int i = 0; i < nr - 1; ++i)
      for (int j = 0; j < nt; ++j) {
        if (f.is_boundary(i, j)) continue;
        double fv = f.at(i, j) - fx;
        if (fv == 0.0) continue;
        Vec2 y = f.point(i, j);
        double area = f.cell_area(i, j);
        double d2 = (x - y).dot(x - y);
        double rho2 = area / pi;
        if (d2 < rho2) {
          if (subtract) continue;  // integrand vanishes at the target
          double rho = std::sqrt(rho2);
          // integral of -(1/2pi) ln s over a disk of radius rho
          // integral of -(1/2pi) ln|x-y| over the equal-area disk of radius rho
          double free_part = rho * rho * (1.0 - 2.0 * std::log(rho)) / 4.0;
          // regular part: G_ball + free log = log(A)/4pi, finite at x == y
          double A, B;
          detail::ball_invariants(dom.R, x, y, A, B);
          double image = std::log(A) / (4 * pi);
          image -= detail::green_ball2(dom.R, x, detail::reflect(y));
          acc += fv * (free_part + image * area);
        } else {
          acc += fv * green_kernel(dom, x, y) * area;
        }
      }
    if (f.has_center()) {
      double area = f.center_cell_area();
      double fv = f.center() - fx;
      if (area > 0 && fv != 0.0 && x.dot(x) >= area / pi)
        acc += fv * green_kernel(dom, x, Vec2{0, 0}) * area;
    }
    if (subtract) acc += fx * (dom.R * dom.R - x.dot(x)) / 4.0;
    out[t] = acc;
  }
  return out;
}

/// G[f] on the grid of f (boundary nodes get 0).
inline GridField apply_green(const Domain& dom, const GridField& f) {
  std::vector<Vec2> targets;
  targets.reserve(std::size_t(f.n_r()) * f.n_theta());
  for (int i = 0; i < f.n_r(); ++i)
    for (int j = 0; j < f.n_theta(); ++j) targets.push_back(f.point(i, j));
  auto vals = apply_green_at(dom, f, targets);
  GridField out(dom, f.spec());
  std::size_t k = 0;
  for (int i = 0; i < out.n_r(); ++i)
    for (int j = 0; j < out.n_theta(); ++j, ++k)
      out.at(i, j) = out.is_boundary(i, j) ? 0.0 : vals[k];
  if (out.has_center()) out.center() = apply_green_at(dom, f, {Vec2{0, 0}})[0];
  return out;
}

/// G[nu] for an interior measure (atoms via the kernel, density via apply_green).
inline GridField apply_green_measure(const Domain& dom, const InteriorMeasure& nu,
                                     const GridSpec& spec) {
  GridField out(dom, spec);
  for (int i = 0; i < out.n_r(); ++i)
    for (int j = 0; j < out.n_theta(); ++j) {
      if (out.is_boundary(i, j)) continue;
      Vec2 x = out.point(i, j);
      double v = 0;
      for (const auto& a : nu.atoms) {
        if ((x - a.point).norm() < 1e-14) continue;
        v += a.mass * green_kernel(dom, x, a.point);
      }
      out.at(i, j) = v;
    }
  if (out.has_center()) {
    double v = 0;
    for (const auto& a : nu.atoms)
      if (a.point.norm() >= 1e-14) v += a.mass * green_kernel(dom, Vec2{0, 0}, a.point);
    out.center() = v;
  }
  if (nu.has_density()) {
    GridField dens(dom, spec);
    for (int i = 0; i < dens.n_r(); ++i)
      for (int j = 0; j < dens.n_theta(); ++j) dens.at(i, j) = nu.density(dens.point(i, j));
    if (dens.has_center()) dens.center() = nu.density(Vec2{0, 0});
    GridField g = apply_green(dom, dens);
    for (std::size_t k2 = 0; k2 < out.values().size(); ++k2) out.values()[k2] += g.values()[k2];
    if (out.has_center()) out.center() += g.center();
  }
  return out;
}

}  // namespace singlab
