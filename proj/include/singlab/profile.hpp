#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "singlab/common.hpp"
#include "singlab/exponents.hpp"

namespace singlab {

/// Separable singular profile on the upper hemisphere: the positive solution
/// of the angular ODE vanishing at the equator. For N=2 the angle runs over
/// [-pi/2, pi/2] measured from the pole axis; for N=3 the grid holds the
/// colatitude on [0, pi/2].
struct Profile {
  int N = 2;
  double q = 0;
  std::vector<double> phi;    ///< angle grid
  std::vector<double> omega;  ///< profile values, >= 0
  double a = 0;               ///< pole height omega(0)
  double residual = 0;        ///< sup finite-difference residual of the ODE

  /// Cubic interpolation of omega at an arbitrary angle; zero outside the
  /// hemisphere closure.
  double value(double ang) const {
    if (N == 2 && std::abs(ang) >= pi / 2) return 0.0;
    if (N == 3 && (ang >= pi / 2 || ang < 0)) return 0.0;
    return std::max(0.0, interp_cubic(phi, omega, ang));
  }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail("IoError", "cannot open " + path);
    out.precision(17);
    out << "phi,omega\n";
    for (std::size_t k = 0; k < phi.size(); ++k) out << phi[k] << "," << omega[k] << "\n";
  }

  void write_sidecar(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail("IoError", "cannot open " + path);
    out.precision(17);
    out << "{\n  \"N\": " << N << ",\n  \"q\": " << q << ",\n  \"a\": " << a
        << ",\n  \"residual\": " << residual << "\n}\n";
  }
};

struct ShootingConfig {
  int max_iter = 200;        ///< bisection iterations / bracket expansions
  double tol_a = 1e-12;      ///< relative tolerance on the pole height
  double tol_angle = 1e-8;   ///< equator-hit tolerance in angle
  int n_nodes = 801;         ///< output grid resolution (odd for N=2 symmetry)
  int residual_nodes = 16001;  ///< fine grid used for the residual certificate
  double ode_tol = 1e-11;    ///< local error tolerance of the integrator
};

/// Outcome of solve_profile: either the unique profile, or a tagged
/// no-solution certificate (not an error) with a diagnostic.
struct ProfileResult {
  std::optional<Profile> profile;
  bool obstruction = false;  ///< closed-form nonexistence certificate agreed
  std::string diagnostic;

  bool found() const { return profile.has_value(); }
};

namespace detail {

/// Dormand-Prince 5(4) step for the 2-state angular ODE. Returns the local
/// error estimate; fills y_out and the stage slopes needed elsewhere.
template <class F>
inline double dp45_step(const F& f, double t, const double y[2], double h, double y_out[2]) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  double k1[2], k2[2], k3[2], k4[2], k5[2], k6[2], k7[2], tmp[2];
  f(t, y, k1);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * (1.0 / 5) * k1[i];
  f(t + c2 * h, tmp, k2);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * (3.0 / 40 * k1[i] + 9.0 / 40 * k2[i]);
  f(t + c3 * h, tmp, k3);
  for (int i = 0; i < 2; ++i)
    tmp[i] = y[i] + h * (44.0 / 45 * k1[i] - 56.0 / 15 * k2[i] + 32.0 / 9 * k3[i]);
  f(t + c4 * h, tmp, k4);
  for (int i = 0; i < 2; ++i)
    tmp[i] = y[i] + h * (19372.0 / 6561 * k1[i] - 25360.0 / 2187 * k2[i] +
                         64448.0 / 6561 * k3[i] - 212.0 / 729 * k4[i]);
  f(t + c5 * h, tmp, k5);
  for (int i = 0; i < 2; ++i)
    tmp[i] = y[i] + h * (9017.0 / 3168 * k1[i] - 355.0 / 33 * k2[i] + 46732.0 / 5247 * k3[i] +
                         49.0 / 176 * k4[i] - 5103.0 / 18656 * k5[i]);
  f(t + h, tmp, k6);
  for (int i = 0; i < 2; ++i)
    y_out[i] = y[i] + h * (35.0 / 384 * k1[i] + 500.0 / 1113 * k3[i] + 125.0 / 192 * k4[i] -
                           2187.0 / 6784 * k5[i] + 11.0 / 84 * k6[i]);
  f(t + h, y_out, k7);
  double err = 0;
  static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                      e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                      e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
  for (int i = 0; i < 2; ++i) {
    double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    double sc = 1e-12 + std::max(std::abs(y[i]), std::abs(y_out[i]));
    err = std::max(err, std::abs(e) / sc);
  }
  return err;
}

/// Integrate the shot from the pole; reports the first zero angle (cubic
/// Hermite root inside the crossing step), +infinity when the shot stays
/// positive past `phi_cap` or blows up.
struct ShotTrace {
  std::vector<double> phi, w, wp;  ///< accepted steps (angle, omega, omega')
  double first_zero = 0;           ///< +inf when no crossing
  bool blew_up = false;
};

template <class F>
inline ShotTrace integrate_shot(const F& f, double phi0, double y0[2], double phi_cap,
                                double tol) {
  ShotTrace tr;
  double t = phi0, y[2] = {y0[0], y0[1]};
  tr.phi.push_back(t);
  tr.w.push_back(y[0]);
  tr.wp.push_back(y[1]);
  tr.first_zero = std::numeric_limits<double>::infinity();
  double h = 1e-4;
  const double hmax = 5e-3, hmin = 1e-13;
  while (t < phi_cap) {
    h = std::min(h, phi_cap - t);
    double ynew[2];
    double err = dp45_step(f, t, y, h, ynew);
    if (err > tol && h > hmin) {
      h = std::max(hmin, 0.9 * h * std::pow(tol / err, 0.2));
      continue;
    }
    double t1 = t + h;
    if (ynew[0] <= 0) {
      // cubic Hermite root in [t, t1] using values and slopes at both ends
      double lo = 0, hi = 1;
      auto hermite = [&](double u) {
        double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * y[0] + (u3 - 2 * u2 + u) * h * y[1] +
               (-2 * u3 + 3 * u2) * ynew[0] + (u3 - u2) * h * ynew[1];
      };
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (hermite(mid) > 0)
          lo = mid;
        else
          hi = mid;
      }
      tr.first_zero = t + 0.5 * (lo + hi) * h;
      tr.phi.push_back(tr.first_zero);
      tr.w.push_back(0.0);
      tr.wp.push_back(ynew[1]);
      return tr;
    }
    if (ynew[0] > 1e8 || std::abs(ynew[1]) > 1e10) {
      tr.blew_up = true;
      return tr;
    }
    t = t1;
    y[0] = ynew[0];
    y[1] = ynew[1];
    tr.phi.push_back(t);
    tr.w.push_back(y[0]);
    tr.wp.push_back(y[1]);
    h = std::clamp(0.9 * h * std::pow(tol / std::max(err, 1e-16), 0.2), hmin, hmax);
  }
  return tr;
}

/// Integrate the shot and record (omega, omega') exactly at the requested
/// ascending angles (steps are clamped to land on them, no interpolation).
template <class F>
inline void integrate_on_grid(const F& f, double phi0, const double y0[2],
                              const std::vector<double>& angles, double tol,
                              std::vector<double>& w, std::vector<double>& wp) {
  w.assign(angles.size(), 0.0);
  wp.assign(angles.size(), 0.0);
  double t = phi0, y[2] = {y0[0], y0[1]};
  double h = 1e-5;
  const double hmax = 1e-3, hmin = 1e-13;
  std::size_t k = 0;
  while (k < angles.size() && angles[k] <= phi0 + 1e-15) {
    w[k] = y[0];
    wp[k] = y[1];
    ++k;
  }
  while (k < angles.size()) {
    double hstep = std::min(h, angles[k] - t);
    double ynew[2];
    double err = dp45_step(f, t, y, hstep, ynew);
    if (err > tol && hstep > hmin && hstep == h) {
      h = std::max(hmin, 0.9 * h * std::pow(tol / err, 0.2));
      continue;
    }
    t += hstep;
    y[0] = ynew[0];
    y[1] = ynew[1];
    if (hstep == h)
      h = std::clamp(0.9 * h * std::pow(tol / std::max(err, 1e-16), 0.2), hmin, hmax);
    if (t >= angles[k] - 1e-15) {
      w[k] = y[0];
      wp[k] = y[1];
      ++k;
    }
  }
}

}  // namespace detail

/// Shooting solver for the hemisphere profile. Bisects on the pole height so
/// that the first zero of the shot lands at the equator. The zero-crossing
/// angle is strictly increasing in the pole height, which makes the bisection
/// a certificate of uniqueness; when even vanishing heights overshoot the
/// equator the problem has no positive profile and a tagged NoProfile outcome
/// is returned together with the closed-form obstruction check.
inline ProfileResult solve_profile(int N, double q, const ShootingConfig& cfg = {}) {
  if (N != 2 && N != 3) fail("QOutOfRange", "profile dimensions are 2 and 3");
  auto e = exponents(N, q);
  double beta = e.beta, lam = e.lambda_coeff;

  auto rhs2 = [beta, lam, q](double, const double y[2], double dy[2]) {
    dy[0] = y[1];
    dy[1] = std::pow(beta * beta * y[0] * y[0] + y[1] * y[1], q / 2) - lam * y[0];
  };
  auto rhs3 = [beta, lam, q](double t, const double y[2], double dy[2]) {
    dy[0] = y[1];
    dy[1] = std::pow(beta * beta * y[0] * y[0] + y[1] * y[1], q / 2) - lam * y[0] -
            (std::cos(t) / std::sin(t)) * y[1];
  };

  const double phi_cap = 2.5;  // safely past the equator
  auto shoot = [&](double a) {
    if (N == 2) {
      double y0[2] = {a, 0.0};
      return detail::integrate_shot(rhs2, 0.0, y0, phi_cap, cfg.ode_tol);
    }
    // N=3: series start past the removable pole singularity of the cot weight
    double g0 = std::pow(beta * beta * a * a, q / 2) - lam * a;
    double b = g0 / 4;  // omega = a + b phi^2 satisfies the pole limit
    double eps = 1e-6;
    double y0[2] = {a + b * eps * eps, 2 * b * eps};
    return detail::integrate_shot(rhs3, eps, y0, phi_cap, cfg.ode_tol);
  };

  auto zero_of = [&](double a) { return shoot(a).first_zero; };

  ProfileResult res;
  res.obstruction = existence_obstruction(N, q);

  // nonexistence screen: the crossing angle increases with the pole height,
  // so if tiny heights already reach the equator no height can work
  double probe = 1e-4;
  double z_lo = zero_of(probe);
  int guard = 0;
  while (z_lo >= pi / 2 - cfg.tol_angle && probe > 1e-13 && guard++ < cfg.max_iter) {
    probe *= 1e-2;
    z_lo = zero_of(probe);
  }
  if (z_lo >= pi / 2 - cfg.tol_angle) {
    res.diagnostic = "all shots stay positive up to the equator even for vanishing pole height";
    return res;
  }
  double a_lo = probe;

  // bracket from above by geometric expansion
  double a_hi = std::max(1.0, 2 * a_lo);
  int expansions = 0;
  while (expansions++ < 50) {
    double z = zero_of(a_hi);
    if (z > pi / 2) break;
    a_lo = a_hi;
    a_hi *= 2;
  }
  if (expansions > 50) fail("NonConvergence", "failed to bracket the pole height");

  for (int it = 0; it < cfg.max_iter && (a_hi - a_lo) > cfg.tol_a * a_hi; ++it) {
    double mid = 0.5 * (a_lo + a_hi);
    if (zero_of(mid) < pi / 2)
      a_lo = mid;
    else
      a_hi = mid;
  }
  double a = 0.5 * (a_lo + a_hi);

  // sample the converged shot exactly on the output grid (no interpolation:
  // integrator steps are clamped to land on the nodes)
  Profile p;
  p.N = N;
  p.q = q;
  p.a = a;
  int n = std::max(33, cfg.n_nodes);
  double phi0 = 0.0, y0[2] = {a, 0.0};
  const double eps3 = 1e-6;
  if (N == 3) {
    double g0 = std::pow(beta * beta * a * a, q / 2) - lam * a;
    double b = g0 / 4;
    phi0 = eps3;
    y0[0] = a + b * eps3 * eps3;
    y0[1] = 2 * b * eps3;
  }
  auto sample = [&](const std::vector<double>& angles, std::vector<double>& w,
                    std::vector<double>& wp) {
    if (N == 2)
      detail::integrate_on_grid(rhs2, phi0, y0, angles, cfg.ode_tol, w, wp);
    else
      detail::integrate_on_grid(rhs3, phi0, y0, angles, cfg.ode_tol, w, wp);
  };

  if (N == 2) {
    if (n % 2 == 0) ++n;
    int half = n / 2;
    std::vector<double> ang(half + 1), w, wp;
    for (int k = 0; k <= half; ++k) ang[k] = (pi / 2) * k / half;
    sample(ang, w, wp);
    p.phi.resize(n);
    p.omega.resize(n);
    for (int k = 0; k <= half; ++k) {
      double v = std::max(0.0, w[k]);
      p.phi[half + k] = ang[k];
      p.omega[half + k] = v;
      p.phi[half - k] = -ang[k];
      p.omega[half - k] = v;  // even reflection
    }
  } else {
    std::vector<double> ang(n), w, wp;
    for (int k = 0; k < n; ++k) ang[k] = (pi / 2) * k / (n - 1);
    sample(ang, w, wp);
    p.phi = ang;
    p.omega.resize(n);
    for (int k = 0; k < n; ++k) p.omega[k] = std::max(0.0, w[k]);
  }

  // residual certificate: centered difference of the sampled derivative
  // against the equation's right-hand side on a fine uniform grid
  {
    int m = std::max(1001, cfg.residual_nodes);
    double lo = (N == 3) ? 10 * eps3 : 0.0;
    std::vector<double> ang(m), w, wp;
    for (int k = 0; k < m; ++k) ang[k] = lo + (pi / 2 - lo) * k / (m - 1);
    sample(ang, w, wp);
    double h = ang[1] - ang[0];
    double worst = 0;
    for (int k = 1; k + 1 < m; ++k) {
      double d = (wp[k + 1] - wp[k - 1]) / (2 * h);
      double g = std::pow(beta * beta * w[k] * w[k] + wp[k] * wp[k], q / 2) - lam * w[k];
      if (N == 3) g -= (std::cos(ang[k]) / std::sin(ang[k])) * wp[k];
      worst = std::max(worst, std::abs(d - g));
    }
    p.residual = worst;
  }
  res.profile = std::move(p);
  return res;
}

/// The separable singular solution |x|^{-beta} omega(angle) on the upper
/// half-space; angle measured from the vertical axis.
inline double separable_solution(const Profile& p, Vec2 x) {
  if (p.N != 2) fail("QOutOfRange", "2d evaluation needs an N=2 profile");
  double r = x.norm();
  if (r == 0) fail("OriginEvaluation", "separable solution is singular at the origin");
  if (x.y < 0) fail("PointOutsideDomain", "point below the boundary hyperplane");
  double ang = std::atan2(x.x, x.y);  // 0 on the pole axis, +-pi/2 on the boundary
  double beta = exponents(p.N, p.q).beta;
  return std::pow(r, -beta) * p.value(ang);
}

inline double separable_solution(const Profile& p, Vec3 x) {
  if (p.N != 3) fail("QOutOfRange", "3d evaluation needs an N=3 profile");
  double r = x.norm();
  if (r == 0) fail("OriginEvaluation", "separable solution is singular at the origin");
  if (x.z < 0) fail("PointOutsideDomain", "point below the boundary hyperplane");
  double ang = std::acos(std::clamp(x.z / r, -1.0, 1.0));
  double beta = exponents(p.N, p.q).beta;
  return std::pow(r, -beta) * p.value(ang);
}

/// Angle of the first zero of a single shot with pole height `a`; +infinity
/// when the shot stays positive (or blows up) before reaching the cap. This
/// is the monotone map the bisection of solve_profile inverts.
inline double first_zero_angle(int N, double q, double a, double ode_tol = 1e-11) {
  if (N != 2 && N != 3) fail("QOutOfRange", "profile dimensions are 2 and 3");
  auto e = exponents(N, q);
  double beta = e.beta, lam = e.lambda_coeff;
  if (N == 2) {
    auto rhs = [beta, lam, q](double, const double y[2], double dy[2]) {
      dy[0] = y[1];
      dy[1] = std::pow(beta * beta * y[0] * y[0] + y[1] * y[1], q / 2) - lam * y[0];
    };
    double y0[2] = {a, 0.0};
    return detail::integrate_shot(rhs, 0.0, y0, 2.5, ode_tol).first_zero;
  }
  auto rhs = [beta, lam, q](double t, const double y[2], double dy[2]) {
    dy[0] = y[1];
    dy[1] = std::pow(beta * beta * y[0] * y[0] + y[1] * y[1], q / 2) - lam * y[0] -
            (std::cos(t) / std::sin(t)) * y[1];
  };
  double g0 = std::pow(beta * beta * a * a, q / 2) - lam * a;
  double b = g0 / 4, eps = 1e-6;
  double y0[2] = {a + b * eps * eps, 2 * b * eps};
  return detail::integrate_shot(rhs, eps, y0, 2.5, ode_tol).first_zero;
}

/// Discrete check that cos(angle) is the first hemisphere eigenfunction.
struct EigenCheck {
  double lambda = 0;     ///< fitted eigenvalue of the discrete operator
  double deviation = 0;  ///< sup |L cos - lambda cos| over interior nodes
  double lambda_err = 0; ///< |lambda - (N-1)|
};

inline EigenCheck eigen_check(int N, int n_nodes = 2000) {
  if (N != 2 && N != 3) fail("QOutOfRange", "eigen check supports N in {2,3}");
  EigenCheck out;
  if (N == 2) {
    // uniform grid on [-pi/2, pi/2]; -d^2/dphi^2 applied to cos
    int n = n_nodes;
    double h = pi / (n - 1);
    double num = 0, den = 0;
    std::vector<double> L(n, 0.0), c(n, 0.0);
    for (int k = 0; k < n; ++k) c[k] = std::cos(-pi / 2 + k * h);
    for (int k = 1; k + 1 < n; ++k) {
      L[k] = -(c[k - 1] - 2 * c[k] + c[k + 1]) / (h * h);
      num += L[k] * c[k];
      den += c[k] * c[k];
    }
    out.lambda = num / den;
    for (int k = 1; k + 1 < n; ++k)
      out.deviation = std::max(out.deviation, std::abs(L[k] - out.lambda * c[k]));
    out.lambda_err = std::abs(out.lambda - 1.0);
    return out;
  }
  // N=3: -(w'' + cot(phi) w') on (0, pi/2), staggered nodes avoid the pole
  int n = n_nodes;
  double h = (pi / 2) / n;
  double num = 0, den = 0;
  std::vector<double> L(n, 0.0), c(n, 0.0), ph(n, 0.0);
  for (int k = 0; k < n; ++k) {
    ph[k] = (k + 0.5) * h;
    c[k] = std::cos(ph[k]);
  }
  for (int k = 1; k + 1 < n; ++k) {
    double d2 = (c[k - 1] - 2 * c[k] + c[k + 1]) / (h * h);
    double d1 = (c[k + 1] - c[k - 1]) / (2 * h);
    L[k] = -(d2 + (std::cos(ph[k]) / std::sin(ph[k])) * d1);
    num += L[k] * c[k];
    den += c[k] * c[k];
  }
  out.lambda = num / den;
  for (int k = 1; k + 1 < n; ++k)
    out.deviation = std::max(out.deviation, std::abs(L[k] - out.lambda * c[k]));
  out.lambda_err = std::abs(out.lambda - 2.0);
  return out;
}

}  // namespace singlab
