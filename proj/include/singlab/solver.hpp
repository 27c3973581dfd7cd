#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "singlab/common.hpp"
#include "singlab/domain.hpp"
#include "singlab/exponents.hpp"
#include "singlab/grid.hpp"
#include "singlab/kernels.hpp"
#include "singlab/measure.hpp"

namespace singlab {

// ---------------------------------------------------------------- absorption

enum class LawKind { Power, TruncatedPower, Custom };

/// The gradient absorption law g: nondecreasing, g(0) = 0, locally Lipschitz.
/// The subcriticality flags record whether the integral conditions
///   int_1^inf g(s) s^{-(2N+1)/N} ds < inf   (boundary measures admissible)
///   int_1^inf g(s) s^{-(2N-1)/(N-1)} ds < inf   (interior measures admissible)
/// hold for the dimension the law was built for.
struct AbsorptionLaw {
  LawKind kind = LawKind::Power;
  double q = 1.5;
  double cap = std::numeric_limits<double>::infinity();
  std::vector<double> s_tab, g_tab;
  bool subcritical_boundary = false;
  bool subcritical_interior = false;

  double operator()(double s) const {
    if (s <= 0) return 0.0;
    switch (kind) {
      case LawKind::Power:
        return std::pow(s, q);
      case LawKind::TruncatedPower:
        return std::min(std::pow(s, q), cap);
      case LawKind::Custom: {
        if (s_tab.empty()) return 0.0;
        if (s >= s_tab.back()) {
          // extend by the last slope (locally Lipschitz extension)
          std::size_t n = s_tab.size();
          double slope = n >= 2 ? (g_tab[n - 1] - g_tab[n - 2]) / (s_tab[n - 1] - s_tab[n - 2]) : 0.0;
          return g_tab.back() + slope * (s - s_tab.back());
        }
        std::size_t lo = 0, hi = s_tab.size() - 1;
        while (hi - lo > 1) {
          std::size_t mid = (lo + hi) / 2;
          if (s_tab[mid] <= s)
            lo = mid;
          else
            hi = mid;
        }
        double u = (s - s_tab[lo]) / (s_tab[hi] - s_tab[lo]);
        return g_tab[lo] * (1 - u) + g_tab[hi] * u;
      }
    }
    return 0.0;
  }

  bool is_zero() const {
    if (kind != LawKind::Custom) return false;
    for (double v : g_tab)
      if (v != 0.0) return false;
    return true;
  }

  /// g(s) = s^q. Allows q in [1, 2] so the q = 1 homogeneity experiment and
  /// the q = 2 Hopf-Cole run use the same machinery.
  static AbsorptionLaw power(double qq, int N = 2) {
    if (!(qq >= 1.0 && qq <= 2.0)) fail("QOutOfRange", "power law needs 1 <= q <= 2");
    AbsorptionLaw l;
    l.kind = LawKind::Power;
    l.q = qq;
    l.subcritical_boundary = qq < double(N + 1) / N;
    l.subcritical_interior = qq < double(N) / (N - 1);
    return l;
  }

  static AbsorptionLaw truncated_power(double qq, double capM, int N = 2) {
    AbsorptionLaw l = power(qq, N);
    if (!(capM > 0)) fail("QOutOfRange", "cap must be positive");
    l.kind = LawKind::TruncatedPower;
    l.cap = capM;
    // a bounded g always satisfies both integral conditions
    l.subcritical_boundary = true;
    l.subcritical_interior = true;
    return l;
  }

  static AbsorptionLaw custom(std::vector<double> s, std::vector<double> g, int N = 2) {
    if (s.size() != g.size() || s.size() < 2) fail("BadLaw", "need matching tables, size >= 2");
    if (s.front() != 0.0 || g.front() != 0.0) fail("BadLaw", "law must start at g(0) = 0");
    for (std::size_t k = 1; k < s.size(); ++k) {
      if (!(s[k] > s[k - 1])) fail("BadLaw", "s table must increase");
      if (g[k] < g[k - 1]) fail("BadLaw", "g must be nondecreasing");
    }
    AbsorptionLaw l;
    l.kind = LawKind::Custom;
    l.s_tab = std::move(s);
    l.g_tab = std::move(g);
    // numeric check of the tail integrals with the linear extension; both
    // exponents exceed 2, so a (at most linear) extension always converges
    auto tail = [&](double expo) {
      double acc = 0, ds = 0.05;
      for (double t = 1.0; t < 400.0; t += ds) acc += l(t + ds / 2) * std::pow(t + ds / 2, -expo) * ds;
      return std::isfinite(acc);
    };
    l.subcritical_boundary = tail(double(2 * N + 1) / N);
    l.subcritical_interior = tail(double(2 * N - 1) / (N - 1));
    return l;
  }

  static AbsorptionLaw zero() { return custom({0.0, 1.0}, {0.0, 0.0}); }
};

// ------------------------------------------------------------------- config

struct SolverConfig {
  std::string backend = "fd";  ///< "fd" | "picard"
  double theta = 0.5;          ///< Picard damping (auto-halved on overshoot)
  double tol_update = 1e-9;    ///< relative update stopping threshold
  double tol_weak = 1e-5;      ///< weak-residual stopping threshold
  int max_iter = 10000;
  GridSpec grid{64, 64, 1.0, 0};
  bool allow_supercritical = false;  ///< permit atoms with q >= q_c runs
  double atom_width = 0;             ///< boundary-atom mollifier width; 0 = 4 boundary cells
  double lin_tol = 1e-12;            ///< inner linear-solver update tolerance
  int lin_max_sweeps = 200000;
};

// ----------------------------------------------------------------- solution

struct Solution {
  Domain dom;
  GridField u;        ///< the solution samples
  GridField grad_r;   ///< radial gradient component
  GridField grad_t;   ///< angular gradient component (already divided by r)
  GridField upper;    ///< the comparison barrier P[mu_h] (+ G[nu_h])
  AbsorptionLaw law;
  BoundaryMeasure mu;
  std::optional<InteriorMeasure> nu;
  SolverConfig cfg;
  int iterations = 0;
  double final_update = 0;
  double weak_res = 0;
  bool subcriticality_violated = false;  ///< atoms with non-subcritical law

  double value_at(Vec2 x) const { return u.value_at(x); }
  double gradient_norm(int i, int j) const { return std::hypot(grad_r.at(i, j), grad_t.at(i, j)); }
};

// ------------------------------------------------- discrete polar Laplacian

namespace detail {

/// Five-point nonuniform polar Laplacian bound to a grid geometry, with the
/// finite-volume center coupling on the full disk, plus an SOR solver for
/// -Lap u = f with Dirichlet data held in the boundary nodes of u.
class PolarOperator {
 public:
  explicit PolarOperator(const GridField& g) : g_(&g) {
    nr_ = g.n_r();
    nt_ = g.n_theta();
    ball_ = g.periodic_theta();
    has_center_ = g.has_center();
    std::size_t m = std::size_t(nr_) * nt_;
    cm_.assign(m, 0);
    cp_.assign(m, 0);
    am_.assign(m, 0);
    ap_.assign(m, 0);
    cc_.assign(m, 0);
    for (int i = 0; i < nr_; ++i)
      for (int j = 0; j < nt_; ++j) {
        if (g.is_boundary(i, j)) continue;
        std::size_t k = idx(i, j);
        double r = g.r(i);
        double hm = (i == 0) ? g.r(0) : g.r(i) - g.r(i - 1);
        double hp = g.r(i + 1) - g.r(i);
        // conservative radial part: flux differences across the same cell
        // edges that define the quadrature areas; this keeps the disk center
        // coupled to the first ring (the plain 3-point collocation stencil
        // loses the center when r_0 = h/2)
        double e0 = (i == 0) ? (g.has_center() ? 0.5 * g.r(0) : g.r(0))
                             : 0.5 * (g.r(i - 1) + g.r(i));
        double e1 = (i == nr_ - 1) ? g.domain().R : 0.5 * (g.r(i) + g.r(i + 1));
        double dr = e1 - e0;
        cm_[k] = e0 / (hm * r * dr);
        cp_[k] = e1 / (hp * r * dr);
        cc_[k] = -(cm_[k] + cp_[k]);
        double gm, gp;
        if (ball_) {
          int jm = (j + nt_ - 1) % nt_, jp = (j + 1) % nt_;
          gm = g.theta(j) - g.theta(jm) + (j == 0 ? 2 * pi : 0.0);
          gp = g.theta(jp) - g.theta(j) + (j == nt_ - 1 ? 2 * pi : 0.0);
        } else {
          gm = g.theta(j) - g.theta(j - 1);
          gp = g.theta(j + 1) - g.theta(j);
        }
        double al, ac, ar;
        d2_weights(gm, gp, al, ac, ar);
        am_[k] = al / (r * r);
        ap_[k] = ar / (r * r);
        cc_[k] += ac / (r * r);
      }
    if (has_center_) {
      center_coef_ = 4.0 / (g.r(0) * g.r(0));
      ring_w_.resize(nt_);
      for (int j = 0; j < nt_; ++j) ring_w_[j] = g.dtheta_cell(j) / (2 * pi);
    }
    int n = std::max(nr_, nt_);
    omega_ = 2.0 / (1.0 + std::sin(pi / n));
  }

  bool interior(int i, int j) const { return !g_->is_boundary(i, j); }

  /// Discrete Laplacian at an interior node of the field f (which must share
  /// this operator's geometry).
  double laplacian(const GridField& f, int i, int j) const {
    std::size_t k = idx(i, j);
    double um = (i == 0) ? (has_center_ ? f.center() : 0.0) : f.at(i - 1, j);
    double up = f.at(i + 1, j);
    double uam, uap;
    if (ball_) {
      uam = f.at(i, (j + nt_ - 1) % nt_);
      uap = f.at(i, (j + 1) % nt_);
    } else {
      uam = f.at(i, j - 1);
      uap = f.at(i, j + 1);
    }
    return cm_[k] * um + cp_[k] * up + am_[k] * uam + ap_[k] * uap + cc_[k] * f.at(i, j);
  }

  double center_laplacian(const GridField& f) const {
    double mean = 0;
    for (int j = 0; j < nt_; ++j) mean += ring_w_[j] * f.at(0, j);
    return center_coef_ * (mean - f.center());
  }

  /// Solves -Lap u = f by point SOR (lexicographic, deterministic); boundary
  /// nodes of u are Dirichlet data and stay fixed. Returns sweeps used.
  int solve(GridField& u, const GridField& f, double tol, int max_sweeps) const {
    double scale = 1e-30;
    for (double v : u.values()) scale = std::max(scale, std::abs(v));
    for (double v : f.values()) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1.0);
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
      double worst = 0;
      if (has_center_) {
        double mean = 0;
        for (int j = 0; j < nt_; ++j) mean += ring_w_[j] * u.at(0, j);
        double target = mean + f.center() / center_coef_;
        double nu_c = u.center() + omega_ * (target - u.center());
        worst = std::max(worst, std::abs(nu_c - u.center()));
        u.center() = nu_c;
      }
      for (int i = 0; i < nr_; ++i)
        for (int j = 0; j < nt_; ++j) {
          if (g_->is_boundary(i, j)) continue;
          std::size_t k = idx(i, j);
          double um = (i == 0) ? (has_center_ ? u.center() : 0.0) : u.at(i - 1, j);
          double up = u.at(i + 1, j);
          double uam, uap;
          if (ball_) {
            uam = u.at(i, (j + nt_ - 1) % nt_);
            uap = u.at(i, (j + 1) % nt_);
          } else {
            uam = u.at(i, j - 1);
            uap = u.at(i, j + 1);
          }
          double gs = -(f.at(i, j) + cm_[k] * um + cp_[k] * up + am_[k] * uam + ap_[k] * uap) / cc_[k];
          double nu = u.at(i, j) + omega_ * (gs - u.at(i, j));
          worst = std::max(worst, std::abs(nu - u.at(i, j)));
          u.at(i, j) = nu;
        }
      if (worst < tol * scale) return sweep;
    }
    fail("NonConvergence", "linear SOR solve did not reach tolerance");
  }

 private:
  std::size_t idx(int i, int j) const { return std::size_t(i) * nt_ + j; }

  const GridField* g_;
  int nr_ = 0, nt_ = 0;
  bool ball_ = false, has_center_ = false;
  std::vector<double> cm_, cp_, am_, ap_, cc_;
  double center_coef_ = 0, omega_ = 1.9;
  std::vector<double> ring_w_;
};

/// Gradient magnitude at the disk center from a least-squares linear fit over
/// the first ring.
inline double center_gradient_norm(const GridField& u) {
  double gx = 0, gy = 0;
  for (int j = 0; j < u.n_theta(); ++j) {
    double w = u.dtheta_cell(j) / pi;  // sum w cos^2 = 1 with this scaling
    double th = u.theta(j);
    double s = (u.at(0, j) - u.center()) / u.r(0);
    gx += w * s * std::cos(th);
    gy += w * s * std::sin(th);
  }
  return std::hypot(gx, gy);
}

}  // namespace detail

// ------------------------------------------------- boundary data assembly

/// Dirichlet data at the boundary nodes of the grid: density traces plus
/// mass-preserving cosine mollifications of the atoms (width = 4 local
/// boundary cells unless overridden). Interior entries are zero.
inline GridField boundary_node_data(const Domain& dom, const GridSpec& spec,
                                    const BoundaryMeasure& mu, double atom_width = 0) {
  GridField d(dom, spec);
  auto bump = [](double s, double W) {
    return (std::abs(s) < W / 2) ? (1.0 + std::cos(2 * pi * s / W)) / W : 0.0;
  };
  if (dom.kind == DomainKind::Ball) {
    int nr = d.n_r();
    for (int j = 0; j < d.n_theta(); ++j) {
      Vec2 s = d.point(nr - 1, j);
      double v = mu.has_density() ? mu.density(s) : 0.0;
      for (const auto& a : mu.atoms) {
        double phi_a = std::atan2(a.point.y, a.point.x);
        double W = atom_width;
        if (W <= 0) {
          // 4 local angular cells at the atom, in arc length
          double local = 2 * pi;
          for (int jj = 0; jj < d.n_theta(); ++jj) {
            double off = std::abs(std::remainder(d.theta(jj) - phi_a, 2 * pi));
            if (off < local) local = std::max(d.dtheta_cell(jj), 1e-12);
          }
          // recompute: pick the cell width of the nearest node
          double best = 1e30;
          int jn = 0;
          for (int jj = 0; jj < d.n_theta(); ++jj) {
            double off = std::abs(std::remainder(d.theta(jj) - phi_a, 2 * pi));
            if (off < best) {
              best = off;
              jn = jj;
            }
          }
          W = 4 * d.dtheta_cell(jn) * dom.R;
        }
        double arc = dom.R * std::remainder(d.theta(j) - phi_a, 2 * pi);
        v += a.mass * bump(arc, W);
      }
      d.at(nr - 1, j) = v;
    }
    if (spec.r_min > 0)
      for (int j = 0; j < d.n_theta(); ++j) d.at(0, j) = 0.0;  // annulus inner circle
    return d;
  }
  // Half disk (log-polar chart): flat sides at theta = 0 and pi, the outer
  // arc, and the inner chart floor which takes the continuous limit of the
  // data at the corner.
  int nr = d.n_r(), nt = d.n_theta();
  auto atom_contrib = [&](Vec2 p) {
    double v = 0;
    for (const auto& a : mu.atoms) {
      double W = atom_width > 0 ? atom_width : 0.1 * dom.R;
      if (a.point.norm() < 1e-12 * dom.R) {
        // corner atom: 1d bump along the diameter through the corner
        if (std::abs(p.y) < 1e-12 * dom.R) v += a.mass * bump(p.x, W);
      } else if (std::abs(a.point.y) < 1e-12 * dom.R) {
        if (std::abs(p.y) < 1e-12 * dom.R) v += a.mass * bump(p.x - a.point.x, W);
      } else {
        // atom on the arc: angular bump
        double phi_a = std::atan2(a.point.y, a.point.x);
        if (p.norm() > dom.R * (1 - 1e-9))
          v += a.mass * bump(dom.R * (std::atan2(p.y, p.x) - phi_a), W);
      }
    }
    return v;
  };
  auto data_at = [&](Vec2 p) {
    double v = mu.has_density() ? mu.density(p) : 0.0;
    return v + atom_contrib(p);
  };
  for (int i = 0; i < nr; ++i) {
    d.at(i, 0) = data_at(d.point(i, 0));
    d.at(i, nt - 1) = data_at(d.point(i, nt - 1));
  }
  for (int j = 0; j < nt; ++j) {
    d.at(nr - 1, j) = data_at(d.point(nr - 1, j));
    // chart floor: continuous extension of the corner value
    d.at(0, j) = data_at(Vec2{0.0, 0.0});
  }
  return d;
}

// --------------------------------------------------------------- main solve

namespace detail {

inline void fill_gradient(const GridField& u, GridField& gr, GridField& gt) {
  for (int i = 0; i < u.n_r(); ++i)
    for (int j = 0; j < u.n_theta(); ++j) {
      double a, b;
      u.gradient_at_node(i, j, a, b);
      gr.at(i, j) = a;
      gt.at(i, j) = b;
    }
  if (u.has_center()) {
    gr.center() = center_gradient_norm(u);
    gt.center() = 0.0;
  }
}

/// Shared damped-Picard driver: iterates u <- clip((1-theta) u + theta F(u))
/// where F resolves the linearized problem, until the relative update drops
/// below tolerance.
template <class StepFn>
inline void picard_drive(GridField& u, const GridField& lo, const GridField& hi, double lo_center,
                         double hi_center, const SolverConfig& cfg, const StepFn& step,
                         int& iters_out, double& update_out) {
  double theta = cfg.theta;
  double prev_update = std::numeric_limits<double>::infinity();
  double scale = 1.0;
  for (double v : hi.values()) scale = std::max(scale, std::abs(v));
  GridField next = u;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    step(u, next);  // next = F(u)
    double update = 0;
    for (std::size_t k = 0; k < u.values().size(); ++k) {
      double v = (1 - theta) * u.values()[k] + theta * next.values()[k];
      v = std::clamp(v, lo.values()[k], hi.values()[k]);
      update = std::max(update, std::abs(v - u.values()[k]));
      u.values()[k] = v;
    }
    if (u.has_center()) {
      double v = (1 - theta) * u.center() + theta * next.center();
      v = std::clamp(v, lo_center, hi_center);
      update = std::max(update, std::abs(v - u.center()));
      u.center() = v;
    }
    update /= scale;
    iters_out = it;
    update_out = update;
    if (update < cfg.tol_update) return;
    if (update > prev_update * 1.000001) theta = std::max(0.05, theta / 2);
    prev_update = update;
  }
  if (update_out > 1e3 * cfg.tol_update)
    fail("NonConvergence", "Picard update stagnated above tolerance");
}

}  // namespace detail

/// Discrete weak-form residual: the equation residual -Lap_h u + g(|grad u|)
/// paired against test functions zeta_k = xi b_k(theta), where xi is the
/// discrete torsion function (-Lap xi = 1, xi = 0 on the boundary) and b_k
/// are low angular modes. The measure pairing of the continuum identity is
/// absorbed by discrete summation by parts, so a converged discrete solution
/// scores at solver-tolerance level.
inline double weak_residual(const Solution& sol, int basis_size = 8) {
  const GridField& u = sol.u;
  detail::PolarOperator op(u);
  GridField xi(sol.dom, u.spec());
  GridField one(sol.dom, u.spec());
  for (int i = 0; i < u.n_r(); ++i)
    for (int j = 0; j < u.n_theta(); ++j) one.at(i, j) = op.interior(i, j) ? 1.0 : 0.0;
  if (u.has_center()) one.center() = 1.0;
  op.solve(xi, one, sol.cfg.lin_tol, sol.cfg.lin_max_sweeps);
  double xi_max = 1e-300;
  for (double v : xi.values()) xi_max = std::max(xi_max, std::abs(v));

  double worst = 0;
  for (int k = 0; k < basis_size; ++k) {
    auto bmode = [&](double th) {
      if (k == 0) return 1.0;
      int m = (k + 1) / 2;
      return (k % 2 == 1) ? std::cos(m * th) : std::sin(m * th);
    };
    double acc = 0;
    for (int i = 0; i < u.n_r(); ++i)
      for (int j = 0; j < u.n_theta(); ++j) {
        if (!op.interior(i, j)) continue;
        double res = -op.laplacian(u, i, j) + sol.law(sol.gradient_norm(i, j));
        double zeta = xi.at(i, j) * bmode(u.theta(j)) / xi_max;
        acc += zeta * res * u.cell_area(i, j);
      }
    if (u.has_center()) {
      double res = -op.center_laplacian(u) + sol.law(sol.grad_r.center());
      acc += (xi.center() / xi_max) * bmode(0.0) * res * u.center_cell_area();
    }
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

/// Solve -Lap u + g(|grad u|) = 0 with measure boundary data. Backend "fd":
/// write u = P_h + v with P_h the discrete harmonic extension of the
/// mollified data and iterate linear solves of -Lap v = -g(|grad(P_h + v)|)
/// under damped Picard, clipping to the sub/supersolution sandwich
/// [min(0, data), P_h]. Backend "picard": damped fixed point on the integral
/// representation u <- P[mu] - G[g(|grad u|)].
inline Solution solve_dirichlet(const Domain& dom, const AbsorptionLaw& law,
                                const BoundaryMeasure& mu, const SolverConfig& cfg = {}) {
  if (dom.N != 2) fail("UnsupportedDimension", "solver grids are two dimensional");
  Solution sol{dom,          GridField(dom, cfg.grid), GridField(dom, cfg.grid),
               GridField(dom, cfg.grid), GridField(dom, cfg.grid), law,
               mu,           std::nullopt,             cfg};
  bool atoms = !mu.atoms.empty();
  if (atoms && !law.subcritical_boundary) {
    sol.subcriticality_violated = true;
    if (!cfg.allow_supercritical)
      fail("SupercriticalAtoms",
           "atomic data with a non-subcritical law needs cfg.allow_supercritical");
  }

  GridField data = boundary_node_data(dom, cfg.grid, mu, cfg.atom_width);
  double data_min = 0;
  for (int i = 0; i < data.n_r(); ++i)
    for (int j = 0; j < data.n_theta(); ++j)
      if (data.is_boundary(i, j)) data_min = std::min(data_min, data.at(i, j));

  detail::PolarOperator op(sol.u);
  GridField zero(dom, cfg.grid);
  GridField ph = data;  // harmonic extension: data fixed, interior relaxed
  op.solve(ph, zero, cfg.lin_tol, cfg.lin_max_sweeps);
  sol.upper = ph;

  GridField lo(dom, cfg.grid);
  for (auto& v : lo.values()) v = data_min;
  if (lo.has_center()) lo.center() = data_min;

  sol.u = ph;
  if (!law.is_zero()) {
    if (cfg.backend == "picard") {
      GridField pk = apply_poisson(dom, mu, cfg.grid);  // exact-kernel linear part
      auto step = [&](const GridField& cur, GridField& out) {
        detail::fill_gradient(cur, sol.grad_r, sol.grad_t);
        GridField gsrc(dom, cfg.grid);
        for (int i = 0; i < cur.n_r(); ++i)
          for (int j = 0; j < cur.n_theta(); ++j)
            gsrc.at(i, j) = op.interior(i, j)
                                ? law(std::hypot(sol.grad_r.at(i, j), sol.grad_t.at(i, j)))
                                : 0.0;
        if (cur.has_center()) gsrc.center() = law(sol.grad_r.center());
        GridField gg = apply_green(dom, gsrc);
        for (std::size_t k = 0; k < out.values().size(); ++k)
          out.values()[k] = pk.values()[k] - gg.values()[k];
        if (out.has_center()) out.center() = pk.center() - gg.center();
      };
      detail::picard_drive(sol.u, lo, pk, lo.center(), pk.center(), cfg, step, sol.iterations,
                           sol.final_update);
      sol.upper = pk;
    } else if (cfg.backend == "fd") {
      GridField rhs(dom, cfg.grid);
      auto step = [&](const GridField& cur, GridField& out) {
        detail::fill_gradient(cur, sol.grad_r, sol.grad_t);
        for (int i = 0; i < cur.n_r(); ++i)
          for (int j = 0; j < cur.n_theta(); ++j)
            rhs.at(i, j) = op.interior(i, j)
                               ? -law(std::hypot(sol.grad_r.at(i, j), sol.grad_t.at(i, j)))
                               : 0.0;
        if (cur.has_center()) rhs.center() = -law(sol.grad_r.center());
        out = cur;  // warm start; boundary rows carry the data already
        op.solve(out, rhs, cfg.lin_tol, cfg.lin_max_sweeps);
      };
      detail::picard_drive(sol.u, lo, ph, lo.center(), ph.center(), cfg, step, sol.iterations,
                           sol.final_update);
    } else {
      fail("BadConfig", "backend must be 'fd' or 'picard'");
    }
  }
  detail::fill_gradient(sol.u, sol.grad_r, sol.grad_t);
  sol.weak_res = weak_residual(sol);
  return sol;
}

// ---------------------------------------------------------- exhaustion

struct ExhaustionResult {
  Solution solution;               ///< the solve at the smallest delta
  std::vector<double> sup_diffs;   ///< successive sup |u_{d_k} - u_{d_{k+1}}| at probes
  bool monotone = true;            ///< u nonincreasing as delta decreases
};

/// The maximal-solution construction: for each delta solve on the inner
/// domain {d > delta} with harmonic-extension data P[mu] on its boundary and
/// certify the decreasing limit on a fixed probe set. Ball domains only (the
/// inner parallel set of a ball is a ball).
inline ExhaustionResult solve_maximal_exhaustion(const Domain& dom, const AbsorptionLaw& law,
                                                 const BoundaryMeasure& mu,
                                                 const std::vector<double>& deltas,
                                                 const SolverConfig& cfg = {}) {
  if (dom.kind != DomainKind::Ball) fail("UnsupportedDomain", "exhaustion implemented on balls");
  if (deltas.empty()) fail("BadConfig", "need at least one delta");
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] > 0) || deltas[k] >= dom.flow_reach())
      fail("LevelTooDeep", "need 0 < delta < delta*");
    if (k > 0 && !(deltas[k] < deltas[k - 1])) fail("BadConfig", "deltas must decrease");
  }
  // fixed probe points inside the smallest domain
  double rmax = (dom.R - deltas.front()) * 0.9;
  std::vector<Vec2> probes;
  for (int a = 0; a < 12; ++a)
    for (int b = 1; b <= 4; ++b) {
      double rr = rmax * b / 4.0, th = 2 * pi * a / 12.0;
      probes.push_back({rr * std::cos(th), rr * std::sin(th)});
    }

  ExhaustionResult out{Solution{dom, GridField(dom, cfg.grid), GridField(dom, cfg.grid),
                                GridField(dom, cfg.grid), GridField(dom, cfg.grid), law, mu,
                                std::nullopt, cfg},
                       {},
                       true};
  std::vector<double> prev;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    Domain inner = Domain::ball(2, dom.R - deltas[k]);
    auto data_fn = [dom, mu](Vec2 s) { return poisson_value(dom, mu, s); };
    Solution sk = solve_dirichlet(inner, law, BoundaryMeasure::with_density(data_fn), cfg);
    std::vector<double> vals;
    double sup = 0;
    for (Vec2 p : probes) vals.push_back(sk.value_at(p));
    if (!prev.empty()) {
      for (std::size_t t = 0; t < probes.size(); ++t) {
        sup = std::max(sup, std::abs(prev[t] - vals[t]));
        if (vals[t] > prev[t] + 1e-6) out.monotone = false;
      }
      out.sup_diffs.push_back(sup);
    }
    prev = vals;
    if (k + 1 == deltas.size()) out.solution = std::move(sk);
  }
  if (!out.monotone) fail("MonotonicityViolation", "exhaustion iterates increased beyond tolerance");
  return out;
}

// -------------------------------------------------------- interior problem

/// Solve -Lap u + g(|grad u|) = nu with zero boundary data by damped Picard
/// on linear solves, clipped to [0, G_h[nu]].
inline Solution solve_interior(const Domain& dom, const AbsorptionLaw& law,
                               const InteriorMeasure& nu, const SolverConfig& cfg = {}) {
  if (dom.N != 2) fail("UnsupportedDimension", "solver grids are two dimensional");
  if (!nu.atoms.empty() && !law.subcritical_interior)
    fail("SubcriticalityViolated", "atomic interior data needs a subcritical-interior law");
  Solution sol{dom,          GridField(dom, cfg.grid), GridField(dom, cfg.grid),
               GridField(dom, cfg.grid), GridField(dom, cfg.grid), law,
               BoundaryMeasure::zero(),  std::make_optional(nu),   cfg};

  detail::PolarOperator op(sol.u);
  // nodal source: atoms into their nearest cell, density sampled
  GridField f(dom, cfg.grid);
  if (nu.has_density()) {
    for (int i = 0; i < f.n_r(); ++i)
      for (int j = 0; j < f.n_theta(); ++j)
        if (op.interior(i, j)) f.at(i, j) = nu.density(f.point(i, j));
    if (f.has_center()) f.center() = nu.density(Vec2{0, 0});
  }
  for (const auto& a : nu.atoms) {
    if (f.has_center() && a.point.norm() < f.r(0) / 2) {
      f.center() += a.mass / f.center_cell_area();
      continue;
    }
    int bi = 0, bj = 0;
    double best = 1e300;
    for (int i = 0; i < f.n_r(); ++i)
      for (int j = 0; j < f.n_theta(); ++j) {
        if (!op.interior(i, j)) continue;
        double dd = (f.point(i, j) - a.point).norm();
        if (dd < best) {
          best = dd;
          bi = i;
          bj = j;
        }
      }
    f.at(bi, bj) += a.mass / f.cell_area(bi, bj);
  }

  GridField gnu(dom, cfg.grid);
  op.solve(gnu, f, cfg.lin_tol, cfg.lin_max_sweeps);
  sol.upper = gnu;
  GridField lo(dom, cfg.grid);
  sol.u = gnu;
  if (!law.is_zero()) {
    GridField rhs(dom, cfg.grid);
    auto step = [&](const GridField& cur, GridField& out) {
      detail::fill_gradient(cur, sol.grad_r, sol.grad_t);
      for (int i = 0; i < cur.n_r(); ++i)
        for (int j = 0; j < cur.n_theta(); ++j)
          rhs.at(i, j) = op.interior(i, j)
                             ? f.at(i, j) - law(std::hypot(sol.grad_r.at(i, j), sol.grad_t.at(i, j)))
                             : 0.0;
      if (cur.has_center()) rhs.center() = f.center() - law(sol.grad_r.center());
      out = cur;
      op.solve(out, rhs, cfg.lin_tol, cfg.lin_max_sweeps);
    };
    detail::picard_drive(sol.u, lo, gnu, 0.0, gnu.center(), cfg, step, sol.iterations,
                         sol.final_update);
  }
  detail::fill_gradient(sol.u, sol.grad_r, sol.grad_t);
  return sol;
}

// ------------------------------------------------------------- Hopf-Cole

struct HopfColeResult {
  Solution transform;   ///< u = ln P[mu], with gradient fields
  Solution generic;     ///< the Power(2) solver run on data ln(density)
  double sup_difference = 0;
};

/// For q = 2 the substitution v = e^{-u} linearizes the equation (v is
/// harmonic and positive when u is bounded below), so the solution with
/// Dirichlet data ln(phi) is u = -ln P[1/phi], phi the density of mu. The
/// transform output and the generic Power(2) run agree up to discretization.
inline HopfColeResult solve_hopf_cole(const Domain& dom, const BoundaryMeasure& mu,
                                      const SolverConfig& cfg = {}) {
  if (!mu.has_density() || !mu.atoms.empty())
    fail("DensityNotBoundedBelow", "Hopf-Cole needs pure density data");
  auto probe = level_surface(dom, 0.0, 512);
  for (Vec2 s : probe.nodes)
    if (!(mu.density(s) > 1e-12)) fail("DensityNotBoundedBelow", "density must be >= c > 0");

  HopfColeResult out{Solution{dom, GridField(dom, cfg.grid), GridField(dom, cfg.grid),
                              GridField(dom, cfg.grid), GridField(dom, cfg.grid),
                              AbsorptionLaw::power(2.0), mu, std::nullopt, cfg},
                     Solution{dom, GridField(dom, cfg.grid), GridField(dom, cfg.grid),
                              GridField(dom, cfg.grid), GridField(dom, cfg.grid),
                              AbsorptionLaw::power(2.0), mu, std::nullopt, cfg},
                     0.0};
  auto invdens = [mu](Vec2 s) { return 1.0 / mu.density(s); };
  GridField p = apply_poisson(dom, BoundaryMeasure::with_density(invdens), cfg.grid);
  out.transform.u = p;
  for (auto& v : out.transform.u.values()) v = -std::log(v);
  if (p.has_center()) out.transform.u.center() = -std::log(p.center());
  detail::fill_gradient(out.transform.u, out.transform.grad_r, out.transform.grad_t);
  out.transform.upper = out.transform.u;

  auto logdens = [mu](Vec2 s) { return std::log(mu.density(s)); };
  out.generic = solve_dirichlet(dom, AbsorptionLaw::power(2.0),
                                BoundaryMeasure::with_density(logdens), cfg);
  double sup = 0;
  for (std::size_t k = 0; k < p.values().size(); ++k)
    sup = std::max(sup, std::abs(out.generic.u.values()[k] - out.transform.u.values()[k]));
  if (p.has_center())
    sup = std::max(sup, std::abs(out.generic.u.center() - out.transform.u.center()));
  out.sup_difference = sup;
  return out;
}

// --------------------------------------------------------- q = 1 scaling

/// Solves with data delta_z and ell delta_z under the q = 1 law and returns
/// the relative homogeneity defect sup|u_{ell} - ell u| / sup|u_{ell}|. The
/// discrete scheme is positively homogeneous, so the defect sits at solver
/// tolerance.
inline std::pair<Solution, double> q1_solve_and_scale(const Domain& dom, Vec2 z, double ell,
                                                      const SolverConfig& cfg = {}) {
  if (!(ell > 0)) fail("BadConfig", "need ell > 0");
  AbsorptionLaw law = AbsorptionLaw::power(1.0);
  Solution u1 = solve_dirichlet(dom, law, BoundaryMeasure::atom(z, 1.0), cfg);
  Solution u2 = solve_dirichlet(dom, law, BoundaryMeasure::atom(z, ell), cfg);
  double sup = 0, err = 0;
  for (std::size_t k = 0; k < u1.u.values().size(); ++k) {
    sup = std::max(sup, std::abs(u2.u.values()[k]));
    err = std::max(err, std::abs(u2.u.values()[k] - ell * u1.u.values()[k]));
  }
  if (u1.u.has_center()) {
    sup = std::max(sup, std::abs(u2.u.center()));
    err = std::max(err, std::abs(u2.u.center() - ell * u1.u.center()));
  }
  return {std::move(u2), sup > 0 ? err / sup : 0.0};
}

}  // namespace singlab
