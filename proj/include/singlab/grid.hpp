#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "singlab/common.hpp"
#include "singlab/domain.hpp"

namespace singlab {

/// Polar tensor grid parameters. The grading ratio is the per-step geometric
/// ratio of spacings toward the singular anchor (radially toward the outer
/// boundary and angularly toward the anchor angle for the ball); 1.0 means
/// uniform. Total compression is capped so extreme ratios stay usable at any
/// resolution.
struct GridSpec {
  int n_r = 64;
  int n_theta = 64;
  double grading = 0.9;
  double r_min = 0;  ///< inner radius: >0 makes an annulus (ball) / log chart floor (half disk)

  GridSpec refined(int factor = 2) const {
    GridSpec s = *this;
    s.n_r *= factor;
    s.n_theta *= factor;
    return s;
  }
};

namespace detail {

/// Spacings h_j = C rho^j, j = 0..m-1, summing to `range`; effective ratio is
/// clamped so min/max spacing never drops below `cap`.
inline std::vector<double> graded_spacings(double range, int m, double rho, double cap = 1e-4) {
  std::vector<double> h(m);
  double eff = rho;
  if (m > 1 && rho < 1.0) eff = std::max(rho, std::pow(cap, 1.0 / (m - 1)));
  if (eff >= 1.0) {
    std::fill(h.begin(), h.end(), range / m);
    return h;
  }
  double c = range * (1 - eff) / (1 - std::pow(eff, m));
  for (int j = 0; j < m; ++j) h[j] = c * std::pow(eff, j);
  return h;
}

}  // namespace detail

/// Scalar samples on a polar tensor grid over a canonical domain. The chart
/// center is the ball center or the half-disk corner; world coordinates are
/// x = (r cos th, r sin th).
class GridField {
 public:
  GridField() = default;

  GridField(const Domain& dom, const GridSpec& spec) : dom_(dom), spec_(spec) {
    if (dom.N != 2) fail("UnsupportedDimension", "grids are two dimensional");
    if (spec.n_r < 16 || spec.n_theta < 16) fail("GridTooCoarse", "need at least 16x16 nodes");
    build_nodes();
    v_.assign(std::size_t(spec_.n_r) * spec_.n_theta, 0.0);
  }

  const Domain& domain() const { return dom_; }
  const GridSpec& spec() const { return spec_; }
  int n_r() const { return spec_.n_r; }
  int n_theta() const { return spec_.n_theta; }
  double r(int i) const { return r_[i]; }
  double theta(int j) const { return th_[j]; }
  const std::vector<double>& radii() const { return r_; }
  const std::vector<double>& angles() const { return th_; }

  bool has_center() const { return has_center_; }
  double& center() { return center_; }
  double center() const { return center_; }

  double& at(int i, int j) { return v_[std::size_t(i) * spec_.n_theta + j]; }
  double at(int i, int j) const { return v_[std::size_t(i) * spec_.n_theta + j]; }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  Vec2 point(int i, int j) const {
    return {r_[i] * std::cos(th_[j]), r_[i] * std::sin(th_[j])};
  }

  bool periodic_theta() const { return dom_.kind == DomainKind::Ball; }

  /// True for nodes where Dirichlet data lives (outer circle; for the half
  /// disk also the flat sides and the inner chart floor; for an annulus the
  /// inner circle).
  bool is_boundary(int i, int j) const {
    if (i == spec_.n_r - 1) return true;
    if (dom_.kind == DomainKind::HalfDisk)
      return i == 0 || j == 0 || j == spec_.n_theta - 1;
    return spec_.r_min > 0 && i == 0;
  }

  /// Quadrature weight of the cell around node (i,j); cells tile the domain
  /// (up to the negligible r < r_min sliver of the half-disk chart).
  double cell_area(int i, int j) const {
    double e0 = (i == 0) ? inner_edge_ : 0.5 * (r_[i - 1] + r_[i]);
    double e1 = (i == spec_.n_r - 1) ? dom_.R : 0.5 * (r_[i] + r_[i + 1]);
    return 0.5 * (e1 * e1 - e0 * e0) * dtheta_cell(j);
  }

  double center_cell_area() const {
    return has_center_ ? pi * inner_edge_ * inner_edge_ : 0.0;
  }

  double dtheta_cell(int j) const {
    int nt = spec_.n_theta;
    if (periodic_theta()) {
      double lo = 0.5 * (th_[j] + th_[(j + nt - 1) % nt] + (j == 0 ? -2 * pi : 0.0));
      double hi = 0.5 * (th_[j] + th_[(j + 1) % nt] + (j == nt - 1 ? 2 * pi : 0.0));
      return hi - lo;
    }
    double lo = (j == 0) ? th_[0] : 0.5 * (th_[j - 1] + th_[j]);
    double hi = (j == nt - 1) ? th_[nt - 1] : 0.5 * (th_[j] + th_[j + 1]);
    return hi - lo;
  }

  /// Bicubic (tensor Catmull-Rom) interpolation at a world point.
  double value_at(Vec2 x) const {
    double rr = x.norm();
    double th = std::atan2(x.y, x.x);
    return value_at_polar(rr, th);
  }

  double value_at_polar(double rr, double th) const {
    int nt = spec_.n_theta;
    if (rr > r_.back() * (1 + 1e-12)) fail("OutOfGrid", "point beyond outer radius");
    rr = std::min(rr, r_.back());
    if (!periodic_theta()) {
      if (th < th_.front() - 1e-12 || th > th_.back() + 1e-12)
        fail("OutOfGrid", "angle outside half-disk chart");
      th = std::clamp(th, th_.front(), th_.back());
    } else {
      while (th < th_.front()) th += 2 * pi;
      while (th >= th_.front() + 2 * pi) th -= 2 * pi;
    }
    if (rr < r_.front()) {
      if (!has_center_) fail("OutOfGrid", "point below inner radius");
    }
    // angular stencil
    int j = angle_cell(th);
    double line[4];
    int jj[4];
    double tt[4];
    for (int k = 0; k < 4; ++k) {
      int raw = j - 1 + k;
      if (periodic_theta()) {
        int wrapped = ((raw % nt) + nt) % nt;
        jj[k] = wrapped;
        tt[k] = th_[wrapped] + 2 * pi * std::floor(double(raw) / nt);
        // express relative to th_ front window
        tt[k] = th_[wrapped] + 2 * pi * ((raw < 0) ? -1 : (raw >= nt ? 1 : 0));
      } else {
        jj[k] = std::clamp(raw, 0, nt - 1);
        tt[k] = th_[jj[k]] + (raw < 0 ? -1e-9 : (raw >= nt ? 1e-9 : 0));
      }
    }
    for (int k = 0; k < 4; ++k) line[k] = radial_interp(jj[k], rr);
    return cr4(tt, line, th);
  }

  /// Centered second-order gradient in polar components (u_r, u_th / r).
  /// One-sided second-order at chart edges.
  void gradient_at_node(int i, int j, double& gr, double& gt) const {
    gr = d_r(i, j);
    gt = d_theta(i, j) / r_[i];
  }

  /// Discrete Laplacian at an interior node (nonuniform 3-point stencils).
  double laplacian_at_node(int i, int j) const {
    int nt = spec_.n_theta;
    if (i >= spec_.n_r - 1) fail("OutOfGrid", "laplacian needs an interior node");
    double um, uc = at(i, j), up;
    double hm, hp;
    if (i == 0) {
      if (!has_center_) fail("OutOfGrid", "laplacian at inner edge");
      um = center_;
      hm = r_[0];
    } else {
      um = at(i - 1, j);
      hm = r_[i] - r_[i - 1];
    }
    up = at(i + 1, j);
    hp = r_[i + 1] - r_[i];
    double wl, wc, wr, vl, vc, vr;
    d2_weights(hm, hp, wl, wc, wr);
    d1_weights(hm, hp, vl, vc, vr);
    double urr = wl * um + wc * uc + wr * up;
    double ur = vl * um + vc * uc + vr * up;
    // angular part
    double am, ap, gm, gp;
    if (periodic_theta()) {
      int jm = (j + nt - 1) % nt, jp = (j + 1) % nt;
      am = at(i, jm);
      ap = at(i, jp);
      gm = th_[j] - th_[jm] + (j == 0 ? 2 * pi : 0.0);
      gp = th_[jp] - th_[j] + (j == nt - 1 ? 2 * pi : 0.0);
    } else {
      if (j == 0 || j == nt - 1) fail("OutOfGrid", "laplacian needs an interior node");
      am = at(i, j - 1);
      ap = at(i, j + 1);
      gm = th_[j] - th_[j - 1];
      gp = th_[j + 1] - th_[j];
    }
    d2_weights(gm, gp, wl, wc, wr);
    double utt = wl * am + wc * uc + wr * ap;
    return urr + ur / r_[i] + utt / (r_[i] * r_[i]);
  }

  // ---- CSV serialization ----

  void write_csv(const std::string& path, const std::string& label = "") const {
    std::ofstream out(path);
    if (!out) fail("IoError", "cannot open " + path);
    out << "# domain=" << (dom_.kind == DomainKind::Ball ? "Ball" : "HalfDisk")
        << " N=" << dom_.N << " R=" << dom_.R << " n_r=" << spec_.n_r
        << " n_theta=" << spec_.n_theta << " grading=" << spec_.grading
        << " r_min=" << spec_.r_min;
    if (!label.empty()) out << " " << label;
    out << "\n";
    out << "r,theta,value\n";
    out.precision(17);
    for (int i = 0; i < spec_.n_r; ++i)
      for (int j = 0; j < spec_.n_theta; ++j)
        out << r_[i] << "," << th_[j] << "," << at(i, j) << "\n";
  }

 private:
  void build_nodes() {
    int nr = spec_.n_r, nt = spec_.n_theta;
    r_.resize(nr);
    th_.resize(nt);
    if (dom_.kind == DomainKind::Ball) {
      double rho = spec_.grading;
      double lo = spec_.r_min;
      if (lo > 0) {
        // annulus: nodes from r_min to R; spacings decrease toward R
        auto h = detail::graded_spacings(dom_.R - lo, nr - 1, rho);
        r_[0] = lo;
        for (int i = 1; i < nr; ++i) r_[i] = r_[i - 1] + h[i - 1];
        r_[nr - 1] = dom_.R;
        has_center_ = false;
        inner_edge_ = lo;
      } else {
        // full disk: first node a half spacing out from the center node,
        // spacings decreasing toward the boundary
        auto h = detail::graded_spacings(dom_.R, nr, rho);
        r_[0] = 0.5 * h[0];
        for (int i = 1; i < nr; ++i) r_[i] = r_[i - 1] + 0.5 * (h[i - 1] + h[i]);
        double scale = dom_.R / r_[nr - 1];
        for (auto& rr : r_) rr *= scale;
        has_center_ = true;
        inner_edge_ = 0.5 * r_[0];
      }
      // angles: symmetric geometric grading toward the anchor angle on both
      // sides; nodes wrap the full circle starting opposite the anchor
      double a0 = dom_.anchor_angle();
      if (nt % 2 != 0) fail("GridTooCoarse", "ball grids need an even angular count");
      int half = nt / 2;
      auto h = detail::graded_spacings(pi, half, spec_.grading);
      std::vector<double> offs(half + 1);
      // build from the anchor outward: spacing h[half-1] nearest the anchor
      offs[0] = 0;
      for (int k = 1; k <= half; ++k) offs[k] = offs[k - 1] + h[half - k];
      double scale = pi / offs[half];
      for (auto& o : offs) o *= scale;
      // assemble sorted angles in [a0, a0 + 2 pi): anchor node first, then
      // ascending side, far node, then descending side mapped above a0 + pi
      std::vector<double> ang;
      ang.reserve(nt);
      for (int k = 0; k < half; ++k) ang.push_back(a0 + offs[k]);
      for (int k = half; k >= 1; --k) ang.push_back(a0 + 2 * pi - offs[k]);
      // the far node (offset pi) appears once; sizes: half + half = nt
      std::sort(ang.begin(), ang.end());
      for (int j = 0; j < nt; ++j) th_[j] = ang[j];
    } else {
      // half disk: log-radial chart, uniform in t = ln r and theta in [0, pi]
      double lo = spec_.r_min > 0 ? spec_.r_min : dom_.R * 1e-4;
      double t0 = std::log(lo), t1 = std::log(dom_.R);
      for (int i = 0; i < nr; ++i) r_[i] = std::exp(t0 + (t1 - t0) * i / (nr - 1));
      r_[nr - 1] = dom_.R;
      for (int j = 0; j < nt; ++j) th_[j] = pi * j / (nt - 1);
      has_center_ = false;
      inner_edge_ = lo;
      spec_.r_min = lo;
    }
  }

  int angle_cell(double th) const {
    // largest j with th_[j] <= th (periodic callers pre-wrap)
    int nt = spec_.n_theta;
    int lo = 0, hi = nt - 1;
    if (th < th_[0]) return periodic_theta() ? nt - 1 : 0;
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      if (th_[mid] <= th)
        lo = mid;
      else
        hi = mid;
    }
    return lo;
  }

  double radial_interp(int j, double rr) const {
    int nr = spec_.n_r;
    // radial node table extended by the center value when present
    if (has_center_ && rr <= r_[0]) {
      // linear between center and first ring
      double u = rr / r_[0];
      return center_ * (1 - u) + at(0, j) * u;
    }
    int lo = 0, hi = nr - 1;
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      if (r_[mid] <= rr)
        lo = mid;
      else
        hi = mid;
    }
    double xs[4], ys[4];
    for (int k = 0; k < 4; ++k) {
      int ii = std::clamp(lo - 1 + k, 0, nr - 1);
      xs[k] = r_[ii] + (lo - 1 + k < 0 ? -1e-9 : (lo - 1 + k >= nr ? 1e-9 : 0));
      ys[k] = at(ii, j);
    }
    return cr4(xs, ys, rr);
  }

  /// Nonuniform 4-point Catmull-Rom on nodes xs (ascending), degrades to
  /// linear when the stencil collapses.
  static double cr4(const double* xs, const double* ys, double t) {
    double h = xs[2] - xs[1];
    if (!(h > 0)) return ys[1];
    double u = (t - xs[1]) / h;
    u = std::clamp(u, 0.0, 1.0);
    double m0, m1;
    if (xs[2] - xs[0] > 0 && xs[1] > xs[0])
      m0 = (ys[2] - ys[0]) / (xs[2] - xs[0]) * h;
    else
      m0 = ys[2] - ys[1];
    if (xs[3] - xs[1] > 0 && xs[3] > xs[2])
      m1 = (ys[3] - ys[1]) / (xs[3] - xs[1]) * h;
    else
      m1 = ys[2] - ys[1];
    double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * ys[1] + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * ys[2] +
           (u3 - u2) * m1;
  }

  double d_r(int i, int j) const {
    int nr = spec_.n_r;
    if (i == nr - 1) {
      // one-sided second order at the outer boundary
      double h1 = r_[i] - r_[i - 1], h2 = r_[i - 1] - r_[i - 2];
      double a = (2 * h1 + h2) / (h1 * (h1 + h2));
      double b = -(h1 + h2) / (h1 * h2);
      double c = h1 / (h2 * (h1 + h2));
      return a * at(i, j) + b * at(i - 1, j) + c * at(i - 2, j);
    }
    double um, hm;
    if (i == 0) {
      if (has_center_) {
        um = center_;
        hm = r_[0];
      } else {
        double h1 = r_[1] - r_[0], h2 = r_[2] - r_[1];
        double a = -(2 * h1 + h2) / (h1 * (h1 + h2));
        double b = (h1 + h2) / (h1 * h2);
        double c = -h1 / (h2 * (h1 + h2));
        return a * at(0, j) + b * at(1, j) + c * at(2, j);
      }
    } else {
      um = at(i - 1, j);
      hm = r_[i] - r_[i - 1];
    }
    double hp = r_[i + 1] - r_[i];
    double wl, wc, wr;
    d1_weights(hm, hp, wl, wc, wr);
    return wl * um + wc * at(i, j) + wr * at(i + 1, j);
  }

  double d_theta(int i, int j) const {
    int nt = spec_.n_theta;
    if (periodic_theta()) {
      int jm = (j + nt - 1) % nt, jp = (j + 1) % nt;
      double gm = th_[j] - th_[jm] + (j == 0 ? 2 * pi : 0.0);
      double gp = th_[jp] - th_[j] + (j == nt - 1 ? 2 * pi : 0.0);
      double wl, wc, wr;
      d1_weights(gm, gp, wl, wc, wr);
      return wl * at(i, jm) + wc * at(i, j) + wr * at(i, jp);
    }
    if (j == 0) {
      double h1 = th_[1] - th_[0], h2 = th_[2] - th_[1];
      double a = -(2 * h1 + h2) / (h1 * (h1 + h2));
      double b = (h1 + h2) / (h1 * h2);
      double c = -h1 / (h2 * (h1 + h2));
      return a * at(i, 0) + b * at(i, 1) + c * at(i, 2);
    }
    if (j == nt - 1) {
      double h1 = th_[nt - 1] - th_[nt - 2], h2 = th_[nt - 2] - th_[nt - 3];
      double a = (2 * h1 + h2) / (h1 * (h1 + h2));
      double b = -(h1 + h2) / (h1 * h2);
      double c = h1 / (h2 * (h1 + h2));
      return a * at(i, nt - 1) + b * at(i, nt - 2) + c * at(i, nt - 3);
    }
    double gm = th_[j] - th_[j - 1], gp = th_[j + 1] - th_[j];
    double wl, wc, wr;
    d1_weights(gm, gp, wl, wc, wr);
    return wl * at(i, j - 1) + wc * at(i, j) + wr * at(i, j + 1);
  }

  Domain dom_;
  GridSpec spec_;
  std::vector<double> r_, th_, v_;
  bool has_center_ = false;
  double center_ = 0;
  double inner_edge_ = 0;
};

}  // namespace singlab
