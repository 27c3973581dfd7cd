#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace singlab {

inline constexpr double pi = std::numbers::pi;

/// Error with a stable machine-readable code, thrown on precondition violations.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& what) {
  throw Error(code, what);
}

struct Vec2 {
  double x = 0, y = 0;

  Vec2 operator+(Vec2 b) const { return {x + b.x, y + b.y}; }
  Vec2 operator-(Vec2 b) const { return {x - b.x, y - b.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 b) const { return x * b.x + y * b.y; }
  double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(Vec3 b) const { return {x + b.x, y + b.y, z + b.z}; }
  Vec3 operator-(Vec3 b) const { return {x - b.x, y - b.y, z - b.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(Vec3 b) const { return x * b.x + y * b.y + z * b.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// ---- small numerics helpers shared across modules ----

/// Least-squares slope of log(y) against log(x); pairs with y <= 0 are skipped.
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) fail("DegenerateFit", "need at least two positive samples for a log-log slope");
  double d = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / d;
}

/// R^2 of the same log-log fit.
inline double log_log_r2(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  std::size_t n = lx.size();
  if (n < 3) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
    syy += ly[i] * ly[i];
  }
  double cov = n * sxy - sx * sy;
  double vx = n * sxx - sx * sx;
  double vy = n * syy - sy * sy;
  if (vx <= 0 || vy <= 0) return 1.0;
  return cov * cov / (vx * vy);
}

/// Fit f(t) = c + a t^s on a geometric sweep t_k = t0 rho^k and return the
/// extrapolated limit c. Uses the last three samples (Richardson with unknown
/// order), falling back to the last sample when the fitted order is unusable.
inline double richardson_limit(const std::vector<double>& t, const std::vector<double>& f) {
  std::size_t n = f.size();
  if (n < 3) return f.empty() ? 0.0 : f.back();
  double f0 = f[n - 3], f1 = f[n - 2], f2 = f[n - 1];
  double d01 = f1 - f0, d12 = f2 - f1;
  if (d01 == 0.0 || d12 == 0.0 || d12 / d01 <= 0 || d12 / d01 >= 1) return f2;
  double r = d12 / d01;  // = rho^s for geometric t
  (void)t;
  return f2 + d12 * r / (1 - r);
}

/// Centered 3-point second-derivative weights on a nonuniform stencil
/// {x-hm, x, x+hp}: f'' ~ wl f(x-hm) + wc f(x) + wr f(x+hp).
inline void d2_weights(double hm, double hp, double& wl, double& wc, double& wr) {
  wl = 2.0 / (hm * (hm + hp));
  wr = 2.0 / (hp * (hm + hp));
  wc = -(wl + wr);
}

/// Centered 3-point first-derivative weights on the same stencil.
inline void d1_weights(double hm, double hp, double& wl, double& wc, double& wr) {
  wl = -hp / (hm * (hm + hp));
  wr = hm / (hp * (hm + hp));
  wc = -(wl + wr);
}

/// Catmull-Rom interpolation of samples y on strictly increasing nodes x.
/// Clamped to the node range; degrades to linear near the ends.
inline double interp_cubic(const std::vector<double>& x, const std::vector<double>& y, double t) {
  std::size_t n = x.size();
  if (n == 0) fail("EmptyTable", "interp_cubic on empty table");
  if (n == 1) return y[0];
  if (t <= x.front()) t = x.front();
  if (t >= x.back()) t = x.back();
  std::size_t i = 0;
  {
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (x[mid] <= t)
        lo = mid;
      else
        hi = mid;
    }
    i = lo;
  }
  double h = x[i + 1] - x[i];
  double u = (t - x[i]) / h;
  if (i == 0 || i + 2 >= n) return y[i] * (1 - u) + y[i + 1] * u;
  // slopes from the neighboring nodes (nonuniform Catmull-Rom)
  double m0 = (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]) * h;
  double m1 = (y[i + 2] - y[i]) / (x[i + 2] - x[i]) * h;
  double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y[i] + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * y[i + 1] +
         (u3 - u2) * m1;
}

}  // namespace singlab
