#pragma once

#include <cmath>
#include <vector>

#include "singlab/common.hpp"

namespace singlab {

/// All exponents derived from (N, q) for the gradient absorption law
/// g(s) = s^q with 1 < q < 2.
struct ExponentPack {
  int N = 2;
  double q = 0;
  double beta = 0;        ///< (2-q)/(q-1), the singular decay rate
  double q_conj = 0;      ///< q/(q-1)
  double q_c = 0;         ///< (N+1)/N, boundary critical exponent
  double lambda_coeff = 0;///< beta * (q/(q-1) - N), zeroth-order ODE coefficient
  double q_star = 0;      ///< N/(N-1), interior critical exponent
};

inline ExponentPack exponents(int N, double q) {
  if (N < 2) fail("UnsupportedDimension", "need N >= 2");
  if (!(q > 1.0 && q < 2.0)) fail("QOutOfRange", "need 1 < q < 2");
  ExponentPack e;
  e.N = N;
  e.q = q;
  e.beta = (2 - q) / (q - 1);
  e.q_conj = q / (q - 1);
  e.q_c = double(N + 1) / N;
  e.lambda_coeff = e.beta * (e.q_conj - N);
  e.q_star = double(N) / (N - 1);
  return e;
}

/// Coefficient of the radial separable singular solution
/// U_S(x) = Lambda |x|^{-(2-q)/(q-1)}, valid for 1 < q < N/(N-1).
inline double radial_constant(int N, double q) {
  if (!(q > 1.0)) fail("QOutOfRange", "need q > 1");
  if (!(q < double(N) / (N - 1)))
    fail("ExponentOutOfRange", "radial solution needs q < N/(N-1)");
  double qp = q / (q - 1);
  double a = std::pow((q - 1) / (2 - q), qp);
  double b = std::pow((2 - q) * (N - (N - 1) * q) / ((q - 1) * (q - 1)), 1.0 / (q - 1));
  return a * b;
}

/// Evaluates -Lap U + |grad U|^q on U = Lambda r^{-beta} at the given radii
/// and returns the sup of |residual|; cancels to rounding error when Lambda
/// is the radial constant.
inline double radial_singular_residual(int N, double q, const std::vector<double>& radii,
                                       double lambda_override = -1.0) {
  long double lam;
  if (lambda_override > 0) {
    lam = lambda_override;
  } else {
    radial_constant(N, q);  // validate the range
    // recompute the constant in extended precision: the cancellation below is
    // only visible when Lambda carries fewer than ~1e-16 relative error
    long double lq = q;
    long double a = std::pow((lq - 1) / (2 - lq), lq / (lq - 1));
    long double b = std::pow((2 - lq) * (N - (N - 1) * lq) / ((lq - 1) * (lq - 1)), 1 / (lq - 1));
    lam = a * b;
  }
  long double beta = (2.0L - (long double)q) / ((long double)q - 1.0L);
  long double sup = 0;
  for (double r : radii) {
    if (!(r > 0)) fail("QOutOfRange", "radii must be positive");
    // U = lam r^-beta: Lap U = lam beta (beta + 2 - N) r^{-beta-2},
    // |U'| = lam beta r^{-beta-1}; extended precision keeps the analytic
    // cancellation visible at small radii
    long double lap = lam * beta * (beta + 2 - N) * std::pow((long double)r, -beta - 2);
    long double grad_q = std::pow(lam * beta * std::pow((long double)r, -beta - 1), (long double)q);
    sup = std::max(sup, std::abs(-lap + grad_q));
  }
  return double(sup);
}

/// The explicit constant of the universal bound u <= C4(q) |x|^{-(2-q)/(q-1)}.
inline double keller_osserman_constant(double q) {
  if (!(q > 1.0 && q < 2.0)) fail("QOutOfRange", "need 1 < q < 2");
  return std::pow(q - 1, (q - 2) / (q - 1)) / (2 - q);
}

/// True iff the integral identity against the first hemisphere eigenfunction
/// obstructs a nontrivial separable profile: N-1 >= beta (q/(q-1) - N),
/// equivalently q >= (N+1)/N.
inline bool existence_obstruction(int N, double q) {
  ExponentPack e = exponents(N, q);
  return double(N - 1) >= e.lambda_coeff;
}

// ---- point / small-ball Bessel capacity criteria ----

enum class CapacitySetKind { Point, Ball };

struct CapacityQuery {
  double alpha = 0;    ///< smoothness index
  double p = 0;        ///< integrability exponent
  int ambient_dim = 0; ///< dimension the capacity lives in
  CapacitySetKind set_kind = CapacitySetKind::Point;
  double radius = 0;   ///< for Ball queries
};

struct CapacityVerdict {
  bool zero = false;          ///< capacity of the set (limit for shrinking balls) is zero
  double scaling_exponent = 0;///< C_{alpha,p}(B_rho) ~ rho^{dim - alpha p} for alpha p < dim
};

/// Classical scaling criterion for the Bessel capacity C_{alpha,p}:
/// a point is a null set iff alpha p <= dim, and C(B_rho) scales like
/// rho^{dim - alpha p} (with a logarithmic correction at equality).
inline CapacityVerdict point_capacity_zero(const CapacityQuery& query) {
  if (!(query.alpha > 0) || !(query.p > 1) || query.ambient_dim < 1)
    fail("BadCapacityQuery", "need alpha > 0, p > 1, ambient_dim >= 1");
  CapacityVerdict v;
  double ap = query.alpha * query.p;
  v.scaling_exponent = query.ambient_dim - ap;
  v.zero = ap <= double(query.ambient_dim) + 1e-14;
  return v;
}

/// Convenience: the boundary-capacity family C_{(2-q)/q, q'} in dimension N-1.
inline CapacityQuery boundary_capacity_query(int N, double q) {
  return {(2 - q) / q, q / (q - 1), N - 1, CapacitySetKind::Point, 0};
}

/// Convenience: the interior-capacity family C_{1, q'} in dimension N.
inline CapacityQuery interior_capacity_query(int N, double q) {
  return {1.0, q / (q - 1), N, CapacitySetKind::Point, 0};
}

}  // namespace singlab
