#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "singlab/solver.hpp"

using namespace singlab;

namespace {

double smooth_density(Vec2 s) {
  double th = std::atan2(s.y, s.x);
  return 1.0 + 0.5 * std::cos(th) + 0.3 * std::sin(2 * th);
}

SolverConfig quick(int n, double grading = 1.0) {
  SolverConfig c;
  c.grid = {n, n, grading, 0};
  return c;
}

}  // namespace

TEST_CASE("absorption laws: evaluation and subcriticality flags") {
  auto p = AbsorptionLaw::power(1.25, 2);
  CHECK(p(0.0) == 0.0);
  CHECK(p(2.0) == Catch::Approx(std::pow(2.0, 1.25)).epsilon(1e-14));
  CHECK(p.subcritical_boundary);   // 1.25 < 3/2
  CHECK(p.subcritical_interior);   // 1.25 < 2

  CHECK_FALSE(AbsorptionLaw::power(1.6, 2).subcritical_boundary);
  CHECK(AbsorptionLaw::power(1.6, 2).subcritical_interior);
  CHECK_FALSE(AbsorptionLaw::power(1.4, 3).subcritical_boundary);  // 1.4 > 4/3
  CHECK(AbsorptionLaw::power(1.3, 3).subcritical_boundary);

  auto t = AbsorptionLaw::truncated_power(1.8, 5.0, 2);
  CHECK(t(100.0) == 5.0);
  CHECK(t(1.0) == 1.0);
  CHECK(t.subcritical_boundary);  // truncation restores admissibility
  CHECK(t.subcritical_interior);

  auto c = AbsorptionLaw::custom({0.0, 1.0, 2.0}, {0.0, 1.0, 1.5});
  CHECK(c(0.5) == Catch::Approx(0.5));
  CHECK(c(1.5) == Catch::Approx(1.25));
  CHECK(c(4.0) == Catch::Approx(1.5 + 0.5 * 2.0));  // linear extension
  CHECK(c.subcritical_boundary);
  CHECK(c.subcritical_interior);

  CHECK(AbsorptionLaw::zero().is_zero());
  CHECK_FALSE(p.is_zero());
  CHECK_THROWS_AS(AbsorptionLaw::power(2.5), Error);
  CHECK_THROWS_AS(AbsorptionLaw::custom({0.0, 1.0}, {0.1, 0.2}), Error);
  CHECK_THROWS_AS(AbsorptionLaw::custom({0.0, 1.0}, {0.0, -0.2}), Error);
}

TEST_CASE("linear reproduction: g = 0 recovers the harmonic extension at order 2") {
  Domain ball = Domain::ball(2, 1.0);
  auto mu = BoundaryMeasure::with_density(smooth_density);
  std::vector<double> hs, errs;
  for (int n : {32, 64, 128}) {
    Solution s = solve_dirichlet(ball, AbsorptionLaw::zero(), mu, quick(n));
    double worst = 0;
    for (int i = 0; i < s.u.n_r() - 1; ++i)
      for (int j = 0; j < s.u.n_theta(); ++j)
        worst = std::max(worst,
                         std::abs(s.u.at(i, j) - poisson_value(ball, mu, s.u.point(i, j))));
    worst = std::max(worst, std::abs(s.u.center() - poisson_value(ball, mu, Vec2{0, 0})));
    hs.push_back(1.0 / n);
    errs.push_back(worst);
  }
  double order = log_log_slope(hs, errs);
  CHECK(order > 1.7);
  CHECK(order < 2.3);
  CHECK(errs.back() < 1e-4);
}

TEST_CASE("atom solve: sandwich, convergence, weak residual") {
  Domain ball = Domain::ball(2, 1.0);
  auto law = AbsorptionLaw::power(1.25);
  auto mu = BoundaryMeasure::atom(ball.anchor(), 1.0);
  SolverConfig cfg = quick(48, 0.9);
  Solution s = solve_dirichlet(ball, law, mu, cfg);
  CHECK(s.final_update < cfg.tol_update * 10);
  // sandwich 0 <= u <= P_h nodewise
  for (std::size_t k = 0; k < s.u.values().size(); ++k) {
    CHECK(s.u.values()[k] >= -1e-12);
    CHECK(s.u.values()[k] <= s.upper.values()[k] + 1e-12);
  }
  CHECK(s.u.center() > 0);
  CHECK(s.u.center() < s.upper.center());
  CHECK(s.weak_res < cfg.tol_weak);

  // the absorption genuinely bites: strictly below the linear solution
  CHECK(s.u.center() < 0.99 * s.upper.center());
}

TEST_CASE("comparison: solutions are monotone in the boundary mass") {
  Domain ball = Domain::ball(2, 1.0);
  auto law = AbsorptionLaw::power(1.25);
  SolverConfig cfg = quick(32, 0.9);
  std::vector<Solution> sols;
  for (double c : {0.5, 1.0, 2.0})
    sols.push_back(solve_dirichlet(ball, law, BoundaryMeasure::atom(ball.anchor(), c), cfg));
  for (int k = 0; k < 2; ++k)
    for (std::size_t t = 0; t < sols[k].u.values().size(); ++t)
      CHECK(sols[k].u.values()[t] <= sols[k + 1].u.values()[t] + 1e-8);
}

TEST_CASE("weak residual: tiny for harmonic output, large for an unconverged iterate") {
  Domain ball = Domain::ball(2, 1.0);
  auto mu = BoundaryMeasure::with_density(smooth_density);
  Solution lin = solve_dirichlet(ball, AbsorptionLaw::zero(), mu, quick(48));
  CHECK(lin.weak_res < 1e-7);

  auto law = AbsorptionLaw::power(1.4);
  SolverConfig cfg = quick(48);
  Solution s = solve_dirichlet(ball, law, mu, cfg);
  CHECK(s.weak_res < cfg.tol_weak);

  SolverConfig one = cfg;
  one.tol_update = 10.0;  // accept the very first damped step
  Solution s1 = solve_dirichlet(ball, law, mu, one);
  CHECK(s1.weak_res > 10 * std::max(s.weak_res, 1e-12));
}

TEST_CASE("fd and integral backends agree on smooth data") {
  Domain ball = Domain::ball(2, 1.0);
  auto law = AbsorptionLaw::power(1.5);
  auto mu = BoundaryMeasure::with_density(smooth_density);
  SolverConfig fd = quick(32);
  SolverConfig pic = quick(32);
  pic.backend = "picard";
  pic.tol_update = 1e-10;
  Solution a = solve_dirichlet(ball, law, mu, fd);
  Solution b = solve_dirichlet(ball, law, mu, pic);
  double sup = 0, scale = 0;
  for (std::size_t k = 0; k < a.u.values().size(); ++k) {
    sup = std::max(sup, std::abs(a.u.values()[k] - b.u.values()[k]));
    scale = std::max(scale, std::abs(a.u.values()[k]));
  }
  CHECK(sup < 0.02 * scale);
}

TEST_CASE("q = 1 law: exact discrete homogeneity") {
  Domain ball = Domain::ball(2, 1.0);
  for (double ell : {2.0, 0.5}) {
    auto [sol, err] = q1_solve_and_scale(ball, ball.anchor(), ell, quick(32, 0.9));
    CHECK(err < 1e-4);
    CHECK(sol.u.center() > 0);
  }
}

TEST_CASE("Hopf-Cole at q = 2") {
  Domain ball = Domain::ball(2, 1.0);
  // constant density e: data ln(e) = 1, solution identically 1
  auto konst = BoundaryMeasure::with_density([](Vec2) { return std::exp(1.0); });
  HopfColeResult hc = solve_hopf_cole(ball, konst, quick(32));
  for (double v : hc.transform.u.values()) CHECK(v == Catch::Approx(1.0).margin(1e-10));
  CHECK(hc.sup_difference < 1e-8);

  // smooth density: generic Power(2) solver against the transform solution
  auto mu = BoundaryMeasure::with_density([](Vec2 s) {
    double th = std::atan2(s.y, s.x);
    return 1.0 + 0.5 * std::cos(th);
  });
  HopfColeResult hs = solve_hopf_cole(ball, mu, quick(64));
  CHECK(hs.sup_difference < 5e-4);
  // the (Fa4)-type bound: u + (N-1) ln d bounded above
  double worst = -1e300;
  for (int i = 0; i < hs.transform.u.n_r() - 1; ++i)
    for (int j = 0; j < hs.transform.u.n_theta(); ++j) {
      double d = boundary_distance(ball, hs.transform.u.point(i, j));
      worst = std::max(worst, hs.transform.u.at(i, j) + std::log(d));
    }
  CHECK(worst < 10.0);

  // density touching zero is rejected
  auto bad = BoundaryMeasure::with_density([](Vec2 s) {
    double th = std::atan2(s.y, s.x);
    return 0.5 + 0.5 * std::cos(th);
  });
  CHECK_THROWS_AS(solve_hopf_cole(ball, bad, quick(32)), Error);
  CHECK_THROWS_AS(solve_hopf_cole(ball, BoundaryMeasure::atom(ball.anchor(), 1.0), quick(32)),
                  Error);
}

TEST_CASE("interior problem: linear case reproduces the Green function") {
  Domain ball = Domain::ball(2, 1.0);
  auto nu = InteriorMeasure::atom({0, 0}, 1.0);
  Solution s = solve_interior(ball, AbsorptionLaw::zero(), nu, quick(48));
  double worst = 0;
  for (int i = 0; i < s.u.n_r() - 1; ++i) {
    double r = s.u.r(i);
    if (r < 0.2) continue;
    for (int j = 0; j < s.u.n_theta(); ++j)
      worst = std::max(worst, std::abs(s.u.at(i, j) + std::log(r) / (2 * pi)));
  }
  CHECK(worst < 0.01);

  // absorption case: positive and below the linear barrier
  Solution t = solve_interior(ball, AbsorptionLaw::power(1.1), nu, quick(48));
  for (std::size_t k = 0; k < t.u.values().size(); ++k) {
    CHECK(t.u.values()[k] >= -1e-12);
    CHECK(t.u.values()[k] <= t.upper.values()[k] + 1e-12);
  }
  CHECK(t.value_at({0.0, 0.4}) > 0);
  CHECK(t.value_at({0.0, 0.4}) < s.value_at({0.0, 0.4}));
}

TEST_CASE("maximal exhaustion decreases toward the direct solve") {
  Domain ball = Domain::ball(2, 1.0);
  auto law = AbsorptionLaw::power(1.25);
  auto mu = BoundaryMeasure::atom(ball.anchor(), 1.0);
  SolverConfig cfg = quick(48, 0.9);
  ExhaustionResult ex = solve_maximal_exhaustion(ball, law, mu, {0.2, 0.1, 0.05}, cfg);
  CHECK(ex.monotone);
  REQUIRE(ex.sup_diffs.size() == 2);
  CHECK(ex.sup_diffs[1] < ex.sup_diffs[0]);

  // the truncated domain omits the absorption in the boundary strip, so the
  // exhaustion iterate sits above the direct solve and approaches it from
  // above as delta shrinks
  Solution direct = solve_dirichlet(ball, law, mu, cfg);
  double a = ex.solution.value_at({0.0, 0.0});
  double b = direct.u.center();
  CHECK(a > b - 1e-6);
  CHECK(std::abs(a - b) < 0.3 * std::abs(b));

  CHECK_THROWS_AS(
      solve_maximal_exhaustion(Domain::half_disk(2, 1.0), law, mu, {0.1}, cfg), Error);
}

TEST_CASE("supercritical atoms are guarded behind an explicit flag") {
  Domain ball = Domain::ball(2, 1.0);
  auto law = AbsorptionLaw::power(1.6);
  auto mu = BoundaryMeasure::atom(ball.anchor(), 1.0);
  SolverConfig cfg = quick(32, 0.9);
  CHECK_THROWS_AS(solve_dirichlet(ball, law, mu, cfg), Error);
  cfg.allow_supercritical = true;
  Solution s = solve_dirichlet(ball, law, mu, cfg);
  CHECK(s.subcriticality_violated);
  CHECK(s.u.center() >= 0);
}

TEST_CASE("mollifier stability away from the atom") {
  Domain ball = Domain::ball(2, 1.0);
  auto law = AbsorptionLaw::power(1.25);
  auto mu = BoundaryMeasure::atom(ball.anchor(), 1.0);
  SolverConfig wide = quick(48, 0.9);
  wide.atom_width = 0.2;
  SolverConfig narrow = wide;
  narrow.atom_width = 0.1;
  Solution a = solve_dirichlet(ball, law, mu, wide);
  Solution b = solve_dirichlet(ball, law, mu, narrow);
  for (Vec2 p : {Vec2{0.0, 0.0}, Vec2{0.0, -0.5}, Vec2{0.3, -0.3}}) {
    double va = a.value_at(p), vb = b.value_at(p);
    CHECK(std::abs(va - vb) < 0.03 * std::max(std::abs(vb), 1e-12));
  }
}
