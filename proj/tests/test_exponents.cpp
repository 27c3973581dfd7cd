#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "singlab/exponents.hpp"

using namespace singlab;

TEST_CASE("derived exponents") {
  auto e = exponents(2, 1.25);
  CHECK(e.beta == Catch::Approx(3.0).margin(1e-14));
  CHECK(e.q_c == Catch::Approx(1.5).margin(1e-14));
  CHECK(e.lambda_coeff == Catch::Approx(9.0).margin(1e-12));
  CHECK(e.q_conj == Catch::Approx(5.0).margin(1e-12));
  CHECK(e.q_star == Catch::Approx(2.0).margin(1e-14));

  auto b = exponents(2, 1.5);
  CHECK(b.beta == Catch::Approx(1.0).margin(1e-14));
  CHECK(b.lambda_coeff == Catch::Approx(1.0).margin(1e-13));  // = N-1, borderline

  auto c = exponents(3, 4.0 / 3.0);
  CHECK(c.q_c == Catch::Approx(c.q).margin(1e-14));

  CHECK_THROWS_AS(exponents(2, 2.5), Error);
  CHECK_THROWS_AS(exponents(2, 1.0), Error);
}

TEST_CASE("exponent pack internal consistency") {
  for (int N : {2, 3})
    for (double q : {1.05, 1.2, 1.35, 1.5, 1.7, 1.9}) {
      auto e = exponents(N, q);
      CHECK(std::abs(e.beta * (q - 1) - (2 - q)) < 1e-14);
      CHECK(std::abs(e.q_conj * (q - 1) - q) < 1e-14);
      CHECK(std::abs(e.lambda_coeff - e.beta * (e.q_conj - N)) < 1e-12);
      CHECK(e.beta > 0);
      CHECK(e.q_c > 1);
      CHECK(e.q_c <= 1.5);
    }
}

TEST_CASE("radial separable constant") {
  CHECK(radial_constant(2, 1.25) == Catch::Approx(27.0).margin(1e-12));
  // substitution oracle at q = 1.4
  {
    double q = 1.4, N = 2;
    double qp = q / (q - 1);
    double expect = std::pow((q - 1) / (2 - q), qp) *
                    std::pow((2 - q) * (N - (N - 1) * q) / ((q - 1) * (q - 1)), 1 / (q - 1));
    CHECK(radial_constant(2, 1.4) == Catch::Approx(expect).epsilon(1e-14));
  }
  // q >= N/(N-1) has no radial separable solution
  CHECK_THROWS_AS(radial_constant(3, 1.6), Error);
  CHECK_THROWS_AS(radial_constant(3, 1.5), Error);
}

TEST_CASE("radial separable residual vanishes, and detects a wrong constant") {
  std::vector<double> radii;
  for (int k = 1; k <= 10; ++k) radii.push_back(0.1 * k);
  CHECK(radial_singular_residual(2, 1.25, radii) < 1e-9);
  CHECK(radial_singular_residual(2, 1.4, radii) < 1e-9);
  CHECK(radial_singular_residual(3, 1.2, radii) < 1e-9);

  double lam = radial_constant(2, 1.25);
  CHECK(radial_singular_residual(2, 1.25, {1.0}, lam * 1.01) > 1e-3);
}

TEST_CASE("universal bound constant") {
  CHECK(keller_osserman_constant(1.5) == Catch::Approx(4.0).margin(1e-13));
  CHECK(keller_osserman_constant(1.25) == Catch::Approx(256.0 / 3.0).epsilon(1e-13));
  CHECK(keller_osserman_constant(1.99) > 100.0);
}

TEST_CASE("nonexistence obstruction across the critical exponent") {
  CHECK(existence_obstruction(2, 1.5));        // equality case
  CHECK_FALSE(existence_obstruction(2, 1.4));  // 2.25 > 1
  CHECK_FALSE(existence_obstruction(3, 1.2));  // q_c = 4/3
  CHECK(existence_obstruction(2, 1.7));
  CHECK(existence_obstruction(3, 1.4));
  // transition is exactly at q_c
  for (int N : {2, 3}) {
    double qc = double(N + 1) / N;
    CHECK_FALSE(existence_obstruction(N, qc - 1e-9));
    CHECK(existence_obstruction(N, qc + 1e-9));
  }
}

TEST_CASE("point capacity criteria transition at the critical exponents") {
  // boundary family: zero capacity (removable point) iff q >= (N+1)/N
  {
    auto v = point_capacity_zero(boundary_capacity_query(2, 1.6));
    CHECK(v.zero);
    // alpha p = (2-q)/(q-1) = 2/3 here
    CHECK(v.scaling_exponent == Catch::Approx(1.0 - 2.0 / 3.0).margin(1e-12));
  }
  CHECK_FALSE(point_capacity_zero(boundary_capacity_query(2, 1.4)).zero);  // alpha p = 1.5
  for (int N : {2, 3}) {
    double qc = double(N + 1) / N;
    CHECK_FALSE(point_capacity_zero(boundary_capacity_query(N, qc - 1e-6)).zero);
    CHECK(point_capacity_zero(boundary_capacity_query(N, qc + 1e-6)).zero);
    CHECK(point_capacity_zero(boundary_capacity_query(N, qc)).zero);
  }
  // interior family: zero capacity iff q' <= N, i.e. q >= N/(N-1)
  CHECK_FALSE(point_capacity_zero(interior_capacity_query(2, 1.6)).zero);  // q' = 8/3 > 2
  CHECK(point_capacity_zero(interior_capacity_query(2, 2.0)).zero);  // q' = 2 <= N
  for (int N : {2, 3}) {
    double qs = double(N) / (N - 1);
    CHECK_FALSE(point_capacity_zero(interior_capacity_query(N, qs - 1e-6)).zero);
    CHECK(point_capacity_zero(interior_capacity_query(N, qs + 1e-6)).zero);
  }
}
