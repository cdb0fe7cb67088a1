#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "charwave/potential.hpp"

using namespace charwave;

namespace {

PotentialSpec const_spec(double value, double x_max) {
  PotentialSpec s;
  s.pieces.push_back({0.0, x_max, true, value, {}, {}});
  return s;
}

}  // namespace

TEST_CASE("constant potential is accepted with infinite gap") {
  Potential pot = build_potential(const_spec(1.0, 10.0));
  CHECK(pot.v_min == 1.0);
  CHECK(pot.breakpoints.empty());
  CHECK(std::isinf(pot.gap_min));
}

TEST_CASE("accumulating breakpoints violate the gap condition") {
  PotentialSpec s;
  // boundaries at 1/n for n = 50..1, alternating values
  std::vector<double> cuts;
  for (int n = 50; n >= 1; --n) cuts.push_back(1.0 / n);
  double lo = 0.0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    s.pieces.push_back({lo, cuts[i], true, i % 2 ? 2.0 : 1.0, {}, {}});
    lo = cuts[i];
  }
  CHECK_THROWS_AS(build_potential(s), RejectedA2);
}

TEST_CASE("non-positive potential is rejected") {
  CHECK_THROWS_AS(build_potential(const_spec(-1.0, 1.0)), RejectedA1);
  PotentialSpec s;
  PotentialPiece p;
  p.x0 = 0;
  p.x1 = 2;
  p.is_const = false;
  p.V = [](double x) { return 1.0 - x; };  // dips through zero
  p.dV = [](double) { return -1.0; };
  s.pieces.push_back(p);
  CHECK_THROWS_AS(build_potential(s), RejectedA1);
}

TEST_CASE("step profile breakpoints and gap match direct enumeration") {
  const double a = 1.0, b = 25.0 / 9.0, theta = 0.25, x_max = 8 * M_PI;
  Potential pot = build_potential(step_potential_a5(a, b, theta, x_max));
  CHECK(pot.v_min == a);

  // Oracle: enumerate the jump locations of the 2pi-periodic step profile on
  // (0, x_max): theta*pi, (2-theta)*pi, (2+theta)*pi, ...
  std::vector<double> expected;
  for (int cell = 0; expected.empty() || expected.back() < x_max; ++cell) {
    for (double d : {2 * cell * M_PI + theta * M_PI, (2 * cell + 2) * M_PI - theta * M_PI}) {
      if (d > 1e-12 && d < x_max - 1e-12) expected.push_back(d);
    }
    if (2 * (cell + 1) * M_PI > x_max) break;
  }
  REQUIRE(pot.breakpoints.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(pot.breakpoints[i] == Catch::Approx(expected[i]).margin(1e-12));

  // Oracle for the minimal gap: brute force over breakpoints together with 0.
  std::vector<double> d = expected;
  d.push_back(0.0);
  std::sort(d.begin(), d.end());
  double gap = 1e300;
  for (std::size_t i = 0; i + 1 < d.size(); ++i) gap = std::min(gap, d[i + 1] - d[i]);
  CHECK(gap == Catch::Approx(theta * M_PI).margin(1e-12));
  CHECK(pot.gap_min == Catch::Approx(gap).margin(1e-12));
}

TEST_CASE("kappa is the exact piecewise integral of sqrt(V)") {
  Potential p1 = build_potential(const_spec(1.0, 10.0));
  CoordinateMap m1(p1);
  CHECK(m1.kappa(3.7) == Catch::Approx(3.7).margin(1e-14));

  Potential p4 = build_potential(const_spec(4.0, 10.0));
  CoordinateMap m4(p4);
  CHECK(m4.kappa(3.0) == Catch::Approx(6.0).margin(1e-13));

  // a=1, b=4, theta=1/2 step: kappa(pi) = pi/2 + 2*(pi/2) = 3 pi/2
  Potential ps = build_potential(step_potential_a5(1.0, 4.0, 0.5, 4 * M_PI));
  CoordinateMap ms(ps);
  CHECK(ms.kappa(M_PI) == Catch::Approx(1.5 * M_PI).margin(1e-12));
  CHECK(ms.kappa_inverse(1.5 * M_PI) == Catch::Approx(M_PI).margin(1e-12));
}

TEST_CASE("kappa round trip and monotonicity") {
  Potential pot = build_potential(step_potential_a5(1.0, 25.0 / 9.0, 0.25, 8 * M_PI));
  CoordinateMap map(pot);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 8 * M_PI);
  double prev_x = -1, prev_z = -1;
  for (int i = 0; i < 100; ++i) {
    double x = unif(rng);
    double z = map.kappa(x);
    CHECK(std::abs(map.kappa(map.kappa_inverse(z)) - z) <= 1e-12 * (1.0 + std::abs(z)));
    CHECK(std::abs(map.kappa_inverse(z) - x) <= 1e-11 * (1.0 + x));
    if (prev_x >= 0 && x > prev_x) CHECK(z > prev_z);
    prev_x = x;
    prev_z = z;
  }
  CHECK(map.kappa(0.0) == 0.0);
}

TEST_CASE("z-images of breakpoints keep their gaps") {
  Potential pot = build_potential(step_potential_a5(1.0, 25.0 / 9.0, 0.25, 8 * M_PI));
  CoordinateMap map(pot);
  const auto& zb = map.z_breakpoints();
  REQUIRE(zb.size() == pot.breakpoints.size());
  double scale = std::sqrt(pot.v_min);
  for (std::size_t i = 0; i + 1 < zb.size(); ++i)
    CHECK(zb[i + 1] - zb[i] >= pot.gap_min * scale - 1e-12);
}

TEST_CASE("lambda vanishes identically on constant pieces") {
  Potential pot = build_potential(step_potential_a5(1.0, 4.0, 0.5, 4 * M_PI));
  CoordinateMap map(pot);
  CHECK(map.lambda_sup() == 0.0);
  CHECK(map.lambda_identically_zero());
  for (double z : {0.3, 1.0, 2.5, 4.0}) CHECK(map.lambda(z) == 0.0);
  // discontinuity list = kappa images of D(V)
  REQUIRE(map.z_lambda_breakpoints().size() == pot.breakpoints.size());
  for (std::size_t i = 0; i < pot.breakpoints.size(); ++i)
    CHECK(map.z_lambda_breakpoints()[i] ==
          Catch::Approx(map.kappa(pot.breakpoints[i])).margin(1e-12));
}

TEST_CASE("exponential potential reproduces the symbolic chain rule") {
  // V(x) = e^{2x}: kappa(x) = e^x - 1, c(z) = 1/(z+1), lambda(z) = -1/(z+1)
  PotentialSpec s;
  PotentialPiece p;
  p.x0 = 0;
  p.x1 = 2;
  p.is_const = false;
  p.V = [](double x) { return std::exp(2 * x); };
  p.dV = [](double x) { return 2 * std::exp(2 * x); };
  s.pieces.push_back(p);
  Potential pot = build_potential(s);
  CoordinateMap map(pot);
  for (double x : {0.0, 0.3, 0.9, 1.7}) {
    double z = map.kappa(x);
    CHECK(z == Catch::Approx(std::exp(x) - 1.0).margin(1e-12));
    CHECK(map.c(z) == Catch::Approx(1.0 / (z + 1.0)).margin(1e-10));
    CHECK(map.lambda(z) == Catch::Approx(-1.0 / (z + 1.0)).margin(1e-10));
  }
  CHECK(map.lambda_sup() == Catch::Approx(1.0).margin(1e-6));
  CHECK_FALSE(map.lambda_identically_zero());
}

TEST_CASE("out-of-range queries are rejected") {
  Potential pot = build_potential(const_spec(1.0, 5.0));
  CoordinateMap map(pot);
  CHECK_THROWS_AS(map.kappa(6.0), OutOfRange);
  CHECK_THROWS_AS(map.kappa_inverse(6.0), OutOfRange);
  CHECK_THROWS_AS(pot.value_at(-1.0), OutOfRange);
}
