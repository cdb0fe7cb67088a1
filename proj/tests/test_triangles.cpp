#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <functional>
#include <random>

#include "charwave/triangles.hpp"

using namespace charwave;

namespace {

CauchyData sample_data(const Triangle& tri, const std::function<double(double)>& u0,
                       const std::function<double(double)>& du0,
                       const std::function<double(double)>& u1) {
  CauchyData d;
  for (int i = 0; i < tri.width(0); ++i) {
    double z = tri.node_z(0, i);
    d.u0.push_back(u0(z));
    d.du0.push_back(du0(z));
    d.u1.push_back(u1(z));
  }
  return d;
}

double field_sup_diff(const TriangleField& a, const TriangleField& b) {
  double worst = 0;
  for (std::size_t n = 0; n < a.u.size(); ++n)
    for (std::size_t i = 0; i < a.u[n].size(); ++i) {
      worst = std::max(worst, std::abs(a.u[n][i] - b.u[n][i]));
      worst = std::max(worst, std::abs(a.ut[n][i] - b.ut[n][i]));
      worst = std::max(worst, std::abs(a.uz[n][i] - b.uz[n][i]));
    }
  return worst;
}

}  // namespace

TEST_CASE("fine constants match the closed formulas") {
  FineConstants fc0 = fine_constants(1.0, 0.0);
  CHECK(fc0.alpha == 0.0);
  CHECK(fc0.beta == 0.0);

  FineConstants fc = fine_constants(1.0, 0.5);
  CHECK(fc.q == 0.5);
  CHECK(fc.alpha == Catch::Approx(2.0 / 7.0).margin(1e-15));
  CHECK(fc.beta == Catch::Approx(8.0 / 21.0).margin(1e-15));

  CHECK_THROWS_AS(fine_constants(2.0, 0.6), ContractionViolated);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unif(0.01, 0.99);
  for (int i = 0; i < 50; ++i) {
    double q = unif(rng);
    FineConstants f = fine_constants(1.0, q);
    CHECK(f.beta >= f.alpha);
  }
}

TEST_CASE("d'Alembert formula on polynomial data") {
  Triangle tri{0.0, 0.0, 1.0, TriangleKind::full, 0.02};

  SECTION("linear u0 is transported unchanged") {
    auto f = dalembert_solve(tri, sample_data(tri, [](double z) { return z; },
                                              [](double) { return 1.0; },
                                              [](double) { return 0.0; }));
    for (int n = 0; n <= tri.levels(); ++n)
      for (int i = 0; i < tri.width(n); ++i) {
        CHECK(f.u[n][i] == Catch::Approx(tri.node_z(n, i)).margin(1e-13));
        CHECK(f.ut[n][i] == Catch::Approx(0.0).margin(1e-13));
        CHECK(f.uz[n][i] == Catch::Approx(1.0).margin(1e-13));
      }
  }

  SECTION("unit velocity integrates to t") {
    auto f = dalembert_solve(tri, sample_data(tri, [](double) { return 0.0; },
                                              [](double) { return 0.0; },
                                              [](double) { return 1.0; }));
    for (int n = 0; n <= tri.levels(); ++n)
      for (int i = 0; i < tri.width(n); ++i)
        CHECK(f.u[n][i] == Catch::Approx(tri.level_t(n)).margin(1e-13));
  }

  SECTION("constant source gives (t - t0)^2 exactly") {
    auto f = dalembert_solve(tri, sample_data(tri, [](double) { return 0.0; },
                                              [](double) { return 0.0; },
                                              [](double) { return 0.0; }),
                             [](double, double) { return 2.0; });
    for (int n = 0; n <= tri.levels(); ++n)
      for (int i = 0; i < tri.width(n); ++i) {
        double t = tri.level_t(n);
        CHECK(f.u[n][i] == Catch::Approx(t * t).margin(1e-13));
      }
  }
}

TEST_CASE("Picard with lambda = 0 reproduces d'Alembert in one iteration") {
  Triangle tri{0.5, 0.0, 0.5, TriangleKind::full, 0.0125};
  auto data = sample_data(tri, [](double z) { return std::sin(3 * z); },
                          [](double z) { return 3 * std::cos(3 * z); },
                          [](double z) { return std::cos(z); });
  auto direct = dalembert_solve(tri, data);
  auto [field, rep] = picard_triangle_solve(tri, data, {}, 0.0);
  CHECK(rep.iterations == 1);
  CHECK(rep.q == 0.0);
  CHECK(field_sup_diff(direct, field) <= 1e-14);
}

TEST_CASE("contraction iteration count obeys the a priori estimate") {
  // q = 0.5, tol = 1e-12: about log(1e-12)/log(0.5) ~ 40 iterations
  Triangle tri{0.0, 0.0, 1.0, TriangleKind::full, 0.025};
  auto data = sample_data(tri, [](double z) { return std::sin(z); },
                          [](double z) { return std::cos(z); },
                          [](double z) { return 0.5 * z; });
  PicardOptions opts;
  opts.tol = 1e-12;
  auto [field, rep] = picard_triangle_solve(tri, data, constant_lambda(0.5), 0.5, opts);
  CHECK(rep.q == Catch::Approx(0.5));
  CHECK(rep.iterations <= 45);
  CHECK(rep.final_update <= 1e-12);

  CHECK_THROWS_AS(picard_triangle_solve(tri, data, constant_lambda(1.1), 1.1, opts),
                  ContractionViolated);
}

TEST_CASE("converged field satisfies the mixed-derivative equation at order 2") {
  // lambda(z) = -1/(z+1) on a triangle away from z = -1
  SidedFn lam = [](double z, Side) { return -1.0 / (z + 1.0); };
  auto residual_at = [&](double dz) {
    Triangle tri{1.0, 0.0, 0.4, TriangleKind::full, dz};
    auto data = sample_data(tri, [](double z) { return std::sin(z); },
                            [](double z) { return std::cos(z); },
                            [](double z) { return std::cos(2 * z); });
    double lam_sup = 1.0 / 1.6;
    PicardOptions opts;
    opts.tol = 1e-14;
    auto [f, rep] = picard_triangle_solve(tri, data, lam, lam_sup, opts);
    // centered difference of w+ = ut + uz along the left-moving characteristic
    double worst = 0;
    int L = tri.levels();
    for (int n = 1; n < L; ++n)
      for (int i = 0; i < tri.width(n); ++i) {
        int up = i - 2, dn = i + 2;  // level n+1 / n-1 indices on the same characteristic
        if (up < 0 || up >= tri.width(n + 1) || dn >= tri.width(n - 1)) continue;
        double wp_up = f.ut[n + 1][up] + f.uz[n + 1][up];
        double wp_dn = f.ut[n - 1][dn] + f.uz[n - 1][dn];
        double deriv = (wp_up - wp_dn) / (2 * dz);
        double z = tri.node_z(n, i);
        worst = std::max(worst, std::abs(deriv + lam(z, Side::right) * f.uz[n][i]));
      }
    return worst;
  };
  double r1 = residual_at(0.02), r2 = residual_at(0.01);
  CHECK(r1 <= 0.01);
  CHECK(r1 / r2 >= 3.0);  // order 2
}

TEST_CASE("discrete Cor 3.5 bound on u_z") {
  Triangle tri{0.0, 0.0, 0.8, TriangleKind::full, 0.02};
  auto data = sample_data(tri, [](double z) { return std::sin(2 * z); },
                          [](double z) { return 2 * std::cos(2 * z); },
                          [](double z) { return std::cos(3 * z); });
  double lam_sup = 0.6;
  auto [f, rep] = picard_triangle_solve(tri, data, constant_lambda(0.6), lam_sup);
  double q = 0.8 * lam_sup;
  double bound = (2.0 + 1.0) / (1.0 - q);  // ||u0'|| <= 2, ||u1|| <= 1
  double sup = 0;
  for (const auto& row : f.uz)
    for (double v : row) sup = std::max(sup, std::abs(v));
  CHECK(sup <= bound + 0.1);
}

TEST_CASE("both factorizations produce the same field") {
  SidedFn lam = [](double z, Side) { return 0.3 * std::cos(z); };
  auto diff_at = [&](double dz) {
    Triangle tri{0.0, 0.0, 0.6, TriangleKind::full, dz};
    auto data = sample_data(tri, [](double z) { return std::exp(-z * z); },
                            [](double z) { return -2 * z * std::exp(-z * z); },
                            [](double z) { return std::sin(z); });
    PicardOptions a, b;
    b.opposite_factorization = true;
    auto [fa, ra] = picard_triangle_solve(tri, data, lam, 0.3, a);
    auto [fb, rb] = picard_triangle_solve(tri, data, lam, 0.3, b);
    return field_sup_diff(fa, fb);
  };
  double d1 = diff_at(0.02), d2 = diff_at(0.01);
  CHECK(d1 <= 1e-3);
  CHECK(d2 <= 0.4 * d1);  // discretization-limited agreement, order >= 1
}

TEST_CASE("odd data with odd lambda yields an odd solution") {
  Triangle tri{0.0, 0.0, 0.5, TriangleKind::full, 0.0125};
  SidedFn lam = [](double z, Side s) {
    if (z > 1e-12) return 0.4;
    if (z < -1e-12) return -0.4;
    return s == Side::left ? -0.4 : 0.4;
  };
  auto data = sample_data(tri, [](double z) { return std::sin(2 * z); },
                          [](double z) { return 2 * std::cos(2 * z); },
                          [](double z) { return z; });
  auto [f, rep] = picard_triangle_solve(tri, data, lam, 0.4);
  int L = tri.levels();
  for (int n = 0; n <= L; ++n) {
    int w = tri.width(n);
    for (int i = 0; i < w; ++i) {
      CHECK(f.u[n][i] == Catch::Approx(-f.u[n][w - 1 - i]).margin(1e-12));
      CHECK(f.uz[n][i] == Catch::Approx(f.uz[n][w - 1 - i]).margin(1e-12));
    }
  }
}

TEST_CASE("Dirichlet half solve") {
  SECTION("constant trace with matching data is constant") {
    Triangle tri{0.0, 0.0, 0.5, TriangleKind::half_plus, 0.025};
    int L = tri.levels();
    std::vector<double> b(L + 1, 3.0), bp(L + 1, 0.0);
    CauchyData data;
    data.u0.assign(L + 1, 3.0);
    data.du0.assign(L + 1, 0.0);
    data.u1.assign(L + 1, 0.0);
    auto [f, rep] = dirichlet_half_solve(tri, b, bp, data, {}, 0.0);
    for (const auto& row : f.u)
      for (double v : row) CHECK(v == Catch::Approx(3.0).margin(1e-13));
  }

  SECTION("b(t) = t with u1 = 1 gives u = t on the half triangle") {
    Triangle tri{0.0, 0.0, 0.5, TriangleKind::half_plus, 0.025};
    int L = tri.levels();
    std::vector<double> b(L + 1), bp(L + 1, 1.0);
    for (int n = 0; n <= L; ++n) b[n] = tri.level_t(n);
    CauchyData data;
    data.u0.assign(L + 1, 0.0);
    data.du0.assign(L + 1, 0.0);
    data.u1.assign(L + 1, 1.0);
    auto [f, rep] = dirichlet_half_solve(tri, b, bp, data, {}, 0.0);
    for (int n = 0; n <= L; ++n)
      for (int i = 0; i < tri.width(n); ++i) {
        CHECK(f.u[n][i] == Catch::Approx(tri.level_t(n)).margin(1e-13));
        CHECK(f.ut[n][i] == Catch::Approx(1.0).margin(1e-13));
      }
  }

  SECTION("the trace is recovered and the minus half mirrors") {
    SidedFn lam = [](double z, Side) { return 0.5 * std::sin(z + 1.0); };
    for (TriangleKind kind : {TriangleKind::half_plus, TriangleKind::half_minus}) {
      Triangle tri{0.0, 0.0, 0.5, kind, 0.025};
      int L = tri.levels();
      std::vector<double> b(L + 1), bp(L + 1);
      for (int n = 0; n <= L; ++n) {
        double t = tri.level_t(n);
        b[n] = 0.2 * t * t + 0.1 * t;
        bp[n] = 0.4 * t + 0.1;
      }
      CauchyData data;
      data.u0.assign(L + 1, 0.0);
      data.du0.assign(L + 1, 0.0);
      data.u1.assign(L + 1, 0.1);  // matches b'(0)
      auto [f, rep] = dirichlet_half_solve(tri, b, bp, data, lam, 0.5);
      for (int n = 0; n <= L; ++n) CHECK(f.trace_u(n) == Catch::Approx(b[n]).margin(1e-11));
    }
  }

  SECTION("incompatible trace is rejected") {
    Triangle tri{0.0, 0.0, 0.5, TriangleKind::half_plus, 0.025};
    int L = tri.levels();
    std::vector<double> b(L + 1, 1.0), bp(L + 1, 0.0);
    CauchyData data;
    data.u0.assign(L + 1, 0.0);
    data.du0.assign(L + 1, 0.0);
    data.u1.assign(L + 1, 0.0);
    CHECK_THROWS_AS(dirichlet_half_solve(tri, b, bp, data, {}, 0.0), IncompatibleTrace);
  }
}

TEST_CASE("fine boundary estimate holds discretely") {
  // u = Phi_+(b, 0, 0) with b(0) = b'(0) = 0: |u_z(z,t) + b'(m)| bounded by
  // alpha |z - z0| |b'(m)| + beta int_0^m |b'|.
  double r = 0.5, lam_sup = 0.8, dz = 0.0125;
  Triangle tri{0.0, 0.0, r, TriangleKind::half_plus, dz};
  int L = tri.levels();
  FineConstants fc = fine_constants(r, lam_sup);
  SidedFn lam = [](double z, Side) { return 0.8 * std::cos(3 * z); };
  std::vector<double> b(L + 1), bp(L + 1);
  for (int n = 0; n <= L; ++n) {
    double t = tri.level_t(n);
    b[n] = t * t * (1 + 0.5 * std::sin(4 * t));
    bp[n] = 2 * t * (1 + 0.5 * std::sin(4 * t)) + 2 * t * t * std::cos(4 * t);
  }
  CauchyData data;
  data.u0.assign(L + 1, 0.0);
  data.du0.assign(L + 1, 0.0);
  data.u1.assign(L + 1, 0.0);
  auto [f, rep] = dirichlet_half_solve(tri, b, bp, data, lam, lam_sup);
  double bp_max = 0;
  for (double v : bp) bp_max = std::max(bp_max, std::abs(v));
  // trapezoid prefix of |b'| as the integral oracle
  std::vector<double> absbp(L + 1);
  for (int n = 0; n <= L; ++n) absbp[n] = std::abs(bp[n]);
  auto ibp = trapezoid_prefix(absbp, dz);
  for (int n = 0; n <= L; ++n)
    for (int i = 0; i < tri.width(n); ++i) {
      int m_idx = std::max(0, n - i);  // m = max(t0, t - |z - z0|) on the grid
      double lhs = std::abs(f.uz[n][i] + bp[m_idx]);
      double rhs = fc.alpha * (i * dz) * std::abs(bp[m_idx]) + fc.beta * ibp[m_idx];
      CHECK(lhs <= rhs + 20 * dz * (1 + bp_max));
    }
}

TEST_CASE("misaligned triangles are rejected") {
  Triangle bad{0.0, 0.0, 0.5, TriangleKind::full, 0.03};
  CHECK_THROWS_AS(bad.levels(), MisalignedGrid);
  Triangle half{0.0, 0.0, 0.5, TriangleKind::half_plus, 0.025};
  CauchyData d;
  d.u0.assign(half.width(0), 0.0);
  d.du0.assign(half.width(0), 0.0);
  d.u1.assign(half.width(0), 0.0);
  CHECK_THROWS_AS(picard_triangle_solve(half, d, {}, 0.0), MisalignedGrid);
}
