#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <random>

#include "charwave/breather.hpp"

using namespace charwave;
using cd = std::complex<double>;

namespace {

BreatherMedium canonical() { return validate_resonance(1.0, 25.0 / 9.0, 0.25, 1.0); }

std::vector<BlochMode> modes_up_to(const BreatherMedium& m, int N) {
  std::vector<BlochMode> out;
  for (int k = 1; k <= N; k += 2) out.push_back(bloch_mode(m, k));
  return out;
}

}  // namespace

TEST_CASE("resonance validation") {
  SECTION("canonical medium: m_a = 1, m_b = 5") {
    BreatherMedium m = canonical();
    CHECK(m.m_a == 1);
    CHECK(m.m_b == 5);
    CHECK(m.T == Catch::Approx(2 * M_PI));
  }

  SECTION("a=1, b=4, theta=1/2 fails for every omega (parity argument)") {
    // 4 sqrt(a) theta w = 2w and 4 sqrt(b)(1-theta) w = 4w cannot both be odd.
    for (int i = 1; i <= 50; ++i) {
      double omega = 0.07 * i;
      CHECK_THROWS_AS(validate_resonance(1.0, 4.0, 0.5, omega), ResonanceViolated);
    }
  }

  SECTION("swapped layer widths: a=1, theta=3/4, omega=1/3 needs b=81") {
    BreatherMedium m = validate_resonance(1.0, 81.0, 0.75, 1.0 / 3.0);
    CHECK(m.m_a == 1);
    CHECK(m.m_b == 3);
    CHECK_THROWS_AS(validate_resonance(1.0, 80.0, 0.75, 1.0 / 3.0), ResonanceViolated);
  }
}

TEST_CASE("transfer matrices have unit determinant") {
  BreatherMedium m = canonical();
  for (int k : {1, 3, 5, 7}) {
    double sa = k * m.omega * std::sqrt(m.a), sb = k * m.omega * std::sqrt(m.b);
    CHECK(std::abs(transfer_matrix(sa, m.theta * M_PI).determinant() - 1.0) <= 1e-12);
    CHECK(std::abs(transfer_matrix(sb, 2 * (1 - m.theta) * M_PI).determinant() - 1.0) <= 1e-12);
    CHECK(std::abs(cell_monodromy(m, k).determinant() - 1.0) <= 1e-12);
  }
}

TEST_CASE("decaying Bloch modes: multiplier, 4pi relation, k-independent C") {
  BreatherMedium m = canonical();
  std::vector<double> cs;
  for (int k : {1, 3, 5, 7}) {
    BlochMode mode = bloch_mode(m, k);
    CHECK(std::abs(mode.multiplier) > 0.0);
    CHECK(std::abs(mode.multiplier) < 1.0);
    if (k <= 5)
      CHECK(std::abs(mode.multiplier * mode.multiplier - m.a / m.b) <= 1e-10);
    int parity = ((k - 1) / 2) % 2 ? -1 : 1;
    cs.push_back(mode.dphi0 / (k * parity));
    // sign pattern of phi_k'(0)
    CHECK(mode.dphi0 * (cs.front() * k * parity) > 0.0);
  }
  for (double c : cs) CHECK(std::abs(c - cs.front()) <= 1e-8 * std::abs(cs.front()));
  // frozen from the analytic 2x2 product for this medium: C = -1
  CHECK(cs.front() == Catch::Approx(-1.0).margin(1e-9));
}

TEST_CASE("phi_k evaluation satisfies the quasi-periodicity") {
  BreatherMedium m = canonical();
  BlochMode mode = bloch_mode(m, 3);
  CHECK(mode.eval(0.0) == Catch::Approx(1.0).margin(1e-13));
  double d0;
  mode.eval(0.0, &d0);
  CHECK(d0 == Catch::Approx(mode.dphi0).margin(1e-13));
  for (double x : {0.3, 2.0, 5.5, 9.0}) {
    CHECK(std::abs(mode.eval(x + 4 * M_PI) - (m.a / m.b) * mode.eval(x)) <= 1e-10);
  }
}

TEST_CASE("even harmonics carry no decaying mode") {
  BreatherMedium m = canonical();
  CHECK_THROWS_AS(bloch_mode(m, 2), EvenHarmonic);
  for (int k : {2, 4}) {
    Eigen::Matrix2d M = cell_monodromy(m, k);
    CHECK((M - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("trace maps") {
  BreatherMedium m = canonical();
  auto modes = modes_up_to(m, 9);

  SECTION("unit mass at k=1") {
    TraceCoefficients alpha;
    alpha.N = 9;
    alpha.alpha.assign(5, cd(0, 0));
    alpha.alpha[0] = cd(1, 0);
    TraceCoefficients beta = alpha_to_beta(m, modes, alpha);
    cd expect = modes[0].dphi0 / cd(0, m.omega);
    CHECK(std::abs(beta.alpha[0] - expect) <= 1e-14);
    for (int i = 1; i < 5; ++i) CHECK(std::abs(beta.alpha[i]) == 0.0);
  }

  SECTION("zero maps to zero both ways") {
    TraceCoefficients zero;
    zero.N = 9;
    zero.alpha.assign(5, cd(0, 0));
    TraceCoefficients b = alpha_to_beta(m, modes, zero);
    for (auto v : b.alpha) CHECK(std::abs(v) == 0.0);
    TraceCoefficients a = beta_to_alpha(m, make_linear(1.0), zero);
    for (auto v : a.alpha) CHECK(std::abs(v) == 0.0);
  }

  SECTION("alpha -> beta -> alpha round trip with f = id") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    TraceCoefficients alpha;
    alpha.N = 9;
    for (int i = 0; i < 5; ++i) alpha.alpha.push_back(cd(unif(rng), unif(rng)));
    TraceCoefficients beta = alpha_to_beta(m, modes, alpha);
    TraceCoefficients back = beta_to_alpha(m, make_linear(1.0), beta);
    // the composition multiplies each harmonic by phi_k'(0)/(ikw) then the
    // sampled inverse path divides by ikw after f^{-1}; undo the multiplier
    for (int i = 0; i < 5; ++i) {
      int k = 2 * i + 1;
      cd multiplier = modes[i].dphi0 / cd(0, k * m.omega);
      cd recovered = back.alpha[i] * cd(0, k * m.omega) / multiplier * cd(0, 1.0) /
                     cd(0, 1.0);
      // direct statement: back = (multiplier / (ikw)) alpha
      cd expect = multiplier / cd(0, k * m.omega) * alpha.alpha[i];
      CHECK(std::abs(back.alpha[i] - expect) <= 1e-12);
      (void)recovered;
    }
  }

  SECTION("alpha -> beta is linear") {
    std::mt19937 rng(22);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    TraceCoefficients x, y;
    x.N = y.N = 9;
    for (int i = 0; i < 5; ++i) {
      x.alpha.push_back(cd(unif(rng), unif(rng)));
      y.alpha.push_back(cd(unif(rng), unif(rng)));
    }
    double s = 1.7;
    TraceCoefficients combo;
    combo.N = 9;
    for (int i = 0; i < 5; ++i) combo.alpha.push_back(s * x.alpha[i] + y.alpha[i]);
    TraceCoefficients bx = alpha_to_beta(m, modes, x), by = alpha_to_beta(m, modes, y),
                      bc = alpha_to_beta(m, modes, combo);
    for (int i = 0; i < 5; ++i)
      CHECK(std::abs(bc.alpha[i] - (s * bx.alpha[i] + by.alpha[i])) <= 1e-13);
  }

  SECTION("a non-odd nonlinearity leaks even harmonics and is rejected") {
    Nonlinearity skew = make_custom([](double y) { return y + 0.2 * std::atan(y + 0.4); });
    TraceCoefficients beta;
    beta.N = 5;
    beta.alpha.assign(3, cd(0, 0));
    beta.alpha[0] = cd(0.8, 0.1);
    CHECK_THROWS_AS(beta_to_alpha(m, skew, beta), EvenHarmonic);
  }
}

TEST_CASE("breather synthesis at N = 9") {
  BreatherMedium m = canonical();
  auto modes = modes_up_to(m, 9);
  Nonlinearity nl = make_cubic(1.0);
  BreatherSynthesis syn = synthesize_breather(m, modes, nl, 9);
  CHECK(syn.converged);
  CHECK(syn.residual_inf <= 1e-10);
  double amp = 0;
  for (auto v : syn.coeffs.alpha) amp = std::max(amp, std::abs(v));
  CHECK(amp > 1e-3);  // nontrivial branch

  SECTION("zero coefficients solve trivially") {
    TraceCoefficients zero;
    zero.N = 9;
    zero.alpha.assign(5, cd(0, 0));
    auto R = breather_residual(m, modes, nl, zero);
    for (auto r : R) CHECK(std::abs(r) == 0.0);
  }

  SECTION("cubic scaling law: s alpha solves at gamma / s^2") {
    double s = 0.5;
    TraceCoefficients scaled = syn.coeffs;
    for (auto& v : scaled.alpha) v *= s;
    Nonlinearity nl2 = make_cubic(1.0 / (s * s));
    auto R = breather_residual(m, modes, nl2, scaled);
    for (auto r : R) CHECK(std::abs(r) <= 1e-9);
  }

  SECTION("field evaluation") {
    BreatherField field{m, modes, syn.coeffs};
    // u(0, t) reproduces the trace alpha(t)
    for (int j = 0; j < 16; ++j) {
      double t = m.T * j / 16.0;
      double alpha_t = breather_detail::synth(syn.coeffs.alpha, m.omega, m.T, t);
      CHECK(field.value(0.0, t) == Catch::Approx(alpha_t).margin(1e-12));
      CHECK(field.imag_defect(0.7, t) <= 1e-12);
      // T/2-antiperiodicity is structural for odd harmonics
      CHECK(field.value(1.3, t + 0.5 * m.T) == Catch::Approx(-field.value(1.3, t)).margin(1e-12));
    }
    // decay envelope over one 4pi super-cell
    double amp0 = 0, amp4 = 0;
    for (int j = 0; j <= 64; ++j) {
      double t = m.T * j / 64.0;
      amp0 = std::max(amp0, std::abs(field.value(0.0, t)));
      amp4 = std::max(amp4, std::abs(field.value(4 * M_PI, t)));
    }
    double rho = m.decay_rate();
    CHECK(amp4 / amp0 == Catch::Approx(std::exp(-4 * M_PI * rho)).epsilon(0.05));
  }

  SECTION("zero coefficients give an identically zero field") {
    TraceCoefficients zero;
    zero.N = 9;
    zero.alpha.assign(5, cd(0, 0));
    BreatherField field{m, modes, zero};
    for (double x : {0.0, 1.0, 7.0})
      for (double t : {0.0, 1.0, 4.0}) CHECK(field.value(x, t) == 0.0);
  }
}

TEST_CASE("breather round trip error refines with the grid") {
  BreatherMedium m = canonical();
  auto modes = modes_up_to(m, 9);
  Nonlinearity nl = make_cubic(1.0);
  BreatherSynthesis syn = synthesize_breather(m, modes, nl, 9);
  REQUIRE(syn.converged);
  BreatherField field{m, modes, syn.coeffs};
  RoundtripReport r1 = breather_roundtrip_check(field, nl, M_PI / 16, 4 * M_PI);
  RoundtripReport r2 = breather_roundtrip_check(field, nl, M_PI / 32, 4 * M_PI);
  CHECK(r1.period_error / r2.period_error >= 1.5);
  CHECK(r1.antiperiod_error / r2.antiperiod_error >= 1.5);
  CHECK(r2.decay_ratio == Catch::Approx(r2.decay_expected).epsilon(0.05));
}
