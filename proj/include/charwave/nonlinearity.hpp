#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "charwave/errors.hpp"
#include "charwave/potential.hpp"
#include "charwave/quadrature.hpp"

namespace charwave {

enum class Monotone { increasing, decreasing };

// The boundary nonlinearity triple (f, f^{-1}, F) with
// F(s) = s f(s) - int_0^s f.
struct Nonlinearity {
  std::function<double(double)> f;
  std::function<double(double)> f_inv;
  std::function<double(double)> F;
  std::function<double(double)> df;  // f' where available (used by diagnostics)
  Monotone direction = Monotone::increasing;
  std::optional<double> growth_A, growth_B;  // (A4)-style constants, user-supplied
  std::string label;

  bool increasing() const { return direction == Monotone::increasing; }
};

namespace detail {

inline void validate_homeomorphism(Nonlinearity& nl, double range = 10.0) {
  const int n = 64;
  double prev = nl.f(-range);
  int sign = 0;
  for (int i = 1; i <= n; ++i) {
    double y = -range + 2 * range * i / n;
    double fy = nl.f(y);
    int s = fy > prev ? 1 : (fy < prev ? -1 : 0);
    if (s == 0) throw NotAHomeomorphism(nl.label + ": f not strictly monotone near y = " + std::to_string(y));
    if (sign == 0) sign = s;
    if (s != sign) throw NotAHomeomorphism(nl.label + ": f changes monotonicity");
    prev = fy;
    double rt = nl.f(nl.f_inv(fy));
    if (std::abs(rt - fy) > 1e-10 * (1.0 + std::abs(fy)))
      throw NotAHomeomorphism(nl.label + ": f(f_inv(y)) round trip failed at y = " + std::to_string(fy));
  }
  nl.direction = sign > 0 ? Monotone::increasing : Monotone::decreasing;
}

}  // namespace detail

// f(y) = (gamma/2) y^3, F(s) = (3/8) gamma s^4.
inline Nonlinearity make_cubic(double gamma) {
  if (gamma == 0) throw ConfigInvalid("cubic nonlinearity requires gamma != 0");
  Nonlinearity nl;
  nl.label = "cubic";
  nl.f = [gamma](double y) { return 0.5 * gamma * y * y * y; };
  nl.f_inv = [gamma](double w) { return std::cbrt(2.0 * w / gamma); };
  nl.F = [gamma](double s) { return 0.375 * gamma * s * s * s * s; };
  nl.df = [gamma](double y) { return 1.5 * gamma * y * y; };
  detail::validate_homeomorphism(nl);
  return nl;
}

inline Nonlinearity make_linear(double a) {
  if (a == 0) throw ConfigInvalid("linear nonlinearity requires a != 0");
  Nonlinearity nl;
  nl.label = "linear";
  nl.f = [a](double y) { return a * y; };
  nl.f_inv = [a](double w) { return w / a; };
  nl.F = [a](double s) { return 0.5 * a * s * s; };
  nl.df = [a](double) { return a; };
  nl.growth_A = std::abs(a);
  nl.growth_B = 0.0;
  detail::validate_homeomorphism(nl);
  return nl;
}

// Custom closures; f_inv falls back to bisection on a bracketed interval,
// F to adaptive quadrature of s f(s) - int_0^s f.
inline Nonlinearity make_custom(std::function<double(double)> f,
                                std::function<double(double)> f_inv = {},
                                std::function<double(double)> df = {},
                                const std::string& label = "custom") {
  if (!f) throw ConfigInvalid("custom nonlinearity requires f");
  Nonlinearity nl;
  nl.label = label;
  nl.f = f;
  if (f_inv) {
    nl.f_inv = std::move(f_inv);
  } else {
    nl.f_inv = [f](double w) {
      double hi = 1.0;
      int guard = 0;
      while (std::min(f(-hi), f(hi)) > w || std::max(f(-hi), f(hi)) < w) {
        hi *= 2;
        if (++guard > 200) throw QuadratureFailure("custom f_inv: bracket search failed");
      }
      return bisect([&](double y) { return f(y) - w; }, -hi, hi, 1e-13);
    };
  }
  nl.F = [f](double s) {
    return s * f(s) - integrate_adaptive(f, 0.0, s, 1e-12 * (1.0 + std::abs(s)));
  };
  nl.df = std::move(df);
  detail::validate_homeomorphism(nl);
  return nl;
}

// The cutoff f_K: equal to f on [-K, K], affine with slope 1 outside.
// Satisfies the linear-growth condition with A = 1.
inline Nonlinearity cutoff(const Nonlinearity& base, double K) {
  if (!base.increasing()) throw ConfigInvalid("cutoff requires an increasing nonlinearity");
  if (!(K > 0)) throw ConfigInvalid("cutoff requires K > 0");
  Nonlinearity nl;
  nl.label = base.label + "_cutoff";
  double fK = base.f(K), fmK = base.f(-K), FK = base.F(K), FmK = base.F(-K);
  auto f = base.f;
  auto f_inv = base.f_inv;
  auto F = base.F;
  auto df = base.df;
  nl.f = [f, K, fK, fmK](double y) {
    if (y > K) return y - K + fK;
    if (y < -K) return y + K + fmK;
    return f(y);
  };
  nl.f_inv = [f_inv, K, fK, fmK](double w) {
    if (w > fK) return w - fK + K;
    if (w < fmK) return w - fmK - K;
    return f_inv(w);
  };
  nl.F = [F, K, FK, FmK](double s) {
    if (s > K) return FK + 0.5 * (s * s - K * K);
    if (s < -K) return FmK + 0.5 * (s * s - K * K);
    return F(s);
  };
  if (df)
    nl.df = [df, K](double y) { return std::abs(y) > K ? 1.0 : df(y); };
  nl.direction = Monotone::increasing;
  nl.growth_A = 1.0;
  nl.growth_B = std::max(std::abs(fK - K), std::abs(fmK + K));
  return nl;
}

// Lemma-5.2-style a-priori bound: C = F(u1(0)) + half energy of the data up
// to kappa^{-1}(T); returns the smallest K with F(+-K) >= C.
inline double energy_bound_K(const Nonlinearity& nl, const std::function<double(double)>& u0_prime,
                             const std::function<double(double)>& u1, const Potential& pot,
                             const CoordinateMap& map, double T, double k_floor = 1e-8) {
  double x_end = T >= map.z_max() ? pot.x_max : map.kappa_inverse(T);
  double half_energy = 0.0;
  // Integrate piecewise so V's jumps stay at panel boundaries.
  double lo = 0.0;
  for (const auto& p : pot.pieces) {
    double hi = std::min(p.x1, x_end);
    if (hi <= lo) break;
    half_energy += 0.5 * integrate_adaptive(
                             [&](double x) {
                               double v = p.is_const ? p.value : p.V(x);
                               double w1 = u1(x), w0 = u0_prime(x);
                               return v * w1 * w1 + w0 * w0;
                             },
                             lo, hi, 1e-12);
    lo = hi;
  }
  double C = nl.F(u1(0.0)) + half_energy;
  if (C <= 0) return k_floor;
  double hi = 1.0;
  int guard = 0;
  while (std::min(nl.F(hi), nl.F(-hi)) < C) {
    hi *= 2;
    if (++guard > 200) throw QuadratureFailure("energy_bound_K: F does not reach C");
  }
  double K = bisect([&](double k) { return std::min(nl.F(k), nl.F(-k)) - C; }, 0.0, hi, 1e-13);
  return std::max(K, k_floor);
}

// Residual of the chain-rule identity F(g(t1)) - F(g(t0)) = int g (f(g))'.
// Trapezoid quadrature at n+1 uniform samples.
inline double chain_rule_check(const Nonlinearity& nl, const std::function<double(double)>& g,
                               const std::function<double(double)>& g_prime, double t0, double t1,
                               int n) {
  double h = (t1 - t0) / n;
  std::vector<double> integrand(n + 1);
  for (int i = 0; i <= n; ++i) {
    double t = t0 + i * h;
    double gt = g(t);
    double dfg;
    if (nl.df) {
      dfg = nl.df(gt) * g_prime(t);
    } else {
      double eps = std::max(1e-6 * h, 1e-9);
      dfg = (nl.f(g(t + eps)) - nl.f(g(t - eps))) / (2 * eps);
    }
    integrand[i] = gt * dfg;
  }
  double lhs = nl.F(g(t1)) - nl.F(g(t0));
  return std::abs(lhs - trapezoid(integrand, h));
}

}  // namespace charwave
