#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "charwave/errors.hpp"

namespace charwave {

// Composite trapezoid over uniformly spaced samples.
inline double trapezoid(const std::vector<double>& f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

// Cumulative trapezoid; out[0] = 0, out[i] = integral up to sample i.
inline std::vector<double> trapezoid_prefix(const std::vector<double>& f, double h) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  return out;
}

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0) throw QuadratureFailure("adaptive Simpson recursion limit");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson; tolerant of interior kinks (subdivision resolves them).
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-10, int max_depth = 48) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Fixed-order Gauss-Legendre nodes/weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes, weights;
};

inline const GaussRule& gauss5() {
  static const GaussRule r = {
      {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640},
      {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
       0.2369268850561891}};
  return r;
}

// Composite Gauss-Legendre (5-point per panel), order 10 on smooth panels.
inline double integrate_gauss(const std::function<double(double)>& f, double a, double b,
                              int panels) {
  const GaussRule& r = gauss5();
  double h = (b - a) / panels, total = 0;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h, mid = lo + 0.5 * h;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      total += r.weights[i] * f(mid + 0.5 * h * r.nodes[i]);
  }
  return total * 0.5 * h;
}

// Monotone scalar root solve by bisection; g must change sign on [lo, hi].
inline double bisect(const std::function<double(double)>& g, double lo, double hi,
                     double tol = 1e-13, int max_iter = 200) {
  double glo = g(lo), ghi = g(hi);
  if (glo == 0) return lo;
  if (ghi == 0) return hi;
  if ((glo < 0) == (ghi < 0)) throw QuadratureFailure("bisect: no sign change on bracket");
  for (int i = 0; i < max_iter && hi - lo > tol * (1.0 + std::abs(lo) + std::abs(hi)); ++i) {
    double mid = 0.5 * (lo + hi);
    double gm = g(mid);
    if (gm == 0) return mid;
    if ((gm < 0) == (glo < 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace charwave
