#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "charwave/errors.hpp"
#include "charwave/nonlinearity.hpp"
#include "charwave/triangles.hpp"

namespace charwave {

// Impedance data of a wave-speed jump at z0. gamma is the harmonic-type
// weight from the jump relation u_z(z0+)/c(z0+) = u_z(z0-)/c(z0-).
struct InterfaceCoefficients {
  double z0 = 0;
  double c_minus = 1, c_plus = 1;
  double gamma = 0.5;

  static InterfaceCoefficients make(double z0, double c_minus, double c_plus) {
    return {z0, c_minus, c_plus, 1.0 / (1.0 / c_minus + 1.0 / c_plus)};
  }
};

struct JumpStepResult {
  double ut;        // common u_t at the interface
  double uz_minus;  // one-sided u_z on the left
  double uz_plus;   // one-sided u_z on the right
};

// Algebraic transmission step. w_minus_in = (u_t - u_z)(z0-,.) arriving from
// the left, w_plus_in = (u_t + u_z)(z0+,.) arriving from the right. The
// output satisfies the jump condition exactly.
inline JumpStepResult jump_transmission_step(const InterfaceCoefficients& c, double w_minus_in,
                                             double w_plus_in) {
  double ut = c.gamma * (w_minus_in / c.c_minus + w_plus_in / c.c_plus);
  return {ut, ut - w_minus_in, w_plus_in - ut};
}

// Homogeneous Dirichlet wall: u_t = 0, so the incoming right-moving invariant
// reflects with inverted sign.
inline double dirichlet_wall_step(double w_minus_in) { return -w_minus_in; }

// Boundary trace of the nonlinear condition: b = u(0,.), d = f(u_t(0,.)),
// b' = f^{-1}(d).
struct BoundaryTrace {
  std::vector<double> t, b, d, bprime;
};

// ---------------------------------------------------------------------------
// Fast-path boundary ODE: d'(t) = (w_in(t) - f^{-1}(d))/c0, b' = f^{-1}(d).
// Monotone implicit trapezoid with substeps. f^{-1} may have unbounded slope
// at 0 (cubic f), where explicit integrators ring around the extinction
// point; the implicit update map x + eta f^{-1}(x) is strictly increasing, so
// each substep has a unique solution and d = 0 is reached and held exactly.
// ---------------------------------------------------------------------------
struct BoundaryOdePoint {
  double d, b;
};

inline BoundaryOdePoint boundary_ode_step(const Nonlinearity& nl, double c0,
                                          const std::function<double(double)>& w_in, double t,
                                          double dt, BoundaryOdePoint y, int substeps) {
  double h = dt / substeps;
  for (int s = 0; s < substeps; ++s) {
    double ts = t + s * h;
    double eta = 0.5 * h / c0;
    double fi_n = nl.f_inv(y.d);
    double rhs = y.d + eta * (w_in(ts) + w_in(ts + h)) - eta * fi_n;
    // Solve G(x) = x + eta f^{-1}(x) - rhs = 0; strictly increasing for
    // increasing f. (For the ill-posed demo path this picks some root.)
    auto G = [&](double x) { return x + eta * nl.f_inv(x) - rhs; };
    double half_width = std::abs(y.d - rhs) + eta * (std::abs(fi_n) + 1.0) + 1e-30;
    double lo = rhs - half_width, hi = rhs + half_width;
    int guard = 0;
    while (G(lo) > 0 || G(hi) < 0) {
      half_width *= 2;
      lo = rhs - half_width;
      hi = rhs + half_width;
      if (++guard > 120) throw NoConvergence("boundary ODE: implicit bracket search failed");
    }
    double d_next;
    if (G(lo) == 0) {
      d_next = lo;
    } else if (G(hi) == 0) {
      d_next = hi;
    } else {
      for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        double gm = G(mid);
        if (gm == 0) {
          lo = hi = mid;
          break;
        }
        (gm < 0 ? lo : hi) = mid;
      }
      d_next = 0.5 * (lo + hi);
    }
    y.b += 0.5 * h * (fi_n + nl.f_inv(d_next));
    y.d = d_next;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Jump-interface solve on a triangle pair at z0 (Lemma 4.x): fixed point for
// b' with Phi_+/- evaluations, contractive in the weighted norm
// sup e^{-mu t} |b'(t)| once mu > beta.
// ---------------------------------------------------------------------------
struct JumpSolveOptions {
  double tol = 1e-11;
  int max_outer = 200;
  double mu_factor = 2.0;  // mu = mu_factor * beta (mu_factor > 1)
  double inner_tol = 1e-13;
};

struct JumpSolveResult {
  BoundaryTrace trace;
  TriangleField left, right;
  int iterations = 0;
  double beta = 0, mu = 0;
  std::vector<double> weighted_updates;
};

inline JumpSolveResult jump_trace_solve(double z0, double t0, double r, double dz,
                                        const CauchyData& left_data, const CauchyData& right_data,
                                        const SidedFn& lambda, double lambda_sup, double c_minus,
                                        double c_plus, const JumpSolveOptions& opts = {}) {
  Triangle tl{z0, t0, r, TriangleKind::half_minus, dz};
  Triangle tr{z0, t0, r, TriangleKind::half_plus, dz};
  int L = tl.levels();
  if (std::abs(left_data.u0.back() - right_data.u0.front()) > 1e-10 ||
      std::abs(left_data.u1.back() - right_data.u1.front()) > 1e-10)
    throw IncompatibleData("u0/u1 must be continuous at the interface");

  auto fc = fine_constants(r, lambda_sup);
  double mu = std::max(opts.mu_factor * fc.beta, 1.0 / r);

  auto coeffs = InterfaceCoefficients::make(z0, c_minus, c_plus);
  double b0 = right_data.u0.front();

  std::vector<double> bp(L + 1, right_data.u1.front());
  std::vector<double> b(L + 1), bp_new(L + 1);

  JumpSolveResult out;
  TriangleField fl, fr;
  PicardOptions popts;
  popts.tol = opts.inner_tol;
  for (int it = 1; it <= opts.max_outer; ++it) {
    b = trapezoid_prefix(bp, dz);
    for (double& v : b) v += b0;
    auto [pl, rl] = dirichlet_half_solve(tl, b, bp, left_data, lambda, lambda_sup, popts);
    auto [pr, rr] = dirichlet_half_solve(tr, b, bp, right_data, lambda, lambda_sup, popts);
    for (int n = 0; n <= L; ++n) {
      double phim_z = pl.uz[n].back();   // one-sided u_z(z0-, t)
      double phip_z = pr.uz[n].front();  // one-sided u_z(z0+, t)
      bp_new[n] = coeffs.gamma * ((bp[n] - phim_z) / c_minus + (bp[n] + phip_z) / c_plus);
    }
    double update = 0;
    for (int n = 0; n <= L; ++n)
      update = std::max(update, std::exp(-mu * (n * dz)) * std::abs(bp_new[n] - bp[n]));
    out.weighted_updates.push_back(update);
    bp = bp_new;
    fl = std::move(pl);
    fr = std::move(pr);
    out.iterations = it;
    if (update <= opts.tol) break;
    if (it == opts.max_outer)
      throw NoConvergence("jump_trace_solve: weighted update " + std::to_string(update) +
                          " above tol after " + std::to_string(it) + " iterations");
  }
  out.beta = fc.beta;
  out.mu = mu;
  out.left = std::move(fl);
  out.right = std::move(fr);
  out.trace.b = trapezoid_prefix(bp, dz);
  for (double& v : out.trace.b) v += b0;
  out.trace.bprime = bp;
  out.trace.t.resize(L + 1);
  for (int n = 0; n <= L; ++n) out.trace.t[n] = t0 + n * dz;
  return out;
}

// ---------------------------------------------------------------------------
// Nonlinear boundary solve at z0 = 0 (Lemma 4.x): d'(t) = Phi_+(b_d,...)_z / c(0).
// Fast path reduces to the scalar ODE when lambda vanishes near the boundary;
// the general path iterates d -> T(d) with Phi_+ evaluations, with optional
// damping halved on oscillation.
// ---------------------------------------------------------------------------
struct BoundarySolveOptions {
  double tol = 1e-11;
  int max_outer = 400;
  double relax = 1.0;
  int ode_substeps = 4;
  bool allow_illposed = false;
  bool force_general = false;
  double inner_tol = 1e-13;
};

struct BoundarySolveResult {
  BoundaryTrace trace;
  TriangleField field;
  bool fast_path = false;
  int iterations = 0;
  double final_update = 0;
};

inline BoundarySolveResult boundary_trace_solve(const Triangle& tri, const CauchyData& data,
                                                const Nonlinearity& nl, const SidedFn& lambda,
                                                double lambda_sup, double c0,
                                                const BoundarySolveOptions& opts = {}) {
  if (tri.kind != TriangleKind::half_plus)
    throw MisalignedGrid("boundary_trace_solve expects a half_plus triangle at the boundary");
  if (!nl.increasing() && !opts.allow_illposed)
    throw DecreasingNonlinearity(
        "boundary nonlinearity is decreasing; the initial value problem is ill-posed "
        "(multiple solutions exist). Pass allow_illposed to proceed for demos.");

  const int L = tri.levels();
  const double dz = tri.dz, t0 = tri.base_time;
  BoundarySolveResult out;
  out.trace.t.resize(L + 1);
  for (int n = 0; n <= L; ++n) out.trace.t[n] = t0 + n * dz;

  bool fast = lambda_sup == 0.0 && !opts.force_general;
  if (fast) {
    // Incoming invariant is transported exactly from the base data.
    std::vector<double> w_in(L + 1), q = trapezoid_prefix(data.u1, dz);
    for (int j = 0; j <= L; ++j) w_in[j] = data.u1[j] + data.du0[j];
    auto w_fn = [&](double t) {
      double s = (t - t0) / dz;
      int j = std::min(static_cast<int>(s), L - 1);
      double frac = s - j;
      return (1 - frac) * w_in[j] + frac * w_in[j + 1];
    };
    BoundaryOdePoint y{nl.f(data.u1.front()), data.u0.front()};
    out.trace.d.assign(L + 1, 0.0);
    out.trace.b.assign(L + 1, 0.0);
    out.trace.bprime.assign(L + 1, 0.0);
    out.trace.d[0] = y.d;
    out.trace.b[0] = y.b;
    out.trace.bprime[0] = nl.f_inv(y.d);
    for (int n = 0; n < L; ++n) {
      y = boundary_ode_step(nl, c0, w_fn, t0 + n * dz, dz, y, opts.ode_substeps);
      out.trace.d[n + 1] = y.d;
      out.trace.b[n + 1] = y.b;
      out.trace.bprime[n + 1] = nl.f_inv(y.d);
    }

    // Field reconstruction from exact transport plus the boundary emission.
    TriangleField f;
    f.tri = tri;
    f.u.resize(L + 1);
    f.ut.resize(L + 1);
    f.uz.resize(L + 1);
    for (int n = 0; n <= L; ++n) {
      int w = tri.width(n);
      f.u[n].assign(w, 0.0);
      f.ut[n].assign(w, 0.0);
      f.uz[n].assign(w, 0.0);
      for (int i = 0; i < w; ++i) {
        double wp = w_in[i + n];
        double pp = data.u0[i + n] + q[i + n];
        double wm, pm;
        if (i >= n) {
          wm = data.u1[i - n] - data.du0[i - n];
          pm = data.u0[i - n] - q[i - n];
        } else {
          wm = 2.0 * out.trace.bprime[n - i] - w_in[n - i];
          pm = 2.0 * out.trace.b[n - i] - (data.u0[n - i] + q[n - i]);
        }
        f.ut[n][i] = 0.5 * (wp + wm);
        f.uz[n][i] = 0.5 * (wp - wm);
        f.u[n][i] = 0.5 * (pp + pm);
      }
    }
    out.field = std::move(f);
    out.fast_path = true;
    out.iterations = 1;
    return out;
  }

  // General path: outer fixed point on d with Phi_+ evaluations.
  std::vector<double> d(L + 1, nl.f(data.u1.front()));
  std::vector<double> bp(L + 1), b(L + 1), d_new(L + 1), phi_z(L + 1);
  double relax = opts.relax;
  double prev_update = std::numeric_limits<double>::infinity();
  int worse_streak = 0;
  TriangleField field;
  PicardOptions popts;
  popts.tol = opts.inner_tol;
  for (int it = 1; it <= opts.max_outer; ++it) {
    for (int n = 0; n <= L; ++n) bp[n] = nl.f_inv(d[n]);
    b = trapezoid_prefix(bp, dz);
    for (double& v : b) v += data.u0.front();
    auto [phi, rep] = dirichlet_half_solve(tri, b, bp, data, lambda, lambda_sup, popts);
    for (int n = 0; n <= L; ++n) phi_z[n] = phi.uz[n].front();
    auto prefix = trapezoid_prefix(phi_z, dz);
    double update = 0;
    for (int n = 0; n <= L; ++n) {
      double target = d[0] + prefix[n] / c0;
      d_new[n] = (1 - relax) * d[n] + relax * target;
      update = std::max(update, std::abs(d_new[n] - d[n]));
    }
    d = d_new;
    field = std::move(phi);
    out.iterations = it;
    out.final_update = update;
    if (update <= opts.tol) break;
    if (update > prev_update && ++worse_streak >= 2) {
      relax = std::max(0.5 * relax, 1.0 / 64.0);
      worse_streak = 0;
    }
    prev_update = update;
    if (it == opts.max_outer)
      throw NoConvergence("boundary_trace_solve: update " + std::to_string(update) +
                          " above tol after " + std::to_string(it) + " iterations");
  }
  out.trace.d = d;
  out.trace.bprime.resize(L + 1);
  for (int n = 0; n <= L; ++n) out.trace.bprime[n] = nl.f_inv(d[n]);
  out.trace.b = trapezoid_prefix(out.trace.bprime, dz);
  for (double& v : out.trace.b) v += data.u0.front();
  out.field = std::move(field);
  return out;
}

}  // namespace charwave
