#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "charwave/errors.hpp"
#include "charwave/potential.hpp"
#include "charwave/quadrature.hpp"
#include "charwave/util.hpp"

namespace charwave {

enum class TriangleKind { full, half_plus, half_minus };

// Characteristic triangle Delta(z0, t0, r) on a grid with dt = dz, so
// unit-slope characteristics connect nodes exactly.
struct Triangle {
  double center_z = 0;
  double base_time = 0;
  double radius = 0;
  TriangleKind kind = TriangleKind::full;
  double dz = 0;

  int levels() const {
    double L = radius / dz;
    int n = static_cast<int>(std::llround(L));
    if (n < 1 || std::abs(L - n) > 1e-9)
      throw MisalignedGrid("triangle radius " + std::to_string(radius) +
                           " is not an integer multiple of dz = " + std::to_string(dz));
    return n;
  }

  // Number of nodes at a given time level.
  int width(int level) const {
    int L = levels();
    return kind == TriangleKind::full ? 2 * (L - level) + 1 : (L - level) + 1;
  }

  double level_z_begin(int level) const {
    int L = levels();
    return kind == TriangleKind::half_plus ? center_z : center_z - (L - level) * dz;
  }

  double node_z(int level, int i) const { return level_z_begin(level) + i * dz; }
  double level_t(int level) const { return base_time + level * dz; }
};

// Cauchy data sampled on the triangle base: u0 (values + derivative), u1.
struct CauchyData {
  std::vector<double> u0, du0, u1;
};

struct TriangleField {
  Triangle tri;
  std::vector<std::vector<double>> u, ut, uz;

  double trace_u(int level) const;  // value at z = center (half triangles)
};

struct PicardReport {
  int iterations = 0;
  double q = 0;
  double initial_norm = 0;
  double final_update = 0;
};

// Lemma 3.7 constants for the half-triangle Dirichlet operators.
struct FineConstants {
  double q, alpha, beta;
};

inline FineConstants fine_constants(double r, double lambda_sup) {
  double q = r * lambda_sup;
  if (q >= 1.0) throw ContractionViolated("r*||lambda|| = " + std::to_string(q) + " >= 1");
  return {q, 2.0 * lambda_sup / (4.0 - q), 4.0 * lambda_sup / ((2.0 - q) * (4.0 - q))};
}

// One-sided coefficient profile; `side` gives the limit direction at jumps.
using SidedFn = std::function<double(double z, Side side)>;

inline SidedFn constant_lambda(double v) {
  return [v](double, Side) { return v; };
}

namespace tri_detail {

// Shared reconstruction core. Takes the source g sampled per node with both
// one-sided values (g_r used along left-moving characteristics whose origin
// lies to the right, g_l along right-moving ones) and assembles u, ut, uz
// from the d'Alembert representation.
struct Workspace {
  Triangle tri;
  int L;
  CauchyData data;
  std::vector<double> U1;  // trapezoid prefix of u1 over the base

  explicit Workspace(const Triangle& t, const CauchyData& d) : tri(t), L(t.levels()), data(d) {
    if (static_cast<int>(d.u0.size()) != t.width(0) || d.du0.size() != d.u0.size() ||
        d.u1.size() != d.u0.size())
      throw MisalignedGrid("Cauchy data size does not match triangle base");
    U1 = trapezoid_prefix(d.u1, t.dz);
  }
};

// u_z update of eq. (3.x): data part plus the two characteristic integrals.
// On a full triangle, node (n, i): left char hits level m at index i+2(n-m),
// right char at index i.
inline void apply_fixed_point(const Workspace& ws, const std::vector<std::vector<double>>& uz_in,
                              const std::vector<std::vector<double>>& lam_r,
                              const std::vector<std::vector<double>>& lam_l,
                              const std::function<double(int, int)>& extra_uz,
                              std::vector<std::vector<double>>& uz_out) {
  const double dz = ws.tri.dz;
  for (int n = 0; n <= ws.L; ++n) {
    for (int i = 0; i < ws.tri.width(n); ++i) {
      int jp = i + 2 * n;  // base index of z + t~
      int jm = i;          // base index of z - t~
      double val = 0.5 * (ws.data.du0[jp] + ws.data.du0[jm]) +
                   0.5 * (ws.data.u1[jp] - ws.data.u1[jm]);
      if (n > 0) {
        double il = 0, ir = 0;  // trapezoid along each characteristic
        for (int m = 0; m <= n; ++m) {
          double w = (m == 0 || m == n) ? 0.5 : 1.0;
          int kl = i + 2 * (n - m);
          double vl = uz_in[m][kl] + (extra_uz ? extra_uz(m, kl) : 0.0);
          double vr = uz_in[m][i] + (extra_uz ? extra_uz(m, i) : 0.0);
          il += w * lam_r[m][kl] * vl;
          ir += w * lam_l[m][i] * vr;
        }
        val += 0.5 * dz * (-il + ir);
      }
      uz_out[n][i] = val;
    }
  }
}

}  // namespace tri_detail

inline double TriangleField::trace_u(int level) const {
  if (tri.kind == TriangleKind::half_plus) return u[level].front();
  if (tri.kind == TriangleKind::half_minus) return u[level].back();
  return u[level][(tri.width(level) - 1) / 2];
}

// Exact d'Alembert-with-source evaluation (Thm. 3.x formula) on a full
// triangle: closed formula at grid nodes, triangle integral by nodal
// trapezoid sums (order 2).
inline TriangleField dalembert_solve(const Triangle& tri, const CauchyData& data,
                                     const std::function<double(double, double)>& g = {}) {
  if (tri.kind != TriangleKind::full)
    throw MisalignedGrid("dalembert_solve expects a full triangle");
  tri_detail::Workspace ws(tri, data);
  const int L = ws.L;
  const double dz = tri.dz;

  std::vector<std::vector<double>> gs(L + 1);
  std::vector<std::vector<double>> gP(L + 1);  // row prefixes for cone integrals
  for (int n = 0; n <= L; ++n) {
    gs[n].assign(tri.width(n), 0.0);
    if (g)
      for (int i = 0; i < tri.width(n); ++i) gs[n][i] = g(tri.node_z(n, i), tri.level_t(n));
    gP[n] = trapezoid_prefix(gs[n], dz);
  }

  TriangleField out;
  out.tri = tri;
  out.u.resize(L + 1);
  out.ut.resize(L + 1);
  out.uz.resize(L + 1);
  const bool has_g = static_cast<bool>(g);
  for (int n = 0; n <= L; ++n) {
    out.u[n].assign(tri.width(n), 0.0);
    out.ut[n].assign(tri.width(n), 0.0);
    out.uz[n].assign(tri.width(n), 0.0);
    for (int i = 0; i < tri.width(n); ++i) {
      int jp = i + 2 * n, jm = i;
      double il = 0, ir = 0, cone = 0;
      if (has_g) {
        for (int m = 0; m <= n; ++m) {
          double w = (m == 0 || m == n) ? 0.5 : 1.0;
          il += w * gs[m][i + 2 * (n - m)];
          ir += w * gs[m][i];
          // Row of the cone Delta(z, t0, t~) at level m: indices [i, i+2(n-m)].
          cone += w * (gP[m][i + 2 * (n - m)] - gP[m][i]);
        }
      }
      il *= dz;
      ir *= dz;
      cone *= dz;
      out.u[n][i] = 0.5 * (data.u0[jp] + data.u0[jm]) + 0.5 * (ws.U1[jp] - ws.U1[jm]) + 0.5 * cone;
      out.ut[n][i] = 0.5 * (data.du0[jp] - data.du0[jm]) + 0.5 * (data.u1[jp] + data.u1[jm]) +
                     0.5 * (il + ir);
      out.uz[n][i] = 0.5 * (data.du0[jp] + data.du0[jm]) + 0.5 * (data.u1[jp] - data.u1[jm]) +
                     0.5 * (il - ir);
    }
  }
  return out;
}

struct PicardOptions {
  double tol = 1e-12;
  int extra_iterations = 40;          // margin beyond the contraction estimate
  bool opposite_factorization = false;
};

namespace tri_detail {

// Samples lambda one-sided per characteristic family. lam_r[n][i] is the
// value seen by left-moving characteristics (origin to the right).
inline void sample_lambda(const Triangle& tri, const SidedFn& lambda,
                          std::vector<std::vector<double>>& lam_r,
                          std::vector<std::vector<double>>& lam_l) {
  int L = tri.levels();
  lam_r.resize(L + 1);
  lam_l.resize(L + 1);
  for (int n = 0; n <= L; ++n) {
    lam_r[n].assign(tri.width(n), 0.0);
    lam_l[n].assign(tri.width(n), 0.0);
    for (int i = 0; i < tri.width(n); ++i) {
      double z = tri.node_z(n, i);
      lam_r[n][i] = lambda ? lambda(z, Side::right) : 0.0;
      lam_l[n][i] = lambda ? lambda(z, Side::left) : 0.0;
    }
  }
}

struct PicardCore {
  TriangleField field;
  PicardReport report;
  std::vector<std::vector<double>> uz;  // converged fixed-point variable
};

// Banach iteration for u_z (Cor. 3.x) with source g = -lambda (u_z + extra).
inline PicardCore picard_core(const Triangle& tri, const CauchyData& data, const SidedFn& lambda,
                              double lambda_sup, const std::function<double(int, int)>& extra_uz,
                              const PicardOptions& opts) {
  Workspace ws(tri, data);
  const int L = ws.L;
  double q = tri.radius * lambda_sup;
  if (q >= 1.0)
    throw ContractionViolated("q = r*||lambda|| = " + std::to_string(q) + " >= 1");

  std::vector<std::vector<double>> lam_r, lam_l;
  sample_lambda(tri, lambda, lam_r, lam_l);

  std::vector<std::vector<double>> prev(L + 1), next(L + 1);
  for (int n = 0; n <= L; ++n) {
    prev[n].assign(tri.width(n), 0.0);
    next[n].assign(tri.width(n), 0.0);
  }

  PicardReport rep;
  rep.q = q;
  double update = 0;
  int max_iter = opts.extra_iterations;
  for (int it = 1;; ++it) {
    apply_fixed_point(ws, prev, lam_r, lam_l, extra_uz, next);
    update = 0;
    for (int n = 0; n <= L; ++n) update = std::max(update, sup_diff(prev[n], next[n]));
    std::swap(prev, next);
    rep.iterations = it;
    if (it == 1) {
      rep.initial_norm = update;
      if (q > 0 && rep.initial_norm > opts.tol)
        max_iter = static_cast<int>(std::ceil(std::log(opts.tol / rep.initial_norm) / std::log(q))) +
                   opts.extra_iterations;
    }
    if (update <= opts.tol || q == 0.0) break;
    if (it >= max_iter)
      throw NoConvergence("picard triangle solve stalled at update " + std::to_string(update));
  }
  rep.final_update = update;

  // Reconstruct (u, ut, uz) from the converged u_z via the closed formula
  // with g = -lambda (u_z + extra).
  std::vector<std::vector<double>> g_r(L + 1), g_l(L + 1), g_mean_prefix(L + 1);
  for (int n = 0; n <= L; ++n) {
    g_r[n].assign(tri.width(n), 0.0);
    g_l[n].assign(tri.width(n), 0.0);
    std::vector<double> g_mean(tri.width(n), 0.0);
    for (int i = 0; i < tri.width(n); ++i) {
      double v = prev[n][i] + (extra_uz ? extra_uz(n, i) : 0.0);
      g_r[n][i] = -lam_r[n][i] * v;
      g_l[n][i] = -lam_l[n][i] * v;
      g_mean[i] = 0.5 * (g_r[n][i] + g_l[n][i]);
    }
    g_mean_prefix[n] = trapezoid_prefix(g_mean, tri.dz);
  }

  PicardCore out;
  out.report = rep;
  out.uz = prev;
  out.field.tri = tri;
  out.field.u.resize(L + 1);
  out.field.ut.resize(L + 1);
  out.field.uz = prev;
  for (int n = 0; n <= L; ++n) {
    out.field.u[n].assign(tri.width(n), 0.0);
    out.field.ut[n].assign(tri.width(n), 0.0);
    for (int i = 0; i < tri.width(n); ++i) {
      int jp = i + 2 * n, jm = i;
      double il = 0, ir = 0, cone = 0;
      for (int m = 0; m <= n; ++m) {
        double w = (m == 0 || m == n) ? 0.5 : 1.0;
        il += w * g_r[m][i + 2 * (n - m)];
        ir += w * g_l[m][i];
        cone += w * (g_mean_prefix[m][i + 2 * (n - m)] - g_mean_prefix[m][i]);
      }
      il *= tri.dz;
      ir *= tri.dz;
      cone *= tri.dz;
      out.field.u[n][i] =
          0.5 * (data.u0[jp] + data.u0[jm]) + 0.5 * (ws.U1[jp] - ws.U1[jm]) + 0.5 * cone;
      out.field.ut[n][i] = 0.5 * (data.du0[jp] - data.du0[jm]) +
                           0.5 * (data.u1[jp] + data.u1[jm]) + 0.5 * (il + ir);
    }
  }
  return out;
}

inline CauchyData mirror_data(const CauchyData& d) {
  CauchyData m = d;
  std::reverse(m.u0.begin(), m.u0.end());
  std::reverse(m.du0.begin(), m.du0.end());
  std::reverse(m.u1.begin(), m.u1.end());
  for (double& v : m.du0) v = -v;
  return m;
}

inline SidedFn mirror_lambda(const SidedFn& lambda, double z0) {
  if (!lambda) return lambda;
  return [lambda, z0](double z, Side s) {
    return -lambda(2 * z0 - z, s == Side::left ? Side::right : Side::left);
  };
}

inline void mirror_field(TriangleField& f) {
  for (auto& row : f.u) std::reverse(row.begin(), row.end());
  for (auto& row : f.ut) std::reverse(row.begin(), row.end());
  for (auto& row : f.uz) {
    std::reverse(row.begin(), row.end());
    for (double& v : row) v = -v;
  }
}

}  // namespace tri_detail

// Picard fixed-point solve of (dt - dz)(ut + uz) = -lambda(z) uz on a full
// triangle. With opposite_factorization the roles of w+ and w- are swapped
// (implemented by solving the z-mirrored problem), which must yield the same
// field by Remark 3.x.
inline std::pair<TriangleField, PicardReport> picard_triangle_solve(
    const Triangle& tri, const CauchyData& data, const SidedFn& lambda, double lambda_sup,
    const PicardOptions& opts = {}) {
  if (tri.kind != TriangleKind::full)
    throw MisalignedGrid("picard_triangle_solve expects a full triangle");
  if (opts.opposite_factorization) {
    PicardOptions o = opts;
    o.opposite_factorization = false;
    auto core = tri_detail::picard_core(tri, tri_detail::mirror_data(data),
                                        tri_detail::mirror_lambda(lambda, tri.center_z),
                                        lambda_sup, {}, o);
    tri_detail::mirror_field(core.field);
    return {core.field, core.report};
  }
  auto core = tri_detail::picard_core(tri, data, lambda, lambda_sup, {}, opts);
  return {core.field, core.report};
}

// Dirichlet half-triangle operators Phi_+/Phi_- (Lemma 3.x): prescribe the
// trace u(z0, t) = b(t), odd-extend the shifted data and solve on the full
// triangle. b is sampled at level times together with its derivative.
inline std::pair<TriangleField, PicardReport> dirichlet_half_solve(
    const Triangle& tri, const std::vector<double>& b, const std::vector<double>& bp,
    const CauchyData& data, const SidedFn& lambda, double lambda_sup, const PicardOptions& opts = {},
    double compat_tol = 1e-9) {
  if (tri.kind == TriangleKind::full)
    throw MisalignedGrid("dirichlet_half_solve expects a half triangle");
  if (tri.kind == TriangleKind::half_minus) {
    Triangle m = tri;
    m.kind = TriangleKind::half_plus;
    auto mirrored = dirichlet_half_solve(m, b, bp, tri_detail::mirror_data(data),
                                         tri_detail::mirror_lambda(lambda, tri.center_z),
                                         lambda_sup, opts, compat_tol);
    tri_detail::mirror_field(mirrored.first);
    return mirrored;
  }

  const int L = tri.levels();
  if (static_cast<int>(b.size()) != L + 1 || bp.size() != b.size())
    throw MisalignedGrid("boundary trace must be sampled at the L+1 level times");
  if (std::abs(b[0] - data.u0.front()) > compat_tol ||
      std::abs(bp[0] - data.u1.front()) > compat_tol)
    throw IncompatibleTrace("b(t0) or b'(t0) does not match the Cauchy data at z0");

  // Full triangle with odd-extended v-data; v = u - G^b.
  Triangle full = tri;
  full.kind = TriangleKind::full;
  CauchyData v;
  v.u0.assign(full.width(0), 0.0);
  v.du0.assign(full.width(0), 0.0);
  v.u1.assign(full.width(0), 0.0);
  for (int j = 0; j <= L; ++j) {
    double v0 = data.u0[j] - b[0];
    double dv0 = data.du0[j];
    double v1 = data.u1[j] - bp[0];
    v.u0[L + j] = v0;
    v.u0[L - j] = -v0;
    v.du0[L + j] = dv0;
    v.du0[L - j] = dv0;  // derivative of an odd function is even
    v.u1[L + j] = v1;
    v.u1[L - j] = -v1;
  }
  v.u0[L] = 0;
  v.u1[L] = 0;

  SidedFn lam_odd = [lambda, z0 = tri.center_z, h = tri.dz](double z, Side s) {
    if (!lambda) return 0.0;
    if (z > z0 + 0.5 * h) return lambda(z, s);
    if (z < z0 - 0.5 * h)
      return -lambda(2 * z0 - z, s == Side::left ? Side::right : Side::left);
    // At the reflection point the odd extension is two-valued.
    return s == Side::left ? -lambda(z0, Side::right) : lambda(z0, Side::right);
  };

  // The forcing G^b_z extended evenly in z (so -lambda_odd (v_z + G_z) is odd
  // and the discrete solution keeps an exactly vanishing trace). b' between
  // level times is not needed: |z - z0| and t - t0 are both node-aligned.
  auto Gz = [&](int n, int i) {
    double z = full.node_z(n, i);
    double zeta = std::abs(z - tri.center_z);
    int k = static_cast<int>(std::llround(zeta / tri.dz));
    if (k >= n) return 0.0;  // ahead of the trace signal: G is affine there
    return -bp[n - k] + bp[0];
  };

  auto core = tri_detail::picard_core(full, v, lam_odd, lambda_sup, Gz, opts);

  // Restrict to the + half and add back G^b.
  TriangleField out;
  out.tri = tri;
  out.u.resize(L + 1);
  out.ut.resize(L + 1);
  out.uz.resize(L + 1);
  for (int n = 0; n <= L; ++n) {
    int w = tri.width(n);
    int off = (full.width(n) - 1) / 2;  // index of z0 at this level
    out.u[n].assign(w, 0.0);
    out.ut[n].assign(w, 0.0);
    out.uz[n].assign(w, 0.0);
    for (int i = 0; i < w; ++i) {
      // G^b on the + half: ahead of the signal it is affine continuation.
      double Gu, Gt, Gzv;
      if (i > n) {
        Gu = b[0] + n * tri.dz * bp[0];
        Gt = bp[0];
        Gzv = 0.0;
      } else {
        Gu = b[n - i] + i * tri.dz * bp[0];
        Gt = bp[n - i];
        Gzv = -bp[n - i] + bp[0];
      }
      out.u[n][i] = core.field.u[n][off + i] + Gu;
      out.ut[n][i] = core.field.ut[n][off + i] + Gt;
      out.uz[n][i] = core.field.uz[n][off + i] + Gzv;
    }
  }
  return {out, core.report};
}

}  // namespace charwave
