#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "charwave/errors.hpp"
#include "charwave/nonlinearity.hpp"
#include "charwave/potential.hpp"

namespace charwave {

// The coefficient profiles sampled on the characteristic grid, with
// breakpoints snapped to the nearest node (snap error recorded, <= dz/2).
// All cells live strictly inside one piece, so one-sided values at nodes
// describe the medium exactly.
struct MediumGrid {
  double dz = 0;
  int n = 0;                       // number of nodes, z_i = i*dz
  std::vector<double> z, x;        // node coordinates in both systems
  std::vector<double> c_l, c_r;    // one-sided c = 1/sqrt(V)
  std::vector<double> lam_l, lam_r;
  std::vector<int> interfaces;     // nodes carrying a c-jump
  std::vector<int> if_index;       // per node: index into interfaces, or -1
  std::vector<double> snap_errors;
  double lambda_sup = 0;
  bool lambda_zero = true;
  int wall_node = -1;              // >= 0 in bounded mode

  bool is_interface(int i) const { return if_index[i] >= 0; }
};

inline MediumGrid build_medium_grid(const CoordinateMap& map, double dz, double z_end,
                                    bool bounded = false) {
  MediumGrid m;
  m.dz = dz;
  m.n = static_cast<int>(std::llround(z_end / dz)) + 1;
  if (m.n < 3) throw ConfigInvalid("grid too small");
  m.lambda_sup = map.lambda_sup();
  m.lambda_zero = map.lambda_identically_zero();
  if (bounded) m.wall_node = m.n - 1;

  // Snap every z-image of a coefficient breakpoint to its nearest node.
  struct Snap {
    int node;
    double z_true;
  };
  std::vector<Snap> snaps;
  m.if_index.assign(m.n, -1);
  for (double zb : map.z_lambda_breakpoints()) {
    if (zb <= 0.5 * dz || zb >= z_end - 0.5 * dz) continue;
    int j = static_cast<int>(std::llround(zb / dz));
    bool c_jump = false;
    for (double zc : map.z_breakpoints())
      if (std::abs(zc - zb) < 1e-12) c_jump = true;
    if (!snaps.empty() && snaps.back().node == j)
      throw ConfigInvalid("dz too coarse: two breakpoints snap to the same node");
    snaps.push_back({j, zb});
    m.snap_errors.push_back(std::abs(zb - j * dz));
    if (c_jump) {
      m.if_index[j] = static_cast<int>(m.interfaces.size());
      m.interfaces.push_back(j);
    }
  }

  m.z.resize(m.n);
  m.x.resize(m.n);
  m.c_l.resize(m.n);
  m.c_r.resize(m.n);
  m.lam_l.resize(m.n);
  m.lam_r.resize(m.n);
  double z_cap = map.z_max();
  for (int i = 0; i < m.n; ++i) {
    m.z[i] = i * dz;
    double zq = std::min(m.z[i], z_cap);
    m.x[i] = map.kappa_inverse(zq);
    // Locate the snapped piece for each side, then evaluate the true profile
    // safely inside the matching true piece.
    auto eval = [&](Side side, double& c_out, double& lam_out) {
      double lo = 0.0, hi = z_cap;
      for (const auto& s : snaps) {
        if (side == Side::left ? (s.node * dz < m.z[i]) : (s.node * dz <= m.z[i]))
          lo = s.z_true;
        else {
          hi = s.z_true;
          break;
        }
      }
      double mid = 0.5 * (lo + hi);
      double zq2 = std::clamp(zq, std::min(lo + 1e-9 * dz, mid), std::max(hi - 1e-9 * dz, mid));
      Side s = zq2 <= lo + 1e-9 * dz ? Side::right : Side::left;
      c_out = map.c(zq2, s);
      lam_out = map.lambda(zq2, s);
    };
    eval(Side::left, m.c_l[i], m.lam_l[i]);
    eval(Side::right, m.c_r[i], m.lam_r[i]);
  }
  return m;
}

// Per-interface one-sided state (u_t is continuous, u_z is two-valued).
struct InterfaceNodeState {
  int node = -1;
  double ut = 0, uz_minus = 0, uz_plus = 0;
};

// Riemann invariants w+- = u_t +- u_z on one time level, plus the d'Alembert
// potential pair (pp, pm) with u = (pp + pm)/2 on media with lambda == 0,
// where transport is exact. At interface nodes wp/pp hold the left-side
// outgoing values and wm/pm the right-side ones, so the interior update is a
// uniform shift.
struct FieldState {
  double t = 0;
  int step = 0;
  std::vector<double> u, wp, wm;
  std::vector<double> pp, pm;
  bool potentials = false;
  std::vector<InterfaceNodeState> ifs;  // ordered as MediumGrid::interfaces
  double b = 0, d = 0;  // boundary accumulators: b = u(0,.), d = f(u_t(0,.))
};

inline double ut_at(const FieldState& st, const MediumGrid& m, int i) {
  int k = m.if_index[i];
  if (k >= 0) return st.ifs[k].ut;
  return 0.5 * (st.wp[i] + st.wm[i]);
}

// One-sided u_z respecting the interface storage convention.
inline double uz_at(const FieldState& st, const MediumGrid& m, int i, Side side) {
  int k = m.if_index[i];
  if (k >= 0) return side == Side::left ? st.ifs[k].uz_minus : st.ifs[k].uz_plus;
  return 0.5 * (st.wp[i] - st.wm[i]);
}

// Energy in z-form: 1/2 int (u_t^2 + u_z^2)/c dz + F(u_t(0, t)).
// Cell-based trapezoid so one-sided values at interfaces are used exactly.
inline double energy_of(const FieldState& st, const MediumGrid& m, const Nonlinearity& nl) {
  double acc = 0;
  for (int i = 0; i + 1 < m.n; ++i) {
    double a_ut = ut_at(st, m, i), b_ut = ut_at(st, m, i + 1);
    double a_uz = uz_at(st, m, i, Side::right), b_uz = uz_at(st, m, i + 1, Side::left);
    double fa = (a_ut * a_ut + a_uz * a_uz) / m.c_r[i];
    double fb = (b_ut * b_ut + b_uz * b_uz) / m.c_l[i + 1];
    acc += 0.5 * m.dz * (fa + fb);
  }
  return 0.5 * acc + nl.F(ut_at(st, m, 0));
}

// Momentum in z-form: int u_t/c dz + f(u_t(0, t)) = int u_t/c dz + d.
inline double momentum_of(const FieldState& st, const MediumGrid& m, const Nonlinearity& nl) {
  (void)nl;
  double acc = 0;
  for (int i = 0; i + 1 < m.n; ++i)
    acc += 0.5 * m.dz * (ut_at(st, m, i) / m.c_r[i] + ut_at(st, m, i + 1) / m.c_l[i + 1]);
  return acc + st.d;
}

}  // namespace charwave
