#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <vector>

#include "charwave/errors.hpp"
#include "charwave/field.hpp"
#include "charwave/interface_boundary.hpp"
#include "charwave/nonlinearity.hpp"
#include "charwave/potential.hpp"
#include "charwave/quadrature.hpp"

namespace charwave {

// Initial data as closures in x. support_hi bounds the support of both the
// value and its derivative; used to size the computational domain.
struct DataProfile {
  std::function<double(double)> value = [](double) { return 0.0; };
  std::function<double(double)> derivative = [](double) { return 0.0; };
  double support_hi = 0;
};

struct InitialData {
  DataProfile u0, u1;
};

enum class DomainMode { half_line, bounded };

struct SolverParams {
  double T = 1.0;
  double dz = 1e-3;
  DomainMode mode = DomainMode::half_line;
  double L = 0;            // bounded-domain end, in x
  int snapshot_every = 0;  // steps between snapshots; 0 = first and last only
  int ode_substeps = 4;
  int cell_iterations = 3;  // per-cell Picard sweeps when lambda != 0
  bool allow_illposed = false;
  bool force_general_path = false;
  double margin_z = 0.5;    // slack beyond the domain of dependence
  double domain_z_end = 0;  // explicit z-extent override (half-line mode)
};

struct Snapshot {
  double t = 0;
  std::vector<double> u, ut, ux;
};

struct SolutionRecord {
  MediumGrid medium;
  std::vector<Snapshot> snapshots;
  BoundaryTrace trace;  // per time step
  std::vector<double> energy, momentum;
  double u_consistency = 0;  // max |u - (b + int u_z dz)| over snapshots
  double runtime_seconds = 0;
  int steps = 0;
  bool potentials = false;
};

inline FieldState init_state(const MediumGrid& m, const InitialData& data,
                             const Nonlinearity& nl) {
  FieldState st;
  st.t = 0;
  st.u.resize(m.n);
  st.wp.resize(m.n);
  st.wm.resize(m.n);
  std::vector<double> ut_all(m.n);
  st.ifs.resize(m.interfaces.size());
  for (int i = 0; i < m.n; ++i) {
    double x = m.x[i];
    double u0v = data.u0.value(x);
    double du0 = data.u0.derivative(x);
    double u1v = data.u1.value(x);
    st.u[i] = u0v;
    ut_all[i] = u1v;
    double uz_l = m.c_l[i] * du0, uz_r = m.c_r[i] * du0;
    int k = m.if_index[i];
    if (k >= 0) st.ifs[k] = {i, u1v, uz_l, uz_r};
    st.wp[i] = u1v + uz_l;
    st.wm[i] = u1v - uz_r;
  }
  st.b = data.u0.value(0.0);
  st.d = nl.f(data.u1.value(0.0));
  if (m.lambda_zero) {
    st.potentials = true;
    auto q = trapezoid_prefix(ut_all, m.dz);
    st.pp.resize(m.n);
    st.pm.resize(m.n);
    for (int i = 0; i < m.n; ++i) {
      st.pp[i] = st.u[i] + q[i];
      st.pm[i] = st.u[i] - q[i];
    }
  }
  return st;
}

namespace ivp_detail {

inline double lerp(const std::vector<double>& v, double idx) {
  int j = std::min(static_cast<int>(idx), static_cast<int>(v.size()) - 2);
  j = std::max(j, 0);
  double frac = idx - j;
  return (1 - frac) * v[j] + frac * v[j + 1];
}

}  // namespace ivp_detail

// One characteristic step dt = dz. Interior transport is exact on lambda == 0
// pieces; otherwise the invariant updates carry the -lambda u_z source by
// per-cell trapezoid with a short Picard sweep. Interfaces use the gamma
// relation, the boundary integrates the trace ODE with RK4 substeps.
inline FieldState advance_step(const FieldState& st, const MediumGrid& m, const Nonlinearity& nl,
                               const SolverParams& params) {
  const int n = m.n;
  const double dz = m.dz;
  FieldState nx;
  nx.t = st.t + dz;
  nx.step = st.step + 1;
  nx.u.assign(n, 0.0);
  nx.wp.assign(n, 0.0);
  nx.wm.assign(n, 0.0);
  nx.ifs.resize(st.ifs.size());
  nx.potentials = st.potentials;
  if (st.potentials) {
    nx.pp.assign(n, 0.0);
    nx.pm.assign(n, 0.0);
  }
  const bool with_source = !m.lambda_zero;

  auto uz_old = [&](int i, Side s) { return uz_at(st, m, i, s); };
  auto ut_old = [&](int i) { return ut_at(st, m, i); };

  // Interior invariants (junction nodes overwritten below).
  for (int i = 1; i + 1 < n; ++i) {
    if (m.is_interface(i)) continue;
    if (!with_source) {
      nx.wp[i] = st.wp[i + 1];
      nx.wm[i] = st.wm[i - 1];
    } else {
      double base_p = st.wp[i + 1] - 0.5 * dz * m.lam_l[i + 1] * uz_old(i + 1, Side::left);
      double base_m = st.wm[i - 1] - 0.5 * dz * m.lam_r[i - 1] * uz_old(i - 1, Side::right);
      double uz_g = uz_old(i, Side::right);
      double wp_i = 0, wm_i = 0;
      for (int it = 0; it < params.cell_iterations; ++it) {
        wp_i = base_p - 0.5 * dz * m.lam_r[i] * uz_g;
        wm_i = base_m - 0.5 * dz * m.lam_l[i] * uz_g;
        uz_g = 0.5 * (wp_i - wm_i);
      }
      nx.wp[i] = wp_i;
      nx.wm[i] = wm_i;
    }
  }

  // Right edge: Dirichlet wall (bounded) or frozen ghost (half line, sized so
  // the edge never influences the reported window).
  if (m.wall_node >= 0) {
    int w = m.wall_node;
    double wmin_in = st.wm[w - 1];
    if (with_source) {
      double base = st.wm[w - 1] - 0.5 * dz * m.lam_r[w - 1] * uz_old(w - 1, Side::right);
      double uz_g = uz_old(w, Side::left);
      for (int it = 0; it < params.cell_iterations; ++it) {
        wmin_in = base - 0.5 * dz * m.lam_l[w] * uz_g;
        uz_g = -wmin_in;  // u_t = 0 at the wall
      }
    }
    nx.wp[w] = dirichlet_wall_step(wmin_in);
    nx.wm[w] = wmin_in;
    nx.u[w] = 0.0;
  } else {
    nx.wp[n - 1] = st.wp[n - 1];
    nx.wm[n - 1] = with_source
                       ? st.wm[n - 2] - 0.5 * dz *
                             (m.lam_r[n - 2] * uz_old(n - 2, Side::right) +
                              m.lam_l[n - 1] * uz_old(n - 1, Side::left))
                       : st.wm[n - 2];
  }

  // Interfaces: gamma relation on the (source-corrected) incoming invariants.
  for (std::size_t k = 0; k < m.interfaces.size(); ++k) {
    int j = m.interfaces[k];
    auto coeffs = InterfaceCoefficients::make(m.z[j], m.c_l[j], m.c_r[j]);
    double base_m = st.wm[j - 1], base_p = st.wp[j + 1];
    if (with_source) {
      base_m -= 0.5 * dz * m.lam_r[j - 1] * uz_old(j - 1, Side::right);
      base_p -= 0.5 * dz * m.lam_l[j + 1] * uz_old(j + 1, Side::left);
    }
    JumpStepResult jr{};
    double uzm_g = uz_old(j, Side::left), uzp_g = uz_old(j, Side::right);
    int iters = with_source ? params.cell_iterations : 1;
    for (int it = 0; it < iters; ++it) {
      double wmin_in = base_m - (with_source ? 0.5 * dz * m.lam_l[j] * uzm_g : 0.0);
      double wplus_in = base_p - (with_source ? 0.5 * dz * m.lam_r[j] * uzp_g : 0.0);
      jr = jump_transmission_step(coeffs, wmin_in, wplus_in);
      uzm_g = jr.uz_minus;
      uzp_g = jr.uz_plus;
    }
    nx.ifs[k] = {j, jr.ut, jr.uz_minus, jr.uz_plus};
    nx.wp[j] = jr.ut + jr.uz_minus;
    nx.wm[j] = jr.ut - jr.uz_plus;
    nx.u[j] = st.u[j] + 0.5 * dz * (ut_old(j) + jr.ut);
  }

  // Boundary node: trace ODE d' = (w_in - f^{-1}(d))/c(0).
  {
    std::vector<double> uz_row;
    if (with_source) {
      uz_row.resize(9);
      for (int i = 0; i < 9 && i < n; ++i) uz_row[i] = uz_old(i, Side::right);
    }
    auto w_fn = [&](double t) {
      double s = (t - st.t) / dz;
      double v = ivp_detail::lerp(st.wp, s);
      if (with_source) {
        double lam_mid = ivp_detail::lerp(m.lam_r, 0.5 * s);
        v -= s * dz * lam_mid * ivp_detail::lerp(uz_row, 0.5 * s);
      }
      return v;
    };
    double c0 = m.c_r[0];
    BoundaryOdePoint y = boundary_ode_step(nl, c0, w_fn, st.t, dz, {st.d, st.b},
                                           params.ode_substeps);
    nx.d = y.d;
    nx.b = y.b;
    double ut0 = nl.f_inv(y.d);
    if (!with_source) {
      nx.wp[0] = st.wp[1];
    } else {
      double base = st.wp[1] - 0.5 * dz * m.lam_l[1] * uz_old(1, Side::left);
      double uz_g = uz_old(0, Side::right);
      for (int it = 0; it < params.cell_iterations; ++it) {
        nx.wp[0] = base - 0.5 * dz * m.lam_r[0] * uz_g;
        uz_g = nx.wp[0] - ut0;
      }
    }
    nx.wm[0] = 2.0 * ut0 - nx.wp[0];
    nx.u[0] = y.b;
  }

  // u reconstruction: exact potential transport when active, otherwise
  // trapezoid in time from u_t.
  if (st.potentials) {
    for (int i = 1; i + 1 < n; ++i) {
      if (m.is_interface(i)) continue;
      nx.pp[i] = st.pp[i + 1];
      nx.pm[i] = st.pm[i - 1];
      nx.u[i] = 0.5 * (nx.pp[i] + nx.pm[i]);
    }
    nx.pp[0] = st.pp[1];
    nx.pm[0] = 2.0 * nx.b - nx.pp[0];
    for (std::size_t k = 0; k < m.interfaces.size(); ++k) {
      int j = m.interfaces[k];
      nx.pp[j] = 2.0 * nx.u[j] - st.pm[j - 1];
      nx.pm[j] = 2.0 * nx.u[j] - st.pp[j + 1];
    }
    if (m.wall_node >= 0) {
      nx.pm[m.wall_node] = st.pm[m.wall_node - 1];
      nx.pp[m.wall_node] = -nx.pm[m.wall_node];
    } else {
      nx.pp[n - 1] = st.pp[n - 1];
      nx.pm[n - 1] = st.pm[n - 2];
      nx.u[n - 1] = 0.5 * (nx.pp[n - 1] + nx.pm[n - 1]);
    }
  } else {
    for (int i = 1; i < n; ++i) {
      if (m.if_index[i] >= 0 || i == m.wall_node) continue;  // already set
      double ut_new = 0.5 * (nx.wp[i] + nx.wm[i]);
      nx.u[i] = st.u[i] + 0.5 * dz * (ut_old(i) + ut_new);
    }
  }
  return nx;
}

namespace ivp_detail {

inline Snapshot take_snapshot(const FieldState& st, const MediumGrid& m) {
  Snapshot s;
  s.t = st.t;
  s.u = st.u;
  s.ut.resize(m.n);
  s.ux.resize(m.n);
  for (int i = 0; i < m.n; ++i) {
    s.ut[i] = ut_at(st, m, i);
    s.ux[i] = i == 0 ? uz_at(st, m, i, Side::right) / m.c_r[i]
                     : uz_at(st, m, i, Side::left) / m.c_l[i];
  }
  return s;
}

// Cross-check: u from spatial integration of u_z against the stored u.
inline double u_consistency(const FieldState& st, const MediumGrid& m) {
  double acc = st.b, worst = std::abs(st.u[0] - acc);
  for (int i = 0; i + 1 < m.n; ++i) {
    acc += 0.5 * m.dz * (uz_at(st, m, i, Side::right) + uz_at(st, m, i + 1, Side::left));
    worst = std::max(worst, std::abs(st.u[i + 1] - acc));
  }
  return worst;
}

}  // namespace ivp_detail

struct PreparedRun {
  MediumGrid medium;
  int steps = 0;
};

inline PreparedRun prepare_run(const CoordinateMap& map, const InitialData& data,
                               const SolverParams& params) {
  if (!(params.T > 0)) throw ConfigInvalid("horizon T must be positive");
  if (!(params.dz > 0)) throw ConfigInvalid("dz must be positive");
  double steps_f = params.T / params.dz;
  int steps = static_cast<int>(std::llround(steps_f));
  if (steps < 1 || std::abs(steps_f - steps) > 1e-9 * std::max(1.0, steps_f))
    throw ConfigInvalid("dz must divide the horizon T into whole steps");
  if (params.dz * map.lambda_sup() >= 1.0)
    throw ConfigInvalid("dz * ||lambda|| >= 1 violates the per-cell contraction");

  double z_end;
  bool bounded = params.mode == DomainMode::bounded;
  if (bounded) {
    if (!(params.L > 0) || params.L > map.potential().x_max + 1e-12)
      throw ConfigInvalid("bounded mode requires 0 < L <= represented range");
    z_end = map.kappa(params.L);
    int wn = static_cast<int>(std::llround(z_end / params.dz));
    z_end = wn * params.dz;
  } else if (params.domain_z_end > 0) {
    if (params.domain_z_end > map.z_max() + 1e-9)
      throw ConfigInvalid("domain_z_end exceeds the kappa image of the potential range");
    z_end = std::llround(params.domain_z_end / params.dz) * params.dz;
  } else {
    double z_supp = map.kappa(std::min(std::max(data.u0.support_hi, data.u1.support_hi),
                                       map.potential().x_max));
    double need = z_supp + params.T + params.margin_z;
    if (need > map.z_max() + 1e-9)
      throw ConfigInvalid("potential range too short for horizon: need z up to " +
                          std::to_string(need) + " but kappa image ends at " +
                          std::to_string(map.z_max()));
    int cells = static_cast<int>(std::ceil(need / params.dz));
    z_end = cells * params.dz;
  }

  // Breakpoint gaps must dominate the grid scale.
  std::vector<double> zb = map.z_breakpoints();
  zb.push_back(0.0);
  std::sort(zb.begin(), zb.end());
  for (std::size_t i = 0; i + 1 < zb.size(); ++i) {
    double gap = zb[i + 1] - zb[i];
    if (zb[i + 1] < z_end && params.dz > gap / 8.0 + 1e-15)
      throw ConfigInvalid("dz must be at most an eighth of the smallest interface gap (" +
                          std::to_string(gap) + ")");
  }

  PreparedRun pr;
  pr.medium = build_medium_grid(map, params.dz, z_end, bounded);
  pr.steps = steps;
  return pr;
}

inline SolutionRecord run_simulation(const CoordinateMap& map, const Nonlinearity& nl,
                                     const InitialData& data, const SolverParams& params) {
  if (!nl.increasing() && !params.allow_illposed)
    throw DecreasingNonlinearity(
        "forward solve refused: decreasing boundary nonlinearity is ill-posed");
  auto t_begin = std::chrono::steady_clock::now();
  PreparedRun pr = prepare_run(map, data, params);
  MediumGrid& m = pr.medium;
  if (params.force_general_path) m.lambda_zero = false;
  if (params.mode == DomainMode::bounded) {
    double uL = data.u0.value(m.x[m.wall_node]);
    if (std::abs(uL) > 1e-9)
      throw IncompatibleData("u0(L) = " + std::to_string(uL) + " != 0 at the Dirichlet wall");
  }

  FieldState st = init_state(m, data, nl);
  SolutionRecord rec;
  rec.steps = pr.steps;
  rec.potentials = st.potentials;

  auto record_level = [&](const FieldState& s) {
    rec.trace.t.push_back(s.t);
    rec.trace.b.push_back(s.b);
    rec.trace.d.push_back(s.d);
    rec.trace.bprime.push_back(ut_at(s, m, 0));
    rec.energy.push_back(energy_of(s, m, nl));
    rec.momentum.push_back(momentum_of(s, m, nl));
  };

  record_level(st);
  rec.snapshots.push_back(ivp_detail::take_snapshot(st, m));
  rec.u_consistency = ivp_detail::u_consistency(st, m);
  for (int step = 1; step <= pr.steps; ++step) {
    st = advance_step(st, m, nl, params);
    record_level(st);
    bool snap = step == pr.steps ||
                (params.snapshot_every > 0 && step % params.snapshot_every == 0);
    if (snap) {
      rec.snapshots.push_back(ivp_detail::take_snapshot(st, m));
      rec.u_consistency = std::max(rec.u_consistency, ivp_detail::u_consistency(st, m));
    }
  }
  rec.medium = std::move(pr.medium);
  rec.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return rec;
}

inline SolutionRecord run_bounded_domain(const CoordinateMap& map, const Nonlinearity& nl,
                                         const InitialData& data, SolverParams params) {
  params.mode = DomainMode::bounded;
  return run_simulation(map, nl, data, params);
}

}  // namespace charwave
