#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "charwave/ivp.hpp"
#include "charwave/quadrature.hpp"
#include "charwave/util.hpp"

namespace charwave {

// -----------------------------------------------------------------------------
// Conservation monitors (energy / momentum drift along a run).
// -----------------------------------------------------------------------------
struct ConservationSeries {
  std::vector<double> t, E, M;
  double e_drift_rel = 0, m_drift_rel = 0;
  double floor_used = 0;
  double snapshot_max_dev = 0;  // per-step series vs snapshot recomputation
};

inline ConservationSeries conservation_report(const SolutionRecord& rec, const Nonlinearity& nl,
                                              double drift_floor = 1e-14) {
  if (rec.snapshots.size() < 2) throw ConfigInvalid("conservation_report needs >= 2 snapshots");
  ConservationSeries s;
  s.t = rec.trace.t;
  s.E = rec.energy;
  s.M = rec.momentum;
  double e0 = s.E.front(), m0 = s.M.front();
  double e_scale = std::max(std::abs(e0), drift_floor);
  double m_scale = std::max(std::abs(m0), drift_floor);
  s.floor_used = drift_floor;
  for (std::size_t i = 0; i < s.E.size(); ++i) {
    s.e_drift_rel = std::max(s.e_drift_rel, std::abs(s.E[i] - e0) / e_scale);
    s.m_drift_rel = std::max(s.m_drift_rel, std::abs(s.M[i] - m0) / m_scale);
  }

  // Independent recomputation from the stored snapshots (u_z = u_x * c).
  const MediumGrid& m = rec.medium;
  for (const auto& snap : rec.snapshots) {
    double acc_e = 0, acc_m = 0;
    for (int i = 0; i + 1 < m.n; ++i) {
      double uza = snap.ux[i] * m.c_r[i], uzb = snap.ux[i + 1] * m.c_l[i + 1];
      acc_e += 0.5 * m.dz *
               ((snap.ut[i] * snap.ut[i] + uza * uza) / m.c_r[i] +
                (snap.ut[i + 1] * snap.ut[i + 1] + uzb * uzb) / m.c_l[i + 1]);
      acc_m += 0.5 * m.dz * (snap.ut[i] / m.c_r[i] + snap.ut[i + 1] / m.c_l[i + 1]);
    }
    double E = 0.5 * acc_e + nl.F(snap.ut[0]);
    double M = acc_m + nl.f(snap.ut[0]);
    // locate matching series entry
    for (std::size_t k = 0; k < s.t.size(); ++k) {
      if (std::abs(s.t[k] - snap.t) < 1e-12 * std::max(1.0, snap.t)) {
        s.snapshot_max_dev = std::max({s.snapshot_max_dev, std::abs(E - s.E[k]) / e_scale,
                                       std::abs(M - s.M[k]) / m_scale});
        break;
      }
    }
  }
  return s;
}

// -----------------------------------------------------------------------------
// Weak-form residual against a bank of smooth compactly supported bumps.
// -----------------------------------------------------------------------------

// psi(s) = (1 - s^2)^4 on |s| < 1 with analytically coded derivative; the
// test functions are tensor products scaled to sub-rectangles.
struct TestBump {
  double cx, rx, ct, rt;

  static double psi(double s) {
    if (std::abs(s) >= 1) return 0;
    double q = 1 - s * s;
    return q * q * q * q;
  }
  static double dpsi(double s) {
    if (std::abs(s) >= 1) return 0;
    double q = 1 - s * s;
    return -8 * s * q * q * q;
  }
  double phi(double x, double t) const { return psi((x - cx) / rx) * psi((t - ct) / rt); }
  double phi_x(double x, double t) const {
    return dpsi((x - cx) / rx) / rx * psi((t - ct) / rt);
  }
  double phi_t(double x, double t) const {
    return psi((x - cx) / rx) * dpsi((t - ct) / rt) / rt;
  }
};

// Deterministic bank; one third touches x = 0, one third touches t = 0, the
// rest is interior, so both data terms and the boundary term get exercised.
inline std::vector<TestBump> make_test_bank(double x_hi, double t_hi, int count = 12,
                                            unsigned seed = 12345) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<TestBump> bank;
  for (int i = 0; i < count; ++i) {
    TestBump b;
    b.rx = (0.15 + 0.35 * unif(rng)) * x_hi;
    b.rt = (0.15 + 0.35 * unif(rng)) * t_hi;
    if (i % 3 == 0) {
      b.cx = 0.5 * b.rx * unif(rng);  // support includes x = 0
      b.ct = b.rt + (t_hi - b.rt) * unif(rng);
    } else if (i % 3 == 1) {
      b.cx = b.rx + (x_hi - b.rx) * unif(rng);
      b.ct = 0.5 * b.rt * unif(rng);  // support includes t = 0
    } else {
      b.cx = b.rx + (x_hi - b.rx) * unif(rng);
      b.ct = b.rt + (t_hi - b.rt) * unif(rng);
    }
    bank.push_back(b);
  }
  return bank;
}

// Candidate field sampled pointwise. x_kinks may report lines of reduced
// smoothness at fixed t so the quadrature can split there; panels_per_unit
// switches to fixed composite Gauss (for grid-interpolated candidates).
struct WeakCandidate {
  std::function<double(double, double)> ut, ux;
  std::function<double(double)> ut0;  // u_t(0, t)
  std::function<double(double)> u1;   // u_t(x, 0)
  std::function<std::vector<double>(double)> x_kinks;
  int panels_per_unit = 0;
  std::string name;
};

namespace diag_detail {

inline double integrate_segment(const std::function<double(double)>& f, double a, double b,
                                int panels_per_unit, double tol) {
  if (b <= a) return 0;
  if (panels_per_unit > 0) {
    int panels = std::max(1, static_cast<int>(std::ceil((b - a) * panels_per_unit)));
    return integrate_gauss(f, a, b, panels);
  }
  return integrate_adaptive(f, a, b, tol);
}

}  // namespace diag_detail

// Full weak form of the initial value problem:
//   W(phi) = int int (V u_t phi_t - u_x phi_x) + int f(u_t(0,t)) phi_t(0,t)
//          + int V u1 phi(.,0) + f(u1(0)) phi(0,0).
// Returns max |W| over the bank. Vanishes for weak solutions.
inline double weak_residual(const WeakCandidate& cand, const Nonlinearity& nl,
                            const Potential& pot, const std::vector<TestBump>& bank,
                            double tol = 1e-9) {
  auto bump_values = parallel_map(bank, [&](const TestBump& bump) {
    double x_lo = std::max(0.0, bump.cx - bump.rx), x_hi = bump.cx + bump.rx;
    double t_lo = std::max(0.0, bump.ct - bump.rt), t_hi = bump.ct + bump.rt;

    // interior splits: potential breakpoints plus candidate kink lines
    auto inner = [&](double t) {
      std::vector<double> cuts{x_lo, x_hi};
      for (double xb : pot.breakpoints)
        if (xb > x_lo && xb < x_hi) cuts.push_back(xb);
      if (cand.x_kinks)
        for (double xk : cand.x_kinks(t))
          if (xk > x_lo && xk < x_hi) cuts.push_back(xk);
      std::sort(cuts.begin(), cuts.end());
      double acc = 0;
      for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
        acc += diag_detail::integrate_segment(
            [&](double x) {
              return pot.value_at(x) * cand.ut(x, t) * bump.phi_t(x, t) -
                     cand.ux(x, t) * bump.phi_x(x, t);
            },
            cuts[s], cuts[s + 1], cand.panels_per_unit, tol);
      return acc;
    };
    double W = diag_detail::integrate_segment(inner, t_lo, t_hi, cand.panels_per_unit,
                                              tol * std::max(1.0, x_hi - x_lo));
    // boundary term
    W += diag_detail::integrate_segment(
        [&](double t) { return nl.f(cand.ut0(t)) * bump.phi_t(0, t); }, t_lo, t_hi,
        cand.panels_per_unit, tol);
    // data terms
    if (t_lo == 0.0) {
      std::vector<double> cuts{x_lo, x_hi};
      for (double xb : pot.breakpoints)
        if (xb > x_lo && xb < x_hi) cuts.push_back(xb);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
        W += diag_detail::integrate_segment(
            [&](double x) { return pot.value_at(x) * cand.u1(x) * bump.phi(x, 0); }, cuts[s],
            cuts[s + 1], cand.panels_per_unit, tol);
      W += nl.f(cand.u1(0.0)) * bump.phi(0.0, 0.0);
    }
    return std::abs(W);
  });
  double worst = 0;
  for (double v : bump_values) worst = std::max(worst, v);
  return worst;
}

// Candidate wrapping a finished run: bilinear interpolation of the snapshots.
inline WeakCandidate grid_candidate(const SolutionRecord& rec, const InitialData& data) {
  const MediumGrid& m = rec.medium;
  auto locate = [&rec](double t) {
    std::size_t k = 0;
    while (k + 2 < rec.snapshots.size() && rec.snapshots[k + 1].t <= t) ++k;
    return k;
  };
  auto sample = [&, locate](double x, double t, bool want_ut) {
    if (t < 0 || x < 0) return 0.0;
    std::size_t k = locate(t);
    const Snapshot &s0 = rec.snapshots[k], &s1 = rec.snapshots[k + 1];
    double wt = (t - s0.t) / (s1.t - s0.t);
    wt = std::clamp(wt, 0.0, 1.0);
    double zi = 0;
    {
      // invert x -> z via the medium table (x is monotone in node index)
      int lo = 0, hi = m.n - 1;
      if (x >= m.x[hi]) return 0.0;
      while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        (m.x[mid] <= x ? lo : hi) = mid;
      }
      zi = lo + (x - m.x[lo]) / (m.x[hi] - m.x[lo]);
    }
    auto pick = [&](const Snapshot& s) {
      const std::vector<double>& arr = want_ut ? s.ut : s.ux;
      int j = std::min(static_cast<int>(zi), m.n - 2);
      double fr = zi - j;
      return (1 - fr) * arr[j] + fr * arr[j + 1];
    };
    return (1 - wt) * pick(s0) + wt * pick(s1);
  };
  WeakCandidate c;
  c.name = "solver_output";
  c.ut = [sample](double x, double t) { return sample(x, t, true); };
  c.ux = [sample](double x, double t) { return sample(x, t, false); };
  c.ut0 = [sample](double t) { return sample(0.0, t, true); };
  c.u1 = [&data](double x) { return data.u1.value(x); };
  c.panels_per_unit = 24;
  return c;
}

// -----------------------------------------------------------------------------
// Continuous dependence experiment: perturb u1, fit the log-log slope of the
// solution difference against epsilon.
// -----------------------------------------------------------------------------
struct DependenceRow {
  double eps = 0, d_u = 0, d_ut = 0, d_ux = 0;
};

struct DependenceTable {
  std::vector<DependenceRow> rows;
  double slope = 0;  // fitted on max(d_u, d_ut, d_ux) over eps > 0
};

inline DependenceTable continuous_dependence_experiment(
    const CoordinateMap& map, const Nonlinearity& nl, const InitialData& base,
    const DataProfile& u1_perturbation, const std::vector<double>& eps_list, SolverParams params,
    double z_observe = 0) {
  if (params.snapshot_every <= 0) params.snapshot_every = std::max(1, static_cast<int>(std::llround(params.T / params.dz)) / 16);
  SolutionRecord ref = run_simulation(map, nl, base, params);
  int n_obs = ref.medium.n;
  if (z_observe > 0) n_obs = std::min(n_obs, static_cast<int>(z_observe / params.dz) + 1);

  auto rows = parallel_map(eps_list, [&](double eps) {
    InitialData pert = base;
    auto bval = base.u1.value, pval = u1_perturbation.value;
    pert.u1.value = [bval, pval, eps](double x) { return bval(x) + eps * pval(x); };
    pert.u1.support_hi = std::max(base.u1.support_hi, u1_perturbation.support_hi);
    SolutionRecord run = run_simulation(map, nl, pert, params);
    DependenceRow row;
    row.eps = eps;
    for (std::size_t k = 0; k < ref.snapshots.size() && k < run.snapshots.size(); ++k) {
      const auto &a = ref.snapshots[k], &b = run.snapshots[k];
      for (int i = 0; i < n_obs; ++i) {
        row.d_u = std::max(row.d_u, std::abs(a.u[i] - b.u[i]));
        row.d_ut = std::max(row.d_ut, std::abs(a.ut[i] - b.ut[i]));
        row.d_ux = std::max(row.d_ux, std::abs(a.ux[i] - b.ux[i]));
      }
    }
    return row;
  });

  DependenceTable out;
  out.rows = rows;
  std::vector<double> lx, ly;
  for (const auto& r : rows) {
    if (r.eps <= 0) continue;
    double d = std::max({r.d_u, r.d_ut, r.d_ux});
    if (d > 0) {
      lx.push_back(std::log(r.eps));
      ly.push_back(std::log(d));
    }
  }
  if (lx.size() >= 2) out.slope = fit_slope(lx, ly);
  return out;
}

}  // namespace charwave
