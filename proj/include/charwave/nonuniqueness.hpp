#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "charwave/diagnostics.hpp"
#include "charwave/ivp.hpp"

namespace charwave {

// Demonstration that f(y) = -y^3 with zero data admits a family of solutions:
// u = 0 and the right-traveling waves +-u_p(x, t - tau) with
// u_p = ((2/3)(t - x))^{3/2} for x < t. The forward solver refuses this f.
struct NonuniquenessReport {
  double boundary_identity_residual = 0;  // sup_t |u_x(0,t) - (f(u_t(0,t)))_t| for u_p
  struct CandidateResult {
    std::string name;
    double weak_residual;
  };
  std::vector<CandidateResult> candidates;
  bool solver_refused = false;
  std::string refusal_message;
};

namespace demo_detail {

inline double up_value(double x, double t) {
  double s = t - x;
  return s > 0 ? std::pow((2.0 / 3.0) * s, 1.5) : 0.0;
}
inline double up_ut(double x, double t) {
  double s = t - x;
  return s > 0 ? std::sqrt((2.0 / 3.0) * s) : 0.0;
}
inline double up_ux(double x, double t) { return -up_ut(x, t); }

inline WeakCandidate up_candidate(double tau, double sign, const std::string& name) {
  WeakCandidate c;
  c.name = name;
  c.ut = [tau, sign](double x, double t) { return sign * up_ut(x, t - tau); };
  c.ux = [tau, sign](double x, double t) { return sign * up_ux(x, t - tau); };
  c.ut0 = [tau, sign](double t) { return sign * up_ut(0.0, t - tau); };
  c.u1 = [tau, sign](double x) { return sign * up_ut(x, -tau); };
  c.x_kinks = [tau](double t) { return std::vector<double>{t - tau}; };
  return c;
}

}  // namespace demo_detail

inline NonuniquenessReport nonuniqueness_demo(double t_lo = 0.1, double t_hi = 5.0,
                                              int nt = 491, int bank_size = 12,
                                              unsigned seed = 12345) {
  NonuniquenessReport rep;

  // (a) pointwise boundary identity for u_p: u_x(0,t) = (f(u_t(0,t)))_t with
  // f(y) = -y^3, both sides evaluated in closed form.
  for (int i = 0; i < nt; ++i) {
    double t = t_lo + (t_hi - t_lo) * i / (nt - 1);
    double ux0 = demo_detail::up_ux(0.0, t);
    double ut0 = demo_detail::up_ut(0.0, t);
    double utt0 = (1.0 / 3.0) / std::sqrt((2.0 / 3.0) * t);
    double dfdt = -3.0 * ut0 * ut0 * utt0;  // (f(u_t))_t = f'(u_t) u_tt
    rep.boundary_identity_residual = std::max(rep.boundary_identity_residual,
                                              std::abs(ux0 - dfdt));
  }

  // (b) weak-form residuals for the family of candidates. f(y) = -y^3 is the
  // cubic with gamma = -2.
  PotentialSpec vspec;
  vspec.pieces.push_back({0.0, t_hi + 2.0, true, 1.0, {}, {}});
  Potential pot = build_potential(vspec);
  Nonlinearity nl = make_cubic(-2.0);
  auto bank = make_test_bank(t_hi + 1.0, t_hi, bank_size, seed);

  WeakCandidate zero;
  zero.name = "zero";
  zero.ut = [](double, double) { return 0.0; };
  zero.ux = [](double, double) { return 0.0; };
  zero.ut0 = [](double) { return 0.0; };
  zero.u1 = [](double) { return 0.0; };
  std::vector<WeakCandidate> cands{zero, demo_detail::up_candidate(0.0, 1.0, "u_p"),
                                   demo_detail::up_candidate(1.0, 1.0, "u_p(t-1)"),
                                   demo_detail::up_candidate(1.0, -1.0, "-u_p(t-1)")};
  for (const auto& c : cands)
    rep.candidates.push_back({c.name, weak_residual(c, nl, pot, bank)});

  // (c) the forward solver must refuse the decreasing nonlinearity.
  try {
    CoordinateMap map(pot);
    InitialData zero_data;
    SolverParams p;
    p.T = 1.0;
    p.dz = 1e-2;
    run_simulation(map, nl, zero_data, p);
    rep.solver_refused = false;
  } catch (const DecreasingNonlinearity& e) {
    rep.solver_refused = true;
    rep.refusal_message = e.what();
  }
  return rep;
}

}  // namespace charwave
