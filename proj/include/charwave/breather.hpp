#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "charwave/errors.hpp"
#include "charwave/ivp.hpp"
#include "charwave/nonlinearity.hpp"
#include "charwave/potential.hpp"

namespace charwave {

// 2pi-periodic step medium of (A5) with the resonance integers of (A6):
// m_a = 4 sqrt(a) theta omega and m_b = 4 sqrt(b) (1-theta) omega, both odd.
struct BreatherMedium {
  double a = 1, b = 1, theta = 0.5, omega = 1, T = 2 * M_PI;
  int m_a = 1, m_b = 1;

  double decay_rate() const { return (std::log(b) - std::log(a)) / (4 * M_PI); }
};

inline BreatherMedium validate_resonance(double a, double b, double theta, double omega,
                                         double tol = 1e-9) {
  if (!(b > a && a > 0)) throw ConfigInvalid("breather medium requires 0 < a < b");
  if (!(theta > 0 && theta < 1)) throw ConfigInvalid("breather medium requires theta in (0,1)");
  if (!(omega > 0)) throw ConfigInvalid("breather medium requires omega > 0");
  double ra = 4 * std::sqrt(a) * theta * omega;
  double rb = 4 * std::sqrt(b) * (1 - theta) * omega;
  long ia = std::llround(ra), ib = std::llround(rb);
  double res_a = std::abs(ra - ia), res_b = std::abs(rb - ib);
  bool ok = res_a <= tol && res_b <= tol && ia % 2 == 1 && ib % 2 == 1 && ia >= 1 && ib >= 1;
  if (!ok)
    throw ResonanceViolated("4 sqrt(a) theta omega = " + std::to_string(ra) +
                            " (residual " + std::to_string(res_a) + "), 4 sqrt(b)(1-theta) omega = " +
                            std::to_string(rb) + " (residual " + std::to_string(res_b) +
                            "); both must be odd integers");
  BreatherMedium m;
  m.a = a;
  m.b = b;
  m.theta = theta;
  m.omega = omega;
  m.T = 2 * M_PI / omega;
  m.m_a = static_cast<int>(ia);
  m.m_b = static_cast<int>(ib);
  return m;
}

// Rotation-like transfer matrix of -phi'' = s^2 phi over length l:
// maps (phi, phi') at the left end to the right end. Determinant 1.
inline Eigen::Matrix2d transfer_matrix(double s, double l) {
  Eigen::Matrix2d T;
  double c = std::cos(s * l), sn = std::sin(s * l);
  T << c, sn / s, -s * sn, c;
  return T;
}

namespace breather_detail {

struct CellPiece {
  double x0, len, s;  // piece start, length, local wavenumber k w sqrt(v)
};

inline std::vector<CellPiece> cell_pieces(const BreatherMedium& m, int k) {
  double sa = std::abs(k) * m.omega * std::sqrt(m.a);
  double sb = std::abs(k) * m.omega * std::sqrt(m.b);
  double d1 = m.theta * M_PI, d2 = (2 - m.theta) * M_PI;
  return {{0.0, d1, sa}, {d1, d2 - d1, sb}, {d2, 2 * M_PI - d2, sa}};
}

}  // namespace breather_detail

// Monodromy of L_k = -d^2/dx^2 - k^2 w^2 V over one 2pi cell.
inline Eigen::Matrix2d cell_monodromy(const BreatherMedium& m, int k) {
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
  for (const auto& p : breather_detail::cell_pieces(m, k)) M = transfer_matrix(p.s, p.len) * M;
  return M;
}

// Fundamental decaying Bloch mode phi_k (k odd): phi_k(0) = 1, multiplier
// inside (0,1) in absolute value over one cell, phi_k(x + 4pi) = (a/b) phi_k(x).
struct BlochMode {
  int k = 1;
  double dphi0 = 0;            // phi_k'(0)
  double multiplier = 0;       // Floquet multiplier over one 2pi cell
  BreatherMedium medium;
  std::vector<breather_detail::CellPiece> pieces;
  std::vector<Eigen::Vector2d> piece_start;  // (phi, phi') at each piece start

  double eval(double x, double* deriv = nullptr) const {
    int cell = static_cast<int>(std::floor(x / (2 * M_PI) + 1e-14));
    double rem = x - 2 * M_PI * cell;
    double scale = std::pow(multiplier, cell);
    for (std::size_t p = pieces.size(); p-- > 0;) {
      if (rem >= pieces[p].x0 - 1e-12) {
        double s = pieces[p].s, dx = rem - pieces[p].x0;
        const Eigen::Vector2d& y = piece_start[p];
        double phi = y[0] * std::cos(s * dx) + y[1] * std::sin(s * dx) / s;
        if (deriv) *deriv = scale * (-y[0] * s * std::sin(s * dx) + y[1] * std::cos(s * dx));
        return scale * phi;
      }
    }
    if (deriv) *deriv = scale * piece_start[0][1];
    return scale * piece_start[0][0];
  }
};

inline BlochMode bloch_mode(const BreatherMedium& m, int k) {
  if (k % 2 == 0)
    throw EvenHarmonic("k = " + std::to_string(k) +
                       " is even; only odd harmonics carry decaying modes");
  Eigen::Matrix2d M = cell_monodromy(m, k);
  double tr = M.trace();
  double disc = tr * tr - 4.0;
  if (disc <= 1e-12)
    throw DegenerateFloquet("monodromy trace " + std::to_string(tr) +
                            " gives no hyperbolic splitting");
  double root = std::sqrt(disc);
  double mu1 = 0.5 * (tr - root), mu2 = 0.5 * (tr + root);
  double mu = std::abs(mu1) < std::abs(mu2) ? mu1 : mu2;
  if (!(std::abs(mu) > 0 && std::abs(mu) < 1))
    throw DegenerateFloquet("no strictly decaying Floquet multiplier");
  if (std::abs(mu1 - mu2) < 1e-12) throw DegenerateFloquet("eigenvalue gap below 1e-12");

  // Eigenvector of the decaying eigenvalue, normalized to phi(0) = 1.
  Eigen::Vector2d v;
  Eigen::Vector2d cand1(M(0, 1), mu - M(0, 0));
  Eigen::Vector2d cand2(mu - M(1, 1), M(1, 0));
  v = cand1.norm() >= cand2.norm() ? cand1 : cand2;
  if (std::abs(v[0]) < 1e-12 * v.norm())
    throw DegenerateFloquet("decaying mode has phi(0) = 0; cannot normalize");
  v /= v[0];

  BlochMode mode;
  mode.k = k;
  mode.medium = m;
  mode.multiplier = mu;
  mode.dphi0 = v[1];
  mode.pieces = breather_detail::cell_pieces(m, k);
  Eigen::Vector2d y = v;
  for (const auto& p : mode.pieces) {
    mode.piece_start.push_back(y);
    y = transfer_matrix(p.s, p.len) * y;
  }
  return mode;
}

// -----------------------------------------------------------------------------
// Odd-harmonic Fourier traces. e_k(t) = e^{i k w t} / sqrt(T); storage holds
// the positive odd harmonics only, alpha_{-k} = conj(alpha_k) implied.
// -----------------------------------------------------------------------------
struct TraceCoefficients {
  int N = 1;  // highest odd harmonic
  std::vector<std::complex<double>> alpha;  // index (k-1)/2 for k = 1,3,...,N

  int count() const { return (N + 1) / 2; }
  static int harmonic(int idx) { return 2 * idx + 1; }
};

namespace breather_detail {

using cd = std::complex<double>;

// Real trace from positive odd harmonics: sum_k a_k e_k + conj.
inline double synth(const std::vector<cd>& coef, double omega, double T, double t,
                    int deriv_power = 0) {
  cd acc(0, 0);
  for (std::size_t i = 0; i < coef.size(); ++i) {
    double kw = (2.0 * i + 1.0) * omega;
    cd factor = std::pow(cd(0, kw), deriv_power);
    acc += coef[i] * factor * std::exp(cd(0, kw * t));
  }
  return 2.0 * acc.real() / std::sqrt(T);
}

// Fourier analysis on M uniform samples: hat g_k = int g conj(e_k).
inline cd analyze(const std::vector<double>& samples, double omega, double T, int k) {
  int M = static_cast<int>(samples.size());
  cd acc(0, 0);
  for (int j = 0; j < M; ++j) {
    double t = T * j / M;
    acc += samples[j] * std::exp(cd(0, -k * omega * t));
  }
  return acc * std::sqrt(T) / static_cast<double>(M);
}

}  // namespace breather_detail

// alpha -> beta: multiply coefficient-wise by phi_k'(0)/(i k w)  (eq. 7.x).
inline TraceCoefficients alpha_to_beta(const BreatherMedium& m, const std::vector<BlochMode>& modes,
                                       const TraceCoefficients& alpha) {
  TraceCoefficients beta = alpha;
  for (int i = 0; i < alpha.count(); ++i) {
    int k = TraceCoefficients::harmonic(i);
    beta.alpha[i] = modes[i].dphi0 / std::complex<double>(0, k * m.omega) * alpha.alpha[i];
  }
  return beta;
}

// beta -> alpha: sample beta, apply f^{-1} pointwise, integrate spectrally by
// dividing odd harmonics by i k w. Even harmonics must vanish.
inline TraceCoefficients beta_to_alpha(const BreatherMedium& m, const Nonlinearity& nl,
                                       const TraceCoefficients& beta, int oversample = 16,
                                       double even_tol = 1e-10) {
  int M = std::max(8, oversample) * (beta.N + 1);
  std::vector<double> g(M);
  double scale = 0;
  for (int j = 0; j < M; ++j) {
    double t = m.T * j / M;
    g[j] = nl.f_inv(breather_detail::synth(beta.alpha, m.omega, m.T, t));
    scale = std::max(scale, std::abs(g[j]));
  }
  TraceCoefficients alpha;
  alpha.N = beta.N;
  alpha.alpha.resize(beta.count());
  for (int i = 0; i < beta.count(); ++i) {
    int k = TraceCoefficients::harmonic(i);
    alpha.alpha[i] = breather_detail::analyze(g, m.omega, m.T, k) /
                     std::complex<double>(0, k * m.omega);
  }
  for (int k = 0; k <= beta.N; k += 2) {
    if (std::abs(breather_detail::analyze(g, m.omega, m.T, k)) > even_tol * std::max(scale, 1.0))
      throw EvenHarmonic("even harmonic present in f^{-1}(beta)");
  }
  return alpha;
}

// -----------------------------------------------------------------------------
// Truncated-Fourier breather synthesis for the cubic boundary term:
// residual R_k = phi_k'(0) alpha_k - i k w F_k(f(alpha')) for odd |k| <= N.
// -----------------------------------------------------------------------------
struct BreatherSynthesis {
  TraceCoefficients coeffs;
  std::vector<double> residuals;  // |R_k| per positive odd k
  double residual_inf = 0;
  int newton_iterations = 0;
  bool converged = false;
};

inline std::vector<std::complex<double>> breather_residual(const BreatherMedium& m,
                                                           const std::vector<BlochMode>& modes,
                                                           const Nonlinearity& nl,
                                                           const TraceCoefficients& alpha,
                                                           int oversample = 16) {
  using cd = std::complex<double>;
  // f is cubic, so f(alpha') is band-limited to 3N; 16N samples are alias-free.
  int M = std::max(8, oversample) * (alpha.N + 1) * 2;
  std::vector<double> fap(M);
  for (int j = 0; j < M; ++j) {
    double t = m.T * j / M;
    fap[j] = nl.f(breather_detail::synth(alpha.alpha, m.omega, m.T, t, 1));
  }
  std::vector<cd> R(alpha.count());
  for (int i = 0; i < alpha.count(); ++i) {
    int k = TraceCoefficients::harmonic(i);
    cd ft_k = breather_detail::analyze(fap, m.omega, m.T, k);
    R[i] = modes[i].dphi0 * alpha.alpha[i] - cd(0, k * m.omega) * ft_k;
  }
  return R;
}

struct NewtonOptions {
  double tol = 1e-11;
  int max_iterations = 60;
  double fd_step = 1e-6;
};

inline BreatherSynthesis synthesize_breather(const BreatherMedium& m,
                                             const std::vector<BlochMode>& modes,
                                             const Nonlinearity& nl, int N,
                                             TraceCoefficients seed = {},
                                             const NewtonOptions& opts = {}) {
  if (N % 2 == 0) throw ConfigInvalid("truncation N must be odd");
  if (static_cast<int>(modes.size()) < (N + 1) / 2)
    throw ConfigInvalid("need Bloch modes for every odd harmonic up to N");
  using cd = std::complex<double>;
  const int nc = (N + 1) / 2;

  if (seed.alpha.empty()) {
    // One-mode balance: C A + (3 gamma w^4 / (2T)) A^3 = 0 for the cubic
    // f = (gamma/2) y^3. Seeded real (time-even ansatz) when C/gamma < 0.
    double C = modes[0].dphi0;
    double gamma = 2.0 * nl.f(1.0);  // f(1) = gamma/2
    double w4 = std::pow(m.omega, 4);
    double A2 = -2.0 * m.T * C / (3.0 * gamma * w4);
    seed.N = N;
    seed.alpha.assign(nc, cd(0, 0));
    seed.alpha[0] = A2 > 0 ? cd(std::sqrt(A2), 0) : cd(0, std::sqrt(-A2));
  }
  seed.N = N;
  seed.alpha.resize(nc, cd(0, 0));

  auto pack = [nc](const TraceCoefficients& c) {
    Eigen::VectorXd x(2 * nc);
    for (int i = 0; i < nc; ++i) {
      x[2 * i] = c.alpha[i].real();
      x[2 * i + 1] = c.alpha[i].imag();
    }
    return x;
  };
  auto unpack = [nc, N](const Eigen::VectorXd& x) {
    TraceCoefficients c;
    c.N = N;
    c.alpha.resize(nc);
    for (int i = 0; i < nc; ++i) c.alpha[i] = cd(x[2 * i], x[2 * i + 1]);
    return c;
  };
  auto eval = [&](const Eigen::VectorXd& x) {
    auto R = breather_residual(m, modes, nl, unpack(x));
    Eigen::VectorXd r(2 * nc);
    for (int i = 0; i < nc; ++i) {
      r[2 * i] = R[i].real();
      r[2 * i + 1] = R[i].imag();
    }
    return r;
  };

  Eigen::VectorXd x = pack(seed);
  Eigen::VectorXd r = eval(x);
  double seed_scale = std::max(x.cwiseAbs().maxCoeff(), 1e-3);
  BreatherSynthesis out;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    out.newton_iterations = it;
    if (r.cwiseAbs().maxCoeff() <= opts.tol) {
      out.converged = true;
      break;
    }
    // Forward-difference Jacobian; the time-translation symmetry makes it
    // rank-deficient at solutions, so solve the step by SVD least squares.
    Eigen::MatrixXd J(2 * nc, 2 * nc);
    double h = opts.fd_step * seed_scale;
    for (int j = 0; j < 2 * nc; ++j) {
      Eigen::VectorXd xp = x;
      xp[j] += h;
      J.col(j) = (eval(xp) - r) / h;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    Eigen::VectorXd step = svd.solve(-r);
    double lam = 1.0;
    bool improved = false;
    double r_norm = r.norm();
    for (int ls = 0; ls < 30; ++ls) {
      Eigen::VectorXd xn = x + lam * step;
      Eigen::VectorXd rn = eval(xn);
      if (rn.norm() <= (1 - 1e-4 * lam) * r_norm) {
        x = xn;
        r = rn;
        improved = true;
        break;
      }
      lam *= 0.5;
    }
    if (!improved)
      throw NewtonDiverged("line search stalled at residual " + std::to_string(r_norm));
  }
  out.coeffs = unpack(x);
  out.residual_inf = r.cwiseAbs().maxCoeff();
  out.residuals.resize(nc);
  for (int i = 0; i < nc; ++i)
    out.residuals[i] = std::abs(cd(r[2 * i], r[2 * i + 1]));
  if (!out.converged)
    throw NewtonDiverged("Newton did not reach tol; final residual " +
                         std::to_string(out.residual_inf));
  if (x.cwiseAbs().maxCoeff() < 1e-8 * seed_scale)
    throw TrivialSolution("Newton converged to the zero branch; retry with a scaled seed");
  return out;
}

// -----------------------------------------------------------------------------
// Field evaluation u(x,t) = sum_k alpha_k phi_k(x) e_k(t) (odd k, Hermitian).
// -----------------------------------------------------------------------------
struct BreatherField {
  BreatherMedium medium;
  std::vector<BlochMode> modes;
  TraceCoefficients coeffs;

  double value(double x, double t) const { return assemble(x, t, 0, false); }
  double ut(double x, double t) const { return assemble(x, t, 1, false); }
  double ux(double x, double t) const { return assemble(x, t, 0, true); }

  // max imaginary part seen when assembling with the conjugate pair kept
  // explicit; should vanish to rounding for Hermitian coefficients.
  double imag_defect(double x, double t) const {
    using cd = std::complex<double>;
    cd acc(0, 0);
    for (int i = 0; i < coeffs.count(); ++i) {
      int k = TraceCoefficients::harmonic(i);
      double phi = modes[i].eval(x);
      cd ek = std::exp(cd(0, k * medium.omega * t)) / std::sqrt(medium.T);
      acc += coeffs.alpha[i] * phi * ek + std::conj(coeffs.alpha[i]) * phi * std::conj(ek);
    }
    return std::abs(acc.imag());
  }

 private:
  double assemble(double x, double t, int time_deriv, bool space_deriv) const {
    using cd = std::complex<double>;
    cd acc(0, 0);
    for (int i = 0; i < coeffs.count(); ++i) {
      int k = TraceCoefficients::harmonic(i);
      double kw = k * medium.omega;
      double phi, dphi;
      phi = modes[i].eval(x, &dphi);
      double basis = space_deriv ? dphi : phi;
      cd factor = std::pow(cd(0, kw), time_deriv);
      acc += coeffs.alpha[i] * factor * basis * std::exp(cd(0, kw * t));
    }
    return 2.0 * acc.real() / std::sqrt(medium.T);
  }
};

// -----------------------------------------------------------------------------
// Round trip through the IVP solver: seed with the breather's own data, run
// one period, report periodicity/antiperiodicity defects and energy drift.
// -----------------------------------------------------------------------------
struct RoundtripReport {
  double period_error = 0;        // sup |u(.,T) - u(.,0)| on the probe window
  double antiperiod_error = 0;    // sup |u(.,T/2) + u(.,0)|
  double energy_drift_rel = 0;
  double decay_ratio = 0;         // sup_t |u(4pi,t)| / sup_t |u(0,t)|
  double decay_expected = 0;      // e^{-rho 4pi} = a/b
  double dz = 0;
};

inline RoundtripReport breather_roundtrip_check(const BreatherField& field,
                                                const Nonlinearity& nl, double dz,
                                                double x_probe = 8 * M_PI,
                                                int probe_cells_margin = 4) {
  const BreatherMedium& med = field.medium;
  // z-length of one 2pi cell and of the leading a-half.
  double z_half_a = std::sqrt(med.a) * med.theta * M_PI;
  double z_cell = 2 * z_half_a + std::sqrt(med.b) * 2 * (1 - med.theta) * M_PI;
  double z_probe = std::ceil(x_probe / (2 * M_PI)) * z_cell;
  double z_need = z_probe + med.T + probe_cells_margin * dz;
  int cells = static_cast<int>(std::ceil(z_need / z_cell)) + 1;
  double x_pot = cells * 2 * M_PI;

  Potential pot = build_potential(step_potential_a5(med.a, med.b, med.theta, x_pot));
  CoordinateMap map(pot);

  InitialData data;
  data.u0.value = [&field](double x) { return field.value(x, 0.0); };
  data.u0.derivative = [&field](double x) { return field.ux(x, 0.0); };
  data.u1.value = [&field](double x) { return field.ut(x, 0.0); };
  data.u1.support_hi = x_pot;
  data.u0.support_hi = x_pot;

  SolverParams params;
  params.T = med.T;
  params.dz = dz;
  int steps = static_cast<int>(std::llround(med.T / dz));
  if (steps % 2 != 0) throw ConfigInvalid("dz must split the period into an even step count");
  params.snapshot_every = steps / 2;
  params.domain_z_end = std::floor(map.z_max() / dz) * dz;

  SolutionRecord rec = run_simulation(map, nl, data, params);

  RoundtripReport rep;
  rep.dz = dz;
  const MediumGrid& m = rec.medium;
  const Snapshot &s0 = rec.snapshots.front(), &sh = rec.snapshots[1], &sT = rec.snapshots.back();
  for (int i = 0; i < m.n && m.z[i] <= z_probe; ++i) {
    rep.period_error = std::max(rep.period_error, std::abs(sT.u[i] - s0.u[i]));
    rep.antiperiod_error = std::max(rep.antiperiod_error, std::abs(sh.u[i] + s0.u[i]));
  }
  double e0 = rec.energy.front(), scale = std::max(std::abs(e0), 1e-14);
  for (double e : rec.energy)
    rep.energy_drift_rel = std::max(rep.energy_drift_rel, std::abs(e - e0) / scale);

  double amp0 = 0, amp4 = 0;
  for (int j = 0; j <= 256; ++j) {
    double t = med.T * j / 256.0;
    amp0 = std::max(amp0, std::abs(field.value(0.0, t)));
    amp4 = std::max(amp4, std::abs(field.value(4 * M_PI, t)));
  }
  rep.decay_ratio = amp4 / amp0;
  rep.decay_expected = std::exp(-field.medium.decay_rate() * 4 * M_PI);
  return rep;
}

}  // namespace charwave
