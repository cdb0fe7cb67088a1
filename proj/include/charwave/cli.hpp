#pragma once

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "charwave/breather.hpp"
#include "charwave/config.hpp"
#include "charwave/diagnostics.hpp"
#include "charwave/io.hpp"
#include "charwave/ivp.hpp"
#include "charwave/nonuniqueness.hpp"

namespace charwave {

namespace cli_detail {

// Per-bump weak residuals, used by the diag subcommand's CSV output.
inline std::vector<double> weak_residual_per_bump(const WeakCandidate& cand,
                                                  const Nonlinearity& nl, const Potential& pot,
                                                  const std::vector<TestBump>& bank) {
  std::vector<double> out;
  for (const auto& bump : bank)
    out.push_back(weak_residual(cand, nl, pot, std::vector<TestBump>{bump}));
  return out;
}

inline int run_solve(const std::string& config_path, const std::string& out_dir) {
  ParsedConfig cfg = parse_config_file(config_path);
  CoordinateMap map(cfg.potential);
  SolutionRecord rec = run_simulation(map, cfg.nl, cfg.data, cfg.params);
  RunManifest man;
  man.subcommand = "solve";
  man.config_hash = cfg.config_hash;
  man.outputs = write_solution_record(out_dir, rec, cfg.echo);
  man.wall_time_seconds = rec.runtime_seconds;
  man.write(out_dir);
  return 0;
}

inline int run_diag(const std::string& record_dir, const std::string& out_dir, bool weak,
                    bool conservation) {
  auto t0 = std::chrono::steady_clock::now();
  LoadedRecord lr = load_record(record_dir);
  fs::create_directories(out_dir);
  RunManifest man;
  man.subcommand = "diag";
  man.config_hash = lr.config.config_hash;
  if (conservation) {
    ConservationSeries cs = conservation_report(lr.record, lr.config.nl);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < cs.t.size(); ++i) rows.push_back({cs.t[i], cs.E[i], cs.M[i]});
    write_csv(fs::path(out_dir) / "conservation.csv", {"t", "E", "M"}, rows);
    write_csv(fs::path(out_dir) / "drifts.csv", {"e_drift_rel", "m_drift_rel", "snapshot_max_dev"},
              {{cs.e_drift_rel, cs.m_drift_rel, cs.snapshot_max_dev}});
    man.outputs.push_back("conservation.csv");
    man.outputs.push_back("drifts.csv");
  }
  if (weak) {
    WeakCandidate cand = grid_candidate(lr.record, lr.config.data);
    double t_hi = lr.record.trace.t.back();
    double x_hi = lr.record.medium.x[lr.record.medium.n - 1];
    auto bank = make_test_bank(std::min(x_hi, t_hi + 1.0), t_hi, 12, lr.config.seed);
    auto per_bump = weak_residual_per_bump(cand, lr.config.nl, lr.config.potential, bank);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < per_bump.size(); ++i)
      rows.push_back({static_cast<double>(i), per_bump[i]});
    write_csv(fs::path(out_dir) / "weak.csv", {"bump", "residual"}, rows);
    man.outputs.push_back("weak.csv");
  }
  man.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  man.write(out_dir);
  return 0;
}

inline int run_breather(double a, double b, double theta, double omega, double gamma, int N,
                        const std::string& out_dir, double dz, bool roundtrip) {
  auto t0 = std::chrono::steady_clock::now();
  BreatherMedium med = validate_resonance(a, b, theta, omega);
  Nonlinearity nl = make_cubic(gamma);
  std::vector<BlochMode> modes;
  for (int i = 0; i < (N + 1) / 2; ++i) modes.push_back(bloch_mode(med, 2 * i + 1));

  fs::create_directories(out_dir);
  RunManifest man;
  man.subcommand = "breather";
  json echo = {{"a", a}, {"b", b}, {"theta", theta}, {"omega", omega},
               {"gamma", gamma}, {"N", N}, {"dz", dz}};
  man.config_hash = hex64(fnv1a(echo.dump()));

  std::vector<std::vector<double>> mode_rows;
  for (const auto& mo : modes)
    mode_rows.push_back({static_cast<double>(mo.k), 1.0, mo.dphi0, mo.multiplier});
  write_csv(fs::path(out_dir) / "modes.csv", {"k", "phi0", "dphi0", "multiplier"}, mode_rows);
  man.outputs.push_back("modes.csv");

  BreatherSynthesis syn = synthesize_breather(med, modes, nl, N);
  std::vector<std::vector<double>> coeff_rows;
  for (int i = 0; i < syn.coeffs.count(); ++i)
    coeff_rows.push_back({static_cast<double>(TraceCoefficients::harmonic(i)),
                          syn.coeffs.alpha[i].real(), syn.coeffs.alpha[i].imag(),
                          syn.residuals[i]});
  write_csv(fs::path(out_dir) / "coeffs.csv", {"k", "re_alpha", "im_alpha", "residual"},
            coeff_rows);
  man.outputs.push_back("coeffs.csv");

  if (roundtrip) {
    BreatherField field{med, modes, syn.coeffs};
    std::vector<std::vector<double>> rows;
    for (double h : {dz, dz / 2}) {
      RoundtripReport rr = breather_roundtrip_check(field, nl, h);
      rows.push_back({h, rr.period_error, rr.antiperiod_error, rr.energy_drift_rel,
                      rr.decay_ratio, rr.decay_expected});
    }
    write_csv(fs::path(out_dir) / "roundtrip.csv",
              {"dz", "period_error", "antiperiod_error", "energy_drift_rel", "decay_ratio",
               "decay_expected"},
              rows);
    man.outputs.push_back("roundtrip.csv");
  }
  man.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  man.write(out_dir);
  return 0;
}

inline int run_demo_nonuniqueness(const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();
  NonuniquenessReport rep = nonuniqueness_demo();
  fs::create_directories(out_dir);
  json j;
  j["boundary_identity_residual"] = rep.boundary_identity_residual;
  j["solver_refused"] = rep.solver_refused;
  j["refusal_message"] = rep.refusal_message;
  json cands = json::array();
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.candidates.size(); ++i) {
    cands.push_back({{"name", rep.candidates[i].name},
                     {"weak_residual", rep.candidates[i].weak_residual}});
    rows.push_back({static_cast<double>(i), rep.candidates[i].weak_residual});
  }
  j["candidates"] = cands;
  std::ofstream out(fs::path(out_dir) / "nonuniqueness.json");
  out << j.dump(2) << "\n";
  write_csv(fs::path(out_dir) / "candidates.csv", {"candidate", "weak_residual"}, rows);
  RunManifest man;
  man.subcommand = "demo-nonuniqueness";
  man.config_hash = hex64(fnv1a(j.dump()));
  man.outputs = {"nonuniqueness.json", "candidates.csv"};
  man.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  man.write(out_dir);
  return 0;
}

inline int run_converge(const std::string& config_path, const std::string& out_dir, int rungs) {
  auto t0 = std::chrono::steady_clock::now();
  ParsedConfig cfg = parse_config_file(config_path);
  CoordinateMap map(cfg.potential);
  std::vector<SolutionRecord> runs;
  std::vector<double> dzs;
  for (int r = 0; r < rungs; ++r) {
    SolverParams p = cfg.params;
    p.dz = cfg.params.dz / std::pow(2.0, r);
    p.snapshot_every = 0;  // first and last snapshot only
    dzs.push_back(p.dz);
    runs.push_back(run_simulation(map, cfg.nl, cfg.data, p));
  }
  // Errors between consecutive rungs on the coarse run's trace times and on
  // the final-time field at coarse nodes.
  auto trace_diff = [&](const SolutionRecord& coarse, const SolutionRecord& fine, int ratio) {
    double worst = 0;
    for (std::size_t i = 0; i < coarse.trace.t.size(); ++i) {
      std::size_t j = i * ratio;
      worst = std::max(worst, std::abs(coarse.trace.d[i] - fine.trace.d[j]));
      worst = std::max(worst, std::abs(coarse.trace.b[i] - fine.trace.b[j]));
    }
    return worst;
  };
  auto field_diff = [&](const SolutionRecord& coarse, const SolutionRecord& fine, int ratio) {
    const Snapshot &a = coarse.snapshots.back(), &b = fine.snapshots.back();
    double worst = 0;
    int n = std::min<int>(coarse.medium.n, (fine.medium.n - 1) / ratio + 1);
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(a.u[i] - b.u[i * ratio]));
      worst = std::max(worst, std::abs(a.ut[i] - b.ut[i * ratio]));
    }
    return worst;
  };
  std::vector<std::vector<double>> rows;
  std::vector<double> et(rungs - 1), ef(rungs - 1);
  for (int r = 0; r + 1 < rungs; ++r) {
    et[r] = trace_diff(runs[r], runs[r + 1], 2);
    ef[r] = field_diff(runs[r], runs[r + 1], 2);
    double p_trace = r > 0 ? std::log2(et[r - 1] / et[r]) : 0.0;
    double p_field = r > 0 ? std::log2(ef[r - 1] / ef[r]) : 0.0;
    rows.push_back({dzs[r], et[r], ef[r], p_trace, p_field});
  }
  fs::create_directories(out_dir);
  write_csv(fs::path(out_dir) / "orders.csv",
            {"dz", "trace_diff", "field_diff", "p_trace", "p_field"}, rows);
  RunManifest man;
  man.subcommand = "converge";
  man.config_hash = cfg.config_hash;
  man.outputs = {"orders.csv"};
  man.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  man.write(out_dir);
  return 0;
}

}  // namespace cli_detail

// Subcommand dispatch. Exit codes: 0 ok, 1 unexpected failure, 2 invalid
// config, 3 refused (ill-posed), 4 no convergence.
inline int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"charwave: characteristic-grid solver for V(x) u_tt = u_xx on the half line "
               "with the boundary condition u_x(0,t) = (f(u_t(0,t)))_t"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", record_dir;
  bool weak = false, conservation = true;
  double a = 1.0, b = 25.0 / 9.0, theta = 0.25, omega = 1.0, gamma = 1.0;
  int N = 9, rungs = 3;
  double breather_dz = M_PI / 64;
  bool roundtrip = true;

  auto* solve = app.add_subcommand("solve", "run the initial value problem from a JSON config");
  solve->add_option("--config", config_path, "JSON configuration file")->required();
  solve->add_option("--out", out_dir, "output directory");

  auto* diag = app.add_subcommand("diag", "conservation and weak-form diagnostics of a run");
  diag->add_option("--record", record_dir, "directory written by solve")->required();
  diag->add_option("--out", out_dir, "output directory (defaults to the record)");
  diag->add_flag("--weak", weak, "evaluate the weak-form residual of the stored field");
  diag->add_flag("--conservation,!--no-conservation", conservation,
                 "emit energy/momentum series and drifts");

  auto* brw = app.add_subcommand("breather", "Bloch modes and breather synthesis for the "
                                             "periodic step medium");
  brw->add_option("--a", a, "potential value in the centered layers");
  brw->add_option("--b", b, "potential value in the outer layers");
  brw->add_option("--theta", theta, "relative centered-layer width, in (0,1)");
  brw->add_option("--omega", omega, "breather frequency");
  brw->add_option("--gamma", gamma, "cubic boundary coefficient, f(y) = (gamma/2) y^3");
  brw->add_option("--N", N, "odd harmonic truncation");
  brw->add_option("--dz", breather_dz, "grid spacing for the round-trip check");
  brw->add_flag("--roundtrip,!--no-roundtrip", roundtrip, "run the IVP round trip");
  brw->add_option("--out", out_dir, "output directory");

  auto* demo = app.add_subcommand("demo-nonuniqueness",
                                  "weak-solution family for the decreasing cubic");
  demo->add_option("--out", out_dir, "output directory");

  auto* conv = app.add_subcommand("converge", "dz-halving ladder with observed orders");
  conv->add_option("--config", config_path, "JSON configuration file")->required();
  conv->add_option("--out", out_dir, "output directory");
  conv->add_option("--rungs", rungs, "number of ladder rungs")->check(CLI::Range(2, 6));

  std::vector<const char*> argv;
  argv.push_back("charwave");
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.got_subcommand(solve)) return cli_detail::run_solve(config_path, out_dir);
    if (app.got_subcommand(diag))
      return cli_detail::run_diag(record_dir, out_dir == "out" ? record_dir : out_dir, weak,
                                  conservation);
    if (app.got_subcommand(brw))
      return cli_detail::run_breather(a, b, theta, omega, gamma, N, out_dir, breather_dz,
                                      roundtrip);
    if (app.got_subcommand(demo)) return cli_detail::run_demo_nonuniqueness(out_dir);
    if (app.got_subcommand(conv)) return cli_detail::run_converge(config_path, out_dir, rungs);
  } catch (const Error& e) {
    std::cerr << "charwave: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "charwave: unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace charwave
