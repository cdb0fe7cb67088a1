#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "charwave/config.hpp"
#include "charwave/errors.hpp"
#include "charwave/ivp.hpp"
#include "charwave/util.hpp"

namespace charwave {

namespace fs = std::filesystem;

// CSV with fixed 17-significant-digit scientific formatting so reruns of the
// same config produce byte-identical bodies.
inline void write_csv(const fs::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigInvalid("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << fmt_sci(row[i]) << (i + 1 < row.size() ? "," : "\n");
  }
}

struct RunManifest {
  std::string config_hash, subcommand, status = "ok";
  double wall_time_seconds = 0;
  std::vector<std::string> outputs;

  void write(const fs::path& dir) const {
    json j;
    j["tool"] = "charwave";
    j["version"] = kVersion;
    j["config_hash"] = config_hash;
    j["subcommand"] = subcommand;
    j["status"] = status;
    j["wall_time_seconds"] = wall_time_seconds;
    j["outputs"] = outputs;
    std::ofstream out(dir / "manifest.json");
    out << j.dump(2) << "\n";
  }
};

inline std::string snapshot_filename(double t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "snapshot_%.6f.csv", t);
  return buf;
}

// Emits trace.csv, snapshot_<t>.csv and meta.json for a finished run.
inline std::vector<std::string> write_solution_record(const fs::path& dir,
                                                      const SolutionRecord& rec,
                                                      const json& config_echo) {
  fs::create_directories(dir);
  std::vector<std::string> outputs;

  std::vector<std::vector<double>> trace_rows;
  for (std::size_t i = 0; i < rec.trace.t.size(); ++i)
    trace_rows.push_back({rec.trace.t[i], rec.trace.b[i], rec.trace.d[i], rec.trace.bprime[i],
                          rec.energy[i], rec.momentum[i]});
  write_csv(dir / "trace.csv", {"t", "b", "d", "u_t0", "E", "M"}, trace_rows);
  outputs.push_back("trace.csv");

  json snaps = json::array();
  for (const auto& s : rec.snapshots) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < rec.medium.n; ++i)
      rows.push_back({rec.medium.x[i], rec.medium.z[i], s.u[i], s.ut[i], s.ux[i]});
    std::string name = snapshot_filename(s.t);
    write_csv(dir / name, {"x", "z", "u", "u_t", "u_x"}, rows);
    outputs.push_back(name);
    snaps.push_back({{"t", s.t}, {"file", name}});
  }

  json meta;
  meta["config"] = config_echo;
  meta["snapshots"] = snaps;
  meta["grid"] = {{"dz", rec.medium.dz},
                  {"nodes", rec.medium.n},
                  {"interfaces", rec.medium.interfaces},
                  {"snap_errors", rec.medium.snap_errors},
                  {"wall_node", rec.medium.wall_node}};
  meta["convergence"] = {{"steps", rec.steps},
                         {"exact_transport", rec.potentials},
                         {"u_consistency", rec.u_consistency}};
  meta["runtime_seconds"] = rec.runtime_seconds;
  std::ofstream out(dir / "meta.json");
  out << meta.dump(2) << "\n";
  outputs.push_back("meta.json");
  return outputs;
}

inline std::vector<std::vector<double>> read_csv(const fs::path& path,
                                                 std::vector<std::string>* header = nullptr) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      cells.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (first) {
      if (header) *header = cells;
      first = false;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(std::stod(c));
    rows.push_back(std::move(row));
  }
  return rows;
}

struct LoadedRecord {
  ParsedConfig config;
  SolutionRecord record;
};

// Rehydrates a run directory: meta.json is re-parsed (including the config
// echo) and the medium rebuilt deterministically from it.
inline LoadedRecord load_record(const fs::path& dir) {
  std::ifstream metain(dir / "meta.json");
  if (!metain) throw ConfigInvalid("no meta.json in " + dir.string());
  json meta;
  metain >> meta;
  LoadedRecord lr;
  lr.config = parse_config(meta.at("config"));

  CoordinateMap map(lr.config.potential);
  PreparedRun pr = prepare_run(map, lr.config.data, lr.config.params);
  lr.record.medium = pr.medium;
  lr.record.steps = pr.steps;
  lr.record.potentials = meta["convergence"].value("exact_transport", false);
  lr.record.u_consistency = meta["convergence"].value("u_consistency", 0.0);

  auto trace_rows = read_csv(dir / "trace.csv");
  for (const auto& r : trace_rows) {
    lr.record.trace.t.push_back(r[0]);
    lr.record.trace.b.push_back(r[1]);
    lr.record.trace.d.push_back(r[2]);
    lr.record.trace.bprime.push_back(r[3]);
    lr.record.energy.push_back(r[4]);
    lr.record.momentum.push_back(r[5]);
  }
  for (const auto& sj : meta.at("snapshots")) {
    auto rows = read_csv(dir / sj.at("file").get<std::string>());
    Snapshot s;
    s.t = sj.at("t").get<double>();
    for (const auto& r : rows) {
      s.u.push_back(r[2]);
      s.ut.push_back(r[3]);
      s.ux.push_back(r[4]);
    }
    lr.record.snapshots.push_back(std::move(s));
  }
  return lr;
}

}  // namespace charwave
