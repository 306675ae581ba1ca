#pragma once

// Command-line front end: run, compare, clustermap and validate.
// Exit codes: 0 success, 1 config or usage error, 2 runtime error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config_io.hpp"
#include "engine.hpp"

namespace cfsim {

inline constexpr const char* kVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

// ---------------------------------------------------------------------------
// Gain table

struct ModeQuantiles {
  std::string mode;
  QuantileReport q;
};

struct GainRow {
  std::string mode;
  QuantileReport q;
  double q10_gain_pct = 0.0;
  double q50_gain_pct = 0.0;
  double q90_gain_pct = 0.0;
};

inline double gain_pct(double value, double baseline) { return 100.0 * (value / baseline - 1.0); }

/// Percentage change of each quantile against the network-centric row.
inline std::vector<GainRow> summarize(const std::vector<ModeQuantiles>& results) {
  const ModeQuantiles* base = nullptr;
  for (const auto& r : results) {
    if (r.mode == to_string(Mode::Kind::NetworkCentric)) base = &r;
  }
  if (base == nullptr) throw SimError("summarize needs a network_centric baseline");
  std::vector<GainRow> out;
  for (const auto& r : results) {
    out.push_back({r.mode, r.q, gain_pct(r.q.q10, base->q.q10), gain_pct(r.q.q50, base->q.q50),
                   gain_pct(r.q.q90, base->q.q90)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV writers. Fixed decimal notation, LF line endings.

inline std::string fmt(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string learning_curve_csv(const std::vector<ModeBatch>& batches) {
  std::ostringstream os;
  os << "epoch";
  for (const auto& b : batches) os << ",mean_q50_" << to_string(b.mode.kind) << "_bps";
  os << '\n';
  const std::size_t epochs = batches.empty() ? 0 : batches.front().batch.mean_q50_curve.size();
  for (std::size_t e = 0; e < epochs; ++e) {
    os << e;
    for (const auto& b : batches) os << ',' << fmt(b.batch.mean_q50_curve[e]);
    os << '\n';
  }
  return os.str();
}

inline std::string quantiles_csv(const std::vector<GainRow>& rows) {
  std::ostringstream os;
  os << "mode,q10_bps,q50_bps,q90_bps,q10_gain_pct,q50_gain_pct,q90_gain_pct\n";
  for (const auto& r : rows) {
    os << r.mode << ',' << fmt(r.q.q10) << ',' << fmt(r.q.q50) << ',' << fmt(r.q.q90) << ','
       << fmt(r.q10_gain_pct, 4) << ',' << fmt(r.q50_gain_pct, 4) << ',' << fmt(r.q90_gain_pct, 4) << '\n';
  }
  return os.str();
}

inline std::string quantiles_csv(const std::vector<ModeQuantiles>& rows) {
  std::ostringstream os;
  os << "mode,q10_bps,q50_bps,q90_bps\n";
  for (const auto& r : rows) {
    os << r.mode << ',' << fmt(r.q.q10) << ',' << fmt(r.q.q50) << ',' << fmt(r.q.q90) << '\n';
  }
  return os.str();
}

/// Every run's per-epoch quantile report, with the delta in force.
inline std::string epochs_csv(const std::vector<ModeBatch>& batches) {
  std::ostringstream os;
  os << "mode,run,seed,epoch,delta,mean_cluster_size,q10_bps,q50_bps,q90_bps\n";
  for (const auto& b : batches) {
    for (std::size_t i = 0; i < b.batch.runs.size(); ++i) {
      const RunResult& r = b.batch.runs[i];
      for (std::size_t e = 0; e < r.epochs.size(); ++e) {
        const double delta = r.deltas.empty() ? pinned_delta(r.mode) : r.deltas[e];
        os << to_string(b.mode.kind) << ',' << i << ',' << r.seed << ',' << e << ',' << fmt(delta, 2) << ','
           << fmt(r.mean_cluster_size[e], 4) << ',' << fmt(r.epochs[e].q10) << ',' << fmt(r.epochs[e].q50) << ','
           << fmt(r.epochs[e].q90) << '\n';
      }
    }
  }
  return os.str();
}

inline std::string clusters_csv(const ClusterGrid& grid) {
  std::ostringstream os;
  os << "x,y,cluster_id\n";
  for (const auto& p : grid.points) os << fmt(p.x, 2) << ',' << fmt(p.y, 2) << ',' << p.cluster_id << '\n';
  return os.str();
}

inline std::string cluster_legend_csv(const ClusterGrid& grid) {
  std::ostringstream os;
  os << "cluster_id,size,members\n";
  for (const auto& [id, members] : grid.members) {
    std::vector<int> sorted = members;
    std::sort(sorted.begin(), sorted.end());
    os << id << ',' << sorted.size() << ',';
    for (std::size_t i = 0; i < sorted.size(); ++i) os << (i ? ";" : "") << sorted[i];
    os << '\n';
  }
  return os.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SimError("cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw SimError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Entry point

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::string mode;
  std::string out_dir = "results";
  std::optional<double> delta;
  double resolution_m = 5.0;
  unsigned threads = 1;
};

namespace detail {

inline SimConfig load_base_config(const CliOptions& o) {
  SimConfig c = o.config_path.empty() ? default_scenario() : load_config(o.config_path);
  if (o.seed) {
    c.seed = *o.seed;
    // Positions drawn from the config's seed follow the override.
    if (c.redraw_users) c.topology.users = place_users(c.topology, static_cast<int>(c.topology.users.size()), c.seed);
  }
  return c;
}

inline nlohmann::json meta(const std::string& command, const SimConfig& c, const std::vector<std::uint64_t>& seeds,
                           double wall_s, unsigned threads) {
  nlohmann::json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  m["seeds"] = seeds;
  m["threads"] = threads;
  m["wall_time_s"] = wall_s;
  m["config"] = config_to_json(c);
  return m;
}

inline std::vector<std::uint64_t> seed_list(std::uint64_t base, int runs) {
  std::vector<std::uint64_t> s;
  for (int i = 0; i < runs; ++i) s.push_back(base + static_cast<std::uint64_t>(i));
  return s;
}

inline void print_table(std::ostream& os, const std::vector<GainRow>& rows) {
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %12s %12s %12s %9s %9s %9s\n", "mode", "q10 Mbit/s", "q50 Mbit/s",
                "q90 Mbit/s", "q10 %", "q50 %", "q90 %");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-16s %12.3f %12.3f %12.3f %+9.1f %+9.1f %+9.1f\n", r.mode.c_str(),
                  r.q.q10 / 1e6, r.q.q50 / 1e6, r.q.q90 / 1e6, r.q10_gain_pct, r.q50_gain_pct, r.q90_gain_pct);
    os << line;
  }
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Cell-free M-MIMO downlink simulator with RIC-driven serving clusters"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  CliOptions o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file (defaults apply to missing keys)");
    sub->add_option("--seed", o.seed, "Base seed; run i uses seed + i");
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out_dir, "Output directory")->capture_default_str(); };

  CLI::App* run_cmd = app.add_subcommand("run", "Run one mode");
  add_common(run_cmd);
  add_out(run_cmd);
  run_cmd->add_option("--runs", o.runs, "Number of runs (default 1)");
  run_cmd->add_option("--mode", o.mode, "adaptive | network_centric | canonical | fixed_delta");
  run_cmd->add_option("--delta", o.delta, "Pinned delta (selects fixed_delta)")->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--threads", o.threads, "Worker threads for the batch")->capture_default_str();

  CLI::App* cmp_cmd = app.add_subcommand("compare", "Adaptive vs network-centric vs canonical on shared seeds");
  add_common(cmp_cmd);
  add_out(cmp_cmd);
  cmp_cmd->add_option("--runs", o.runs, "Number of runs per mode (default 15)");
  cmp_cmd->add_option("--threads", o.threads, "Worker threads for each batch")->capture_default_str();

  CLI::App* map_cmd = app.add_subcommand("clustermap", "Serving clusters over a spatial grid");
  add_common(map_cmd);
  add_out(map_cmd);
  map_cmd->add_option("--delta", o.delta, "Cluster threshold (default 0.8)")->check(CLI::Range(0.0, 1.0));
  map_cmd->add_option("--resolution", o.resolution_m, "Grid spacing in metres")->capture_default_str();

  CLI::App* val_cmd = app.add_subcommand("validate", "Check a config file and exit");
  add_common(val_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitConfig;
  }

  std::string command;
  SimConfig config;
  try {
    config = detail::load_base_config(o);
    if (run_cmd->parsed()) {
      if (!o.mode.empty()) {
        auto kind = parse_mode_kind(o.mode);
        if (!kind) throw ConfigError("--mode", "unknown mode '" + o.mode + "'");
        config.mode.kind = *kind;
      }
      if (o.delta) {
        if (!o.mode.empty() && config.mode.kind != Mode::Kind::FixedDelta) {
          throw ConfigError("--delta", "only valid with mode fixed_delta");
        }
        config.mode = Mode::fixed(*o.delta);
      }
      if (config.mode.kind == Mode::Kind::Canonical) config.mode.delta = 1.0;
      if (config.mode.kind == Mode::Kind::NetworkCentric || config.mode.kind == Mode::Kind::Adaptive) {
        config.mode.delta = 0.0;
      }
    }
    if (o.runs && *o.runs < 1) throw ConfigError("--runs", "must be >= 1");
    if (o.threads < 1) throw ConfigError("--threads", "must be >= 1");
    validated(config);
  } catch (const ConfigError& e) {
    err << "config error:\n";
    for (const auto& v : e.violations()) err << "  " << v.path << ": " << v.message << '\n';
    return kExitConfig;
  } catch (const SimError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (val_cmd->parsed()) {
    out << "config OK: " << config.topology.orus.size() << " O-RUs, " << config.topology.users.size()
        << " users, " << config.num_epochs() << " epochs\n";
    return kExitOk;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    const std::filesystem::path dir(o.out_dir);
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    if (run_cmd->parsed()) {
      const int runs = o.runs.value_or(1);
      std::vector<ModeBatch> batches{{config.mode, run_batch(config, runs, config.seed, o.threads)}};
      const std::vector<ModeQuantiles> q{{to_string(config.mode.kind), batches.front().batch.pooled}};
      const double wall = elapsed();
      std::filesystem::create_directories(dir);
      write_file(dir / "learning_curve.csv", learning_curve_csv(batches));
      write_file(dir / "quantiles.csv", quantiles_csv(q));
      write_file(dir / "epochs.csv", epochs_csv(batches));
      write_file(dir / "run_meta.json",
                 detail::meta("run", config, detail::seed_list(config.seed, runs), wall, o.threads).dump(2) + "\n");
      const auto& p = q.front().q;
      out << q.front().mode << ": q10 " << fmt(p.q10 / 1e6) << " q50 " << fmt(p.q50 / 1e6) << " q90 "
          << fmt(p.q90 / 1e6) << " Mbit/s over " << runs << " run(s)\n";
    } else if (cmp_cmd->parsed()) {
      const int runs = o.runs.value_or(15);
      const auto batches = compare(config, runs, config.seed, o.threads);
      std::vector<ModeQuantiles> q;
      for (const auto& b : batches) q.push_back({to_string(b.mode.kind), b.batch.pooled});
      const auto rows = summarize(q);
      const double wall = elapsed();
      std::filesystem::create_directories(dir);
      write_file(dir / "learning_curve.csv", learning_curve_csv(batches));
      write_file(dir / "quantiles.csv", quantiles_csv(rows));
      write_file(dir / "epochs.csv", epochs_csv(batches));
      write_file(dir / "run_meta.json", detail::meta("compare", config, detail::seed_list(config.seed, runs), wall,
                                                     o.threads).dump(2) + "\n");
      detail::print_table(out, rows);
    } else if (map_cmd->parsed()) {
      const double delta = o.delta.value_or(0.8);
      const ClusterGrid grid = cluster_map_grid(config, delta, o.resolution_m);
      const double wall = elapsed();
      std::filesystem::create_directories(dir);
      write_file(dir / "clusters.csv", clusters_csv(grid));
      write_file(dir / "cluster_legend.csv", cluster_legend_csv(grid));
      auto m = detail::meta("clustermap", config, {config.seed}, wall, 1);
      m["delta"] = delta;
      m["resolution_m"] = o.resolution_m;
      write_file(dir / "run_meta.json", m.dump(2) + "\n");
      out << grid.points.size() << " grid points, " << grid.distinct() << " distinct clusters at delta "
          << fmt(delta, 2) << '\n';
    }
  } catch (const ConfigError& e) {
    err << "config error:\n";
    for (const auto& v : e.violations()) err << "  " << v.path << ": " << v.message << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace cfsim
