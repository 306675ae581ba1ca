#pragma once

// Discrete-time driver. Every slot runs the PHY chain; at each epoch boundary
// the rApp picks a delta (A1), the xApp re-forms clusters from the latest RSRP
// indication (E2) and the KPI window of the finished epoch is reported back
// to the rApp (O1) as the bandit reward.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "phy.hpp"
#include "rapp_bandit.hpp"
#include "ric_bus.hpp"
#include "stats.hpp"
#include "xapp_cluster.hpp"

namespace cfsim {

namespace endpoint {
inline const std::string kXappE2 = "near-rt-ric/xapp/e2";
inline const std::string kXappA1 = "near-rt-ric/xapp/a1";
inline const std::string kE2Node = "e2-node/e2";
inline const std::string kRappO1 = "non-rt-ric/rapp/o1";
}  // namespace endpoint

struct RunResult {
  std::vector<QuantileReport> epochs;
  std::vector<double> deltas;  // per epoch; empty for the pinned baselines
  std::vector<double> mean_cluster_size;  // per epoch
  std::optional<BanditState> bandit;
  std::vector<double> user_mean_throughput_bps;  // over the whole run
  std::vector<Position> user_positions;
  std::uint64_t seed = 0;
  Mode mode;
  int dropped_users = 0;  // users removed from RBs by the ZF rank fallback
  int clamped_links = 0;

  bool operator==(const RunResult&) const = default;
};

inline double pinned_delta(const Mode& mode) {
  switch (mode.kind) {
    case Mode::Kind::NetworkCentric: return 0.0;
    case Mode::Kind::Canonical: return 1.0;
    case Mode::Kind::FixedDelta: return mode.delta;
    case Mode::Kind::Adaptive: break;
  }
  return 0.0;
}

/// Topology used by a run: the configured one, or with users redrawn from
/// the run seed when `redraw_users` is set.
inline Topology run_topology(const SimConfig& config) {
  Topology t = config.topology;
  if (config.redraw_users) t.users = place_users(t, static_cast<int>(t.users.size()), config.seed);
  return t;
}

inline RunResult run(const SimConfig& config) {
  validated(config);
  const Topology topo = run_topology(config);
  const LargeScaleGains gains = generate_large_scale(topo, config.channel, config.seed);
  FadingProcess fading(topo, config.channel, config.seed);
  const double noise = noise_power_mw_per_rb(topo, config.channel);
  const McsTable table(config.phy.mcs_table);
  const bool adaptive = config.mode.kind == Mode::Kind::Adaptive;

  RicBus bus;
  bus.register_endpoint(endpoint::kXappE2, config.ric.e2_latency_slots);
  bus.register_endpoint(endpoint::kXappA1, config.ric.a1_latency_slots);
  bus.register_endpoint(endpoint::kE2Node, config.ric.e2_latency_slots);
  bus.register_endpoint(endpoint::kRappO1, 0);

  std::optional<GreedyBandit> bandit;
  if (adaptive) bandit.emplace(config.bandit);

  RunResult result;
  result.seed = config.seed;
  result.mode = config.mode;
  result.clamped_links = gains.clamped_links;
  for (const auto& u : topo.users) result.user_positions.push_back(u.position);

  const std::size_t K = topo.num_users();
  const int epochs = config.num_epochs();
  const int rsrp_period = config.ric.rsrp_period_slots > 0 ? config.ric.rsrp_period_slots : config.epoch_slots;

  std::optional<RsrpReport> xapp_rsrp;
  std::optional<A1Policy> xapp_policy;
  std::optional<ServingClusterMap> active;  // applied at the E2 node
  std::vector<SlotResult> window;
  window.reserve(static_cast<std::size_t>(config.epoch_slots));
  std::vector<double> totals(K, 0.0);

  for (int slot = 0; slot < config.total_slots; ++slot) {
    const int epoch = slot / config.epoch_slots;
    const bool full_epoch = epoch < epochs;
    try {
      if (slot % rsrp_period == 0) {
        bus.deliver(RsrpIndication{measure_rsrp(gains, topo, slot)}, endpoint::kXappE2, slot);
      }
      if (full_epoch && slot % config.epoch_slots == 0) {
        double delta = pinned_delta(config.mode);
        if (adaptive) {
          delta = bandit->arm_delta(bandit->select_action());
          result.deltas.push_back(delta);
        } else if (config.mode.kind == Mode::Kind::FixedDelta) {
          result.deltas.push_back(delta);
        }
        bus.deliver(A1Policy{delta, epoch}, endpoint::kXappA1, slot);
      }

      // xApp
      bool refresh = false;
      for (Message& m : bus.poll(endpoint::kXappA1, slot)) {
        xapp_policy = std::get<A1Policy>(m);
        refresh = true;
      }
      for (Message& m : bus.poll(endpoint::kXappE2, slot)) {
        xapp_rsrp = std::move(std::get<RsrpIndication>(m).report);
        refresh = true;
      }
      if (refresh && xapp_policy && xapp_rsrp) {
        const ClusterPolicy policy{xapp_policy->delta, config.xapp.max_cluster_size};
        bus.deliver(ClusterControl{form_all_clusters(*xapp_rsrp, policy, slot)}, endpoint::kE2Node, slot);
      }

      // E2 node
      for (Message& m : bus.poll(endpoint::kE2Node, slot)) {
        active = std::move(std::get<ClusterControl>(m).clusters);
      }

      SlotResult res;
      if (active) {
        fading.advance_to(slot);
        const ScheduleGrid grid = schedule(*active, topo, config.scheduler, slot);
        const PrecodedGrid pre = precode(grid, fading, gains, topo);
        result.dropped_users += pre.dropped_users;
        res = slot_throughput(slot_sinr(pre, fading, gains, topo, noise, config.phy.coherent_combining),
                              table, topo);
      } else {
        res.throughput_bps.assign(K, 0.0);
        res.efficiency.assign(K, 0.0);
        res.sinr.resize(K);
      }
      for (std::size_t k = 0; k < K; ++k) totals[k] += res.throughput_bps[k];

      if (full_epoch) {
        if (slot % config.epoch_slots == 0) {
          double size = 0.0;
          if (active) {
            for (const auto& c : active->clusters) size += static_cast<double>(c.members.size());
            size /= static_cast<double>(K);
          }
          result.mean_cluster_size.push_back(size);
        }
        res.sinr.clear();
        window.push_back(std::move(res));
        if (slot % config.epoch_slots == config.epoch_slots - 1) {
          const int start = slot - config.epoch_slots + 1;
          KpiWindow kpi = aggregate_window(window, epoch, start, slot);
          window.clear();
          result.epochs.push_back(quantiles(kpi));
          bus.deliver(std::move(kpi), endpoint::kRappO1, slot);
          // rApp
          for (Message& m : bus.poll(endpoint::kRappO1, slot)) {
            const auto& w = std::get<KpiWindow>(m);
            if (adaptive) bandit->update(compute_reward(w.mean_throughput_bps));
          }
        }
      }
    } catch (const SimError& e) {
      throw SimError(std::string(e.what()) + " (slot " + std::to_string(slot) + ", epoch " +
                     std::to_string(epoch) + ")");
    }
  }

  result.user_mean_throughput_bps.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    result.user_mean_throughput_bps[k] = totals[k] / static_cast<double>(config.total_slots);
  }
  if (bandit) result.bandit = bandit->state();
  return result;
}

struct BatchResult {
  std::vector<RunResult> runs;
  std::vector<double> mean_q50_curve;  // per epoch, averaged over runs
  QuantileReport pooled;               // over every user of every run
};

/// Runs `num_runs` independent replications with seeds base_seed + i.
/// `threads` = 0 uses the hardware concurrency; results are stored by run
/// index regardless of completion order.
inline BatchResult run_batch(const SimConfig& config, int num_runs, std::uint64_t base_seed,
                             unsigned threads = 1) {
  if (num_runs < 1) throw SimError("run_batch needs at least one run");
  validated(config);
  BatchResult out;
  out.runs.resize(static_cast<std::size_t>(num_runs));
  auto one = [&](int i) {
    SimConfig c = config;
    c.seed = base_seed + static_cast<std::uint64_t>(i);
    out.runs[static_cast<std::size_t>(i)] = run(c);
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(num_runs));
  if (threads <= 1) {
    for (int i = 0; i < num_runs; ++i) one(i);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int i = static_cast<int>(t); i < num_runs; i += static_cast<int>(threads)) one(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const std::size_t epochs = out.runs.front().epochs.size();
  out.mean_q50_curve.assign(epochs, 0.0);
  for (const auto& r : out.runs) {
    for (std::size_t e = 0; e < epochs; ++e) out.mean_q50_curve[e] += r.epochs[e].q50;
  }
  for (double& v : out.mean_q50_curve) v /= static_cast<double>(num_runs);

  std::vector<double> pooled;
  for (const auto& r : out.runs) {
    pooled.insert(pooled.end(), r.user_mean_throughput_bps.begin(), r.user_mean_throughput_bps.end());
  }
  out.pooled = quantiles(pooled);
  return out;
}

struct ModeBatch {
  Mode mode;
  BatchResult batch;
};

/// Adaptive, network-centric and canonical batches on the same seeds, so the
/// per-run user drops are paired across modes.
inline std::vector<ModeBatch> compare(const SimConfig& config, int num_runs, std::uint64_t base_seed,
                                      unsigned threads = 1) {
  std::vector<ModeBatch> out;
  for (Mode m : {Mode::adaptive(), Mode::network_centric(), Mode::canonical()}) {
    SimConfig c = config;
    c.mode = m;
    out.push_back({m, run_batch(c, num_runs, base_seed, threads)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cluster map

struct ClusterGridPoint {
  double x = 0.0;
  double y = 0.0;
  std::uint32_t cluster_id = 0;  // bit l set when O-RU l serves the point
};

struct ClusterGrid {
  std::vector<ClusterGridPoint> points;
  std::map<std::uint32_t, std::vector<int>> members;  // id -> O-RUs, descending RSRP at first sighting

  std::size_t distinct() const noexcept { return members.size(); }
};

inline std::uint32_t cluster_id(const std::vector<int>& members) {
  std::uint32_t id = 0;
  for (int l : members) id |= (1u << static_cast<unsigned>(l));
  return id;
}

/// Evaluates the cluster rule on a regular grid (x = i res, y = j res) with
/// shadowing switched off.
inline ClusterGrid cluster_map_grid(const SimConfig& config, double delta, double resolution_m) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw SimError("cluster map delta must lie in [0, 1]");
  if (!(resolution_m > 0.0)) throw SimError("cluster map resolution must be > 0");
  const Topology& t = config.topology;
  if (t.orus.size() > 32) throw SimError("cluster map supports at most 32 O-RUs");
  const ClusterPolicy policy{delta, config.xapp.max_cluster_size};
  ClusterGrid out;
  const auto nx = static_cast<int>(std::floor(t.area_width_m / resolution_m + 1e-9));
  const auto ny = static_cast<int>(std::floor(t.area_height_m / resolution_m + 1e-9));
  std::vector<double> row(t.orus.size());
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const Position p{i * resolution_m, j * resolution_m};
      for (std::size_t l = 0; l < t.orus.size(); ++l) {
        const double g = db_to_linear(-pathloss_db(config.channel, t.orus[l], link_distance_m(t.orus[l], p)));
        row[l] = dbm_to_mw(t.orus[l].tx_power_dbm) * g;
      }
      const Cluster c = form_cluster(row, policy);
      const std::uint32_t id = cluster_id(c.members);
      out.members.try_emplace(id, c.members);
      out.points.push_back({p.x, p.y, id});
    }
  }
  return out;
}

}  // namespace cfsim
