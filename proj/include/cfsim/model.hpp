#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace cfsim {

inline constexpr double kMacroPowerDbm = 46.0;
inline constexpr double kMicroPowerDbm = 30.0;
inline constexpr int kMacroAntennas = 128;
inline constexpr int kMicroAntennas = 32;
inline constexpr double kMacroHeightM = 45.0;
inline constexpr double kMicroHeightM = 6.0;
inline constexpr double kMicroRingRadiusM = 150.0;
inline constexpr int kDefaultUsers = 40;

/// Draws `count` users uniformly over the topology area from the
/// user-position stream of `seed`.
inline std::vector<UserConfig> place_users(const Topology& topology, int count,
                                           std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::kUserPositions);
  UniformDist ux(0.0, topology.area_width_m);
  UniformDist uy(0.0, topology.area_height_m);
  std::vector<UserConfig> users;
  users.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) {
    const double x = ux(rng);
    const double y = uy(rng);
    users.push_back({k, {x, y}});
  }
  return users;
}

/// One macro O-RU at the center of a 500 m x 500 m area and five micro O-RUs
/// on a 150 m ring at 0, 72, 144, 216 and 288 degrees.
inline Topology default_topology() {
  Topology t;
  const Position center{t.area_width_m / 2.0, t.area_height_m / 2.0};
  t.orus.push_back({0, center, kMacroHeightM, kMacroPowerDbm, kMacroAntennas, OruKind::Macro});
  for (int i = 0; i < 5; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / 5.0;
    const Position p{center.x + kMicroRingRadiusM * std::cos(angle),
                     center.y + kMicroRingRadiusM * std::sin(angle)};
    t.orus.push_back({i + 1, p, kMicroHeightM, kMicroPowerDbm, kMicroAntennas, OruKind::Micro});
  }
  return t;
}

inline SimConfig default_scenario() {
  SimConfig c;
  c.topology = default_topology();
  c.topology.users = place_users(c.topology, kDefaultUsers, c.seed);
  return c;
}

namespace detail {

inline std::string idx(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline bool finite(double v) { return std::isfinite(v); }

}  // namespace detail

/// Checks every invariant and returns all violations (empty when valid).
inline std::vector<Violation> validate(const SimConfig& c) {
  std::vector<Violation> out;
  auto fail = [&](std::string path, std::string msg) {
    out.push_back({std::move(path), std::move(msg)});
  };

  const Topology& t = c.topology;
  if (t.orus.empty()) fail("topology.orus", "at least one O-RU is required");
  {
    std::set<int> seen;
    for (std::size_t i = 0; i < t.orus.size(); ++i) {
      const OruConfig& o = t.orus[i];
      const std::string p = detail::idx("topology.orus", i);
      if (o.num_antennas < 1) fail(p + ".num_antennas", "must be >= 1 (O-RU id " + std::to_string(o.id) + ")");
      if (!detail::finite(o.tx_power_dbm)) fail(p + ".tx_power_dbm", "must be finite");
      if (!detail::finite(o.antenna_height_m) || o.antenna_height_m < 0.0)
        fail(p + ".antenna_height_m", "must be finite and >= 0");
      if (!detail::finite(o.position.x) || !detail::finite(o.position.y))
        fail(p + ".position", "must be finite");
      if (!seen.insert(o.id).second) fail(p + ".id", "duplicate O-RU id " + std::to_string(o.id));
    }
    for (std::size_t i = 0; i < t.orus.size(); ++i) {
      if (!seen.contains(static_cast<int>(i)))
        fail("topology.orus", "O-RU ids must be dense 0.." + std::to_string(t.orus.size() - 1) +
                                  " (missing " + std::to_string(i) + ")");
    }
  }
  {
    std::set<int> seen;
    std::set<int> reported;
    for (std::size_t i = 0; i < t.users.size(); ++i) {
      const UserConfig& u = t.users[i];
      const std::string p = detail::idx("topology.users", i);
      if (!detail::finite(u.position.x) || !detail::finite(u.position.y))
        fail(p + ".position", "must be finite");
      if (!seen.insert(u.id).second && reported.insert(u.id).second)
        fail(p + ".id", "duplicate user id " + std::to_string(u.id));
    }
    if (reported.empty()) {
      for (std::size_t i = 0; i < t.users.size(); ++i) {
        if (!seen.contains(static_cast<int>(i))) {
          fail("topology.users", "user ids must be dense 0.." + std::to_string(t.users.size() - 1) +
                                     " (missing " + std::to_string(i) + ")");
          break;
        }
      }
    }
  }
  if (t.users.empty()) fail("topology.users", "at least one user is required");
  if (t.num_rbs < 1) fail("topology.num_rbs", "must be >= 1");
  if (!(t.rb_bandwidth_hz > 0.0) || !detail::finite(t.rb_bandwidth_hz))
    fail("topology.rb_bandwidth_hz", "must be > 0");
  if (!(t.slot_duration_s > 0.0) || !detail::finite(t.slot_duration_s))
    fail("topology.slot_duration_s", "must be > 0");
  if (!(t.carrier_freq_hz > 0.0) || !detail::finite(t.carrier_freq_hz))
    fail("topology.carrier_freq_hz", "must be > 0");
  if (!(t.area_width_m > 0.0) || !(t.area_height_m > 0.0))
    fail("topology.area", "width and height must be > 0");

  if (c.mode.kind == Mode::Kind::FixedDelta && !(c.mode.delta >= 0.0 && c.mode.delta <= 1.0))
    fail("mode.delta", "must lie in [0, 1]");
  if (c.epoch_slots < 1) fail("epoch_slots", "must be >= 1");
  if (c.total_slots < 1) fail("total_slots", "must be >= 1");
  if (c.epoch_slots >= 1 && c.total_slots >= 1 && c.total_slots < c.epoch_slots)
    fail("total_slots", "must cover at least one decision epoch");

  const BanditConfig& b = c.bandit;
  if (b.arms.empty()) fail("bandit.arms", "must not be empty");
  for (std::size_t i = 0; i < b.arms.size(); ++i) {
    if (!(b.arms[i] >= 0.0 && b.arms[i] <= 1.0)) fail(detail::idx("bandit.arms", i), "must lie in [0, 1]");
    if (i > 0 && !(b.arms[i] > b.arms[i - 1])) fail(detail::idx("bandit.arms", i), "arms must be strictly increasing");
  }
  if (!(b.alpha > 0.0 && b.alpha < 1.0)) fail("bandit.alpha", "must lie in (0, 1)");
  if (!detail::finite(b.optimistic_init)) fail("bandit.optimistic_init", "must be finite");

  const ChannelConfig& ch = c.channel;
  if (!(ch.pathloss_exponent_macro >= 2.0 && ch.pathloss_exponent_macro <= 6.0))
    fail("channel.pathloss_exponent_macro", "must lie in [2, 6]");
  if (!(ch.pathloss_exponent_micro >= 2.0 && ch.pathloss_exponent_micro <= 6.0))
    fail("channel.pathloss_exponent_micro", "must lie in [2, 6]");
  if (!(ch.shadowing_sigma_db >= 0.0) || !detail::finite(ch.shadowing_sigma_db))
    fail("channel.shadowing_sigma_db", "must be >= 0");
  if (!detail::finite(ch.reference_loss_db)) fail("channel.reference_loss_db", "must be finite");
  if (!detail::finite(ch.noise_figure_db)) fail("channel.noise_figure_db", "must be finite");
  if (ch.coherence_slots < 1) fail("channel.coherence_slots", "must be >= 1");

  const SchedulerConfig& s = c.scheduler;
  if (s.max_users_per_rb < 1) fail("scheduler.max_users_per_rb", "must be >= 1");
  for (std::size_t i = 0; i < t.orus.size(); ++i) {
    if (t.orus[i].num_antennas >= 1 && s.max_users_per_rb > t.orus[i].num_antennas) {
      fail("scheduler.max_users_per_rb",
           "exceeds antenna count of O-RU " + std::to_string(t.orus[i].id));
    }
  }

  const auto& mcs = c.phy.mcs_table;
  if (mcs.size() != kMcsLevels) {
    fail("phy.mcs_table", "must hold exactly 15 entries, got " + std::to_string(mcs.size()));
  }
  for (std::size_t i = 1; i < mcs.size(); ++i) {
    if (!(mcs[i].min_sinr_db > mcs[i - 1].min_sinr_db))
      fail(detail::idx("phy.mcs_table", i) + ".min_sinr_db", "must be strictly increasing");
    if (!(mcs[i].efficiency > mcs[i - 1].efficiency))
      fail(detail::idx("phy.mcs_table", i) + ".efficiency", "must be strictly increasing");
  }
  for (std::size_t i = 0; i < mcs.size(); ++i) {
    if (!detail::finite(mcs[i].min_sinr_db) || !(mcs[i].efficiency > 0.0) || !detail::finite(mcs[i].efficiency))
      fail(detail::idx("phy.mcs_table", i), "threshold must be finite and efficiency > 0");
  }

  if (c.xapp.max_cluster_size && *c.xapp.max_cluster_size < 1)
    fail("xapp.max_cluster_size", "must be >= 1 when present");

  if (c.ric.e2_latency_slots < 0) fail("ric.e2_latency_slots", "must be >= 0");
  if (c.ric.a1_latency_slots < 0) fail("ric.a1_latency_slots", "must be >= 0");
  if (c.ric.rsrp_period_slots < 0) fail("ric.rsrp_period_slots", "must be >= 0");

  return out;
}

/// Returns the config unchanged when valid, throws ConfigError otherwise.
inline const SimConfig& validated(const SimConfig& c) {
  auto v = validate(c);
  if (!v.empty()) throw ConfigError(std::move(v));
  return c;
}

}  // namespace cfsim
