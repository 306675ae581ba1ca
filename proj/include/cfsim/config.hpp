#pragma once

// Plain configuration value types shared by every module.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cfsim {

struct Position {
  double x = 0.0;  // meters
  double y = 0.0;  // meters

  bool operator==(const Position&) const = default;
};

enum class OruKind { Macro, Micro };

struct OruConfig {
  int id = 0;
  Position position;
  double antenna_height_m = 0.0;
  double tx_power_dbm = 0.0;
  int num_antennas = 1;
  OruKind kind = OruKind::Macro;

  bool operator==(const OruConfig&) const = default;
};

struct UserConfig {
  int id = 0;
  Position position;

  bool operator==(const UserConfig&) const = default;
};

struct Topology {
  std::vector<OruConfig> orus;
  std::vector<UserConfig> users;
  int num_rbs = 69;
  double rb_bandwidth_hz = 360e3;  // 12 subcarriers x 30 kHz
  double slot_duration_s = 0.5e-3;
  double carrier_freq_hz = 3.6e9;
  double area_width_m = 500.0;
  double area_height_m = 500.0;

  std::size_t num_orus() const noexcept { return orus.size(); }
  std::size_t num_users() const noexcept { return users.size(); }

  bool operator==(const Topology&) const = default;
};

inline double default_reference_loss_db(double carrier_freq_hz) {
  return 32.4 + 20.0 * std::log10(carrier_freq_hz / 1e9);
}

enum class FadingKind { Rayleigh, None };

struct ChannelConfig {
  double pathloss_exponent_macro = 3.2;
  double pathloss_exponent_micro = 3.8;
  double reference_loss_db = default_reference_loss_db(3.6e9);
  double shadowing_sigma_db = 6.0;
  double noise_figure_db = 9.0;
  FadingKind fading = FadingKind::Rayleigh;
  int coherence_slots = 10;

  bool operator==(const ChannelConfig&) const = default;
};

struct BanditConfig {
  std::vector<double> arms{0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double alpha = 0.1;
  double optimistic_init = 0.0;  // initial Q for every arm, bit/s

  bool operator==(const BanditConfig&) const = default;
};

enum class SchedulingDiscipline { RoundRobin };

struct SchedulerConfig {
  int max_users_per_rb = 4;
  SchedulingDiscipline discipline = SchedulingDiscipline::RoundRobin;

  bool operator==(const SchedulerConfig&) const = default;
};

struct McsEntry {
  double min_sinr_db = 0.0;
  double efficiency = 0.0;  // bit/s/Hz

  bool operator==(const McsEntry&) const = default;
};

inline constexpr std::size_t kMcsLevels = 15;

// QPSK..64QAM ladder; efficiencies follow the usual 4-bit CQI table.
inline std::vector<McsEntry> default_mcs_entries() {
  return {{-6.7, 0.15}, {-4.7, 0.23}, {-2.3, 0.38}, {0.2, 0.60}, {2.4, 0.88},
          {4.3, 1.18},  {5.9, 1.48},  {8.1, 1.91},  {10.3, 2.41}, {11.7, 2.73},
          {14.1, 3.32}, {15.8, 3.90}, {17.3, 4.52}, {18.6, 5.12}, {19.8, 5.55}};
}

struct PhyConfig {
  bool coherent_combining = false;
  std::vector<McsEntry> mcs_table = default_mcs_entries();

  bool operator==(const PhyConfig&) const = default;
};

struct XappConfig {
  std::optional<int> max_cluster_size;

  bool operator==(const XappConfig&) const = default;
};

struct RicConfig {
  int e2_latency_slots = 0;
  int a1_latency_slots = 0;
  // RSRP indication period; 0 means once per decision epoch.
  int rsrp_period_slots = 0;

  bool operator==(const RicConfig&) const = default;
};

struct Mode {
  enum class Kind { Adaptive, NetworkCentric, Canonical, FixedDelta };

  Kind kind = Kind::Adaptive;
  double delta = 0.0;  // only meaningful for FixedDelta

  static Mode adaptive() { return {Kind::Adaptive, 0.0}; }
  static Mode network_centric() { return {Kind::NetworkCentric, 0.0}; }
  static Mode canonical() { return {Kind::Canonical, 1.0}; }
  static Mode fixed(double d) { return {Kind::FixedDelta, d}; }

  bool operator==(const Mode&) const = default;
};

inline std::string to_string(Mode::Kind kind) {
  switch (kind) {
    case Mode::Kind::Adaptive: return "adaptive";
    case Mode::Kind::NetworkCentric: return "network_centric";
    case Mode::Kind::Canonical: return "canonical";
    case Mode::Kind::FixedDelta: return "fixed_delta";
  }
  return "unknown";
}

inline std::optional<Mode::Kind> parse_mode_kind(const std::string& name) {
  if (name == "adaptive") return Mode::Kind::Adaptive;
  if (name == "network_centric" || name == "network-centric") return Mode::Kind::NetworkCentric;
  if (name == "canonical") return Mode::Kind::Canonical;
  if (name == "fixed_delta" || name == "fixed-delta" || name == "fixed") return Mode::Kind::FixedDelta;
  return std::nullopt;
}

struct SimConfig {
  Topology topology;
  Mode mode;
  int epoch_slots = 50;    // 25 ms at 0.5 ms slots
  int total_slots = 1400;  // 700 ms
  std::uint64_t seed = 1;
  // When set, user positions are redrawn uniformly from the seed on each run.
  bool redraw_users = true;
  BanditConfig bandit;
  ChannelConfig channel;
  SchedulerConfig scheduler;
  PhyConfig phy;
  XappConfig xapp;
  RicConfig ric;

  int num_epochs() const noexcept { return epoch_slots > 0 ? total_slots / epoch_slots : 0; }

  bool operator==(const SimConfig&) const = default;
};

}  // namespace cfsim
