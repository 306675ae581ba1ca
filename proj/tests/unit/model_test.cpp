#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cfsim/model.hpp"
#include "test_support.hpp"

using namespace cfsim;

namespace {

bool has_path(const std::vector<Violation>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.path.find(needle) != std::string::npos; });
}

bool has_message(const std::vector<Violation>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(),
                     [&](const Violation& x) { return x.message.find(needle) != std::string::npos; });
}

}  // namespace

TEST(DefaultScenario, MatchesSimulationTable) {
  const SimConfig c = default_scenario();
  ASSERT_EQ(c.topology.orus.size(), 6u);
  EXPECT_EQ(c.topology.num_rbs, 69);
  EXPECT_EQ(c.total_slots, 1400);
  EXPECT_EQ(c.epoch_slots, 50);
  EXPECT_EQ(c.topology.users.size(), 40u);
  EXPECT_DOUBLE_EQ(c.topology.slot_duration_s, 0.0005);
  EXPECT_DOUBLE_EQ(c.topology.carrier_freq_hz, 3.6e9);

  const OruConfig& macro = c.topology.orus[0];
  EXPECT_EQ(macro.kind, OruKind::Macro);
  EXPECT_EQ(macro.tx_power_dbm, 46.0);
  EXPECT_EQ(macro.num_antennas, 128);
  EXPECT_EQ(macro.antenna_height_m, 45.0);
  EXPECT_EQ(macro.position.x, 250.0);
  EXPECT_EQ(macro.position.y, 250.0);
  for (std::size_t l = 1; l < 6; ++l) {
    const OruConfig& o = c.topology.orus[l];
    EXPECT_EQ(o.kind, OruKind::Micro);
    EXPECT_EQ(o.tx_power_dbm, 30.0);
    EXPECT_EQ(o.num_antennas, 32);
    EXPECT_EQ(o.antenna_height_m, 6.0);
    EXPECT_NEAR(std::hypot(o.position.x - 250.0, o.position.y - 250.0), 150.0, 1e-9);
  }
}

TEST(DefaultScenario, UsersInsideArea) {
  const SimConfig c = default_scenario();
  for (std::size_t k = 0; k < c.topology.users.size(); ++k) {
    const auto& u = c.topology.users[k];
    EXPECT_EQ(u.id, static_cast<int>(k));
    EXPECT_GE(u.position.x, 0.0);
    EXPECT_LE(u.position.x, c.topology.area_width_m);
    EXPECT_GE(u.position.y, 0.0);
    EXPECT_LE(u.position.y, c.topology.area_height_m);
  }
}

TEST(Validate, DefaultScenarioIsValid) { EXPECT_TRUE(validate(default_scenario()).empty()); }

TEST(Validate, ZeroAntennasNamesTheOru) {
  SimConfig c = default_scenario();
  c.topology.orus[3].num_antennas = 0;
  const auto v = validate(c);
  ASSERT_FALSE(v.empty());
  EXPECT_TRUE(has_path(v, "topology.orus[3].num_antennas"));
  EXPECT_TRUE(has_message(v, "O-RU id 3"));
}

TEST(Validate, DuplicateUserIdIsListed) {
  SimConfig c = default_scenario();
  c.topology.users[5].id = 2;
  const auto v = validate(c);
  EXPECT_TRUE(has_message(v, "duplicate user id 2"));
}

TEST(Validate, ReportsEveryViolation) {
  SimConfig c = default_scenario();
  c.topology.num_rbs = 0;
  c.epoch_slots = 0;
  c.bandit.alpha = 1.5;
  c.channel.pathloss_exponent_micro = 7.0;
  c.channel.shadowing_sigma_db = -1.0;
  c.scheduler.max_users_per_rb = 64;  // above the micro antenna count
  const auto v = validate(c);
  EXPECT_TRUE(has_path(v, "topology.num_rbs"));
  EXPECT_TRUE(has_path(v, "epoch_slots"));
  EXPECT_TRUE(has_path(v, "bandit.alpha"));
  EXPECT_TRUE(has_path(v, "channel.pathloss_exponent_micro"));
  EXPECT_TRUE(has_path(v, "channel.shadowing_sigma_db"));
  EXPECT_TRUE(has_path(v, "scheduler.max_users_per_rb"));
  EXPECT_GE(v.size(), 6u);
}

TEST(Validate, SparseOruIdsRejected) {
  SimConfig c = default_scenario();
  c.topology.orus[5].id = 9;
  EXPECT_TRUE(has_message(validate(c), "dense"));
}

TEST(Validate, McsTableMustHaveFifteenIncreasingRows) {
  SimConfig c = default_scenario();
  c.phy.mcs_table.pop_back();
  EXPECT_TRUE(has_path(validate(c), "phy.mcs_table"));
  c = default_scenario();
  std::swap(c.phy.mcs_table[3], c.phy.mcs_table[4]);
  EXPECT_TRUE(has_path(validate(c), "phy.mcs_table[4]"));
}

TEST(Validate, FixedDeltaOutOfRange) {
  SimConfig c = default_scenario();
  c.mode = Mode::fixed(1.2);
  EXPECT_TRUE(has_path(validate(c), "mode.delta"));
}

TEST(Validate, ThrowingFormCarriesViolations) {
  SimConfig c = default_scenario();
  c.topology.orus[0].num_antennas = 0;
  try {
    validated(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_FALSE(e.violations().empty());
  }
}

// validate is idempotent: a valid config passes unchanged and an invalid one
// yields the same violation list every time.
TEST(ValidateProperty, Idempotent) {
  testing_support::Gen g(11);
  for (int trial = 0; trial < 300; ++trial) {
    SimConfig c = default_scenario();
    if (g.coin()) c.topology.num_rbs = g.integer(-2, 100);
    if (g.coin()) c.bandit.alpha = g.uniform(-0.5, 1.5);
    if (g.coin()) c.channel.pathloss_exponent_macro = g.uniform(1.0, 7.0);
    if (g.coin()) c.topology.orus[static_cast<std::size_t>(g.integer(0, 5))].num_antennas = g.integer(-1, 8);
    if (g.coin()) c.epoch_slots = g.integer(0, 100);
    const auto first = validate(c);
    if (first.empty()) {
      const SimConfig& same = validated(c);
      EXPECT_EQ(same, c);
      EXPECT_TRUE(validate(same).empty());
    } else {
      EXPECT_EQ(validate(c), first);
    }
  }
}

TEST(PlaceUsers, DeterministicPerSeed) {
  const Topology t = default_topology();
  EXPECT_EQ(place_users(t, 40, 5), place_users(t, 40, 5));
  EXPECT_NE(place_users(t, 40, 5), place_users(t, 40, 6));
}

TEST(Mode, ParseNames) {
  EXPECT_EQ(parse_mode_kind("adaptive"), Mode::Kind::Adaptive);
  EXPECT_EQ(parse_mode_kind("network-centric"), Mode::Kind::NetworkCentric);
  EXPECT_EQ(parse_mode_kind("network_centric"), Mode::Kind::NetworkCentric);
  EXPECT_EQ(parse_mode_kind("canonical"), Mode::Kind::Canonical);
  EXPECT_EQ(parse_mode_kind("fixed_delta"), Mode::Kind::FixedDelta);
  EXPECT_FALSE(parse_mode_kind("greedy").has_value());
  for (auto k : {Mode::Kind::Adaptive, Mode::Kind::NetworkCentric, Mode::Kind::Canonical, Mode::Kind::FixedDelta}) {
    EXPECT_EQ(parse_mode_kind(to_string(k)), k);
  }
}

TEST(SimConfig, EpochCount) {
  SimConfig c = default_scenario();
  EXPECT_EQ(c.num_epochs(), 28);
  c.total_slots = 1420;
  EXPECT_EQ(c.num_epochs(), 28);
}
