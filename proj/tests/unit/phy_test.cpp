#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include "cfsim/phy.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cfsim;
using cd = std::complex<double>;

namespace {

Topology make_topology(int L, int K, int R, int antennas, double power_dbm = 30.0) {
  Topology t;
  t.num_rbs = R;
  for (int l = 0; l < L; ++l) t.orus.push_back({l, {100.0 * l, 0.0}, 10.0, power_dbm, antennas, OruKind::Micro});
  for (int k = 0; k < K; ++k) t.users.push_back({k, {10.0 * k, 5.0}});
  return t;
}

FadingTensor random_fading(const Topology& t, testing_support::Gen& g) {
  FadingTensor f(t.num_users(), t.num_orus());
  for (std::size_t k = 0; k < t.num_users(); ++k) {
    for (std::size_t l = 0; l < t.num_orus(); ++l) {
      Eigen::MatrixXcd m(t.orus[l].num_antennas, t.num_rbs);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = cd(g.normal(), g.normal()) * std::sqrt(0.5);
      f.link(k, l) = m;
    }
  }
  return f;
}

LargeScaleGains random_gains(const Topology& t, testing_support::Gen& g) {
  LargeScaleGains out{Eigen::MatrixXd(static_cast<Eigen::Index>(t.num_users()), static_cast<Eigen::Index>(t.num_orus())), 0};
  for (Eigen::Index i = 0; i < out.gain.size(); ++i) out.gain.data()[i] = std::pow(10.0, g.uniform(-12.0, -8.0));
  return out;
}

ServingClusterMap clusters_of(std::vector<std::vector<int>> members) {
  ServingClusterMap m;
  for (auto& v : members) m.clusters.push_back({std::move(v), false});
  return m;
}

Eigen::MatrixXcd random_h(testing_support::Gen& g, int U, int A) {
  Eigen::MatrixXcd h(U, A);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = cd(g.normal(), g.normal());
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// MCS

TEST(Mcs, OutageBelowFirstThreshold) {
  const McsTable t;
  EXPECT_EQ(select_mcs(db_to_linear(-6.71), t), 0.0);
  EXPECT_EQ(select_mcs(0.0, t), 0.0);
}

TEST(Mcs, ThresholdIsInclusive) {
  const McsTable t;
  for (const auto& e : default_mcs_entries()) EXPECT_EQ(select_mcs(db_to_linear(e.min_sinr_db), t), e.efficiency);
}

TEST(Mcs, SaturatesAtTopEntry) {
  const McsTable t;
  EXPECT_EQ(select_mcs(db_to_linear(45.0), t), 5.55);
}

TEST(Mcs, WidebandUsesGeometricMean) {
  const McsTable t;
  // 0 dB and 20 dB average to 10 dB in the log domain: entry at 8.1 dB.
  const std::vector<double> s{1.0, 100.0};
  EXPECT_EQ(select_mcs(s, t), 1.91);
  EXPECT_EQ(select_mcs(std::vector<double>{}, t), 0.0);
}

TEST(Mcs, TableValidation) {
  auto rows = default_mcs_entries();
  rows.pop_back();
  EXPECT_THROW(McsTable{rows}, SimError);
  rows = default_mcs_entries();
  rows[5].efficiency = rows[4].efficiency;
  EXPECT_THROW(McsTable{rows}, SimError);
}

TEST(Mcs, ParseTextTable) {
  std::istringstream in("# comment\n-6.7 0.15\n-4.7, 0.23\n\n-2.3 0.38\n0.2 0.60\n2.4 0.88\n4.3 1.18\n5.9 1.48\n8.1 "
                        "1.91\n10.3 2.41\n11.7 2.73\n14.1 3.32\n15.8 3.90\n17.3 4.52\n18.6 5.12\n19.8 5.55 # top\n");
  EXPECT_EQ(parse_mcs_table(in), default_mcs_entries());
  std::istringstream bad("1.0\n");
  EXPECT_THROW(parse_mcs_table(bad), SimError);
}

TEST(McsProperty, EfficiencyNondecreasingInSinr) {
  testing_support::Gen g(12);
  const McsTable t;
  for (int i = 0; i < 5000; ++i) {
    const double a = g.uniform(-15.0, 30.0);
    const double b = a + g.uniform(0.0, 5.0);
    EXPECT_LE(select_mcs(db_to_linear(a), t), select_mcs(db_to_linear(b), t));
  }
}

// ---------------------------------------------------------------------------
// Scheduler

TEST(Schedule, SingleUserGetsEveryRb) {
  const Topology t = make_topology(1, 1, 69, 4);
  for (int cap : {1, 2, 4}) {
    const auto grid = schedule(clusters_of({{0}}), t, SchedulerConfig{cap, {}}, 17);
    for (int rb = 0; rb < 69; ++rb) EXPECT_EQ(grid.at(0, rb), std::vector<int>{0});
  }
}

TEST(Schedule, EightUsersTwoRbsCapFour) {
  const Topology t = make_topology(1, 8, 2, 4);
  std::vector<std::vector<int>> m(8, std::vector<int>{0});
  for (int slot = 0; slot < 16; ++slot) {
    const auto grid = schedule(clusters_of(m), t, SchedulerConfig{4, {}}, slot);
    std::set<int> covered;
    for (int rb = 0; rb < 2; ++rb) {
      const auto& cell = grid.at(0, rb);
      EXPECT_EQ(cell.size(), 4u);
      EXPECT_EQ(std::set<int>(cell.begin(), cell.end()).size(), 4u);
      covered.insert(cell.begin(), cell.end());
    }
    EXPECT_EQ(covered.size(), 8u) << "slot " << slot;
  }
}

// Exhaustive small cases: whenever R * cap >= n every served user is placed
// at least once, no RB exceeds the cap and no RB repeats a user.
TEST(ScheduleProperty, CoverageWhenLoadPermits) {
  for (int n = 1; n <= 12; ++n) {
    for (int cap = 1; cap <= 4; ++cap) {
      for (int R = 1; R <= 6; ++R) {
        const Topology t = make_topology(1, n, R, 4);
        std::vector<std::vector<int>> m(static_cast<std::size_t>(n), std::vector<int>{0});
        for (int slot = 0; slot < 2 * n; ++slot) {
          const auto grid = schedule(clusters_of(m), t, SchedulerConfig{cap, {}}, slot);
          std::set<int> covered;
          for (int rb = 0; rb < R; ++rb) {
            const auto& cell = grid.at(0, rb);
            ASSERT_LE(static_cast<int>(cell.size()), cap);
            ASSERT_EQ(std::set<int>(cell.begin(), cell.end()).size(), cell.size());
            covered.insert(cell.begin(), cell.end());
          }
          if (R * cap >= n) {
            ASSERT_EQ(static_cast<int>(covered.size()), n);
          }
        }
      }
    }
  }
}

TEST(ScheduleProperty, FairOverACycle) {
  // Over n consecutive slots every user gets the same RB count (+-1).
  const int n = 7;
  const int R = 5;
  const Topology t = make_topology(1, n, R, 4);
  std::vector<std::vector<int>> m(n, std::vector<int>{0});
  std::vector<int> count(n, 0);
  for (int slot = 0; slot < n; ++slot) {
    const auto grid = schedule(clusters_of(m), t, SchedulerConfig{2, {}}, slot);
    for (int rb = 0; rb < R; ++rb) {
      for (int k : grid.at(0, rb)) ++count[static_cast<std::size_t>(k)];
    }
  }
  const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
  EXPECT_LE(*hi - *lo, 1);
}

TEST(ScheduleProperty, OnlyClusterMembersScheduled) {
  testing_support::Gen g(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int L = g.integer(1, 5);
    const int K = g.integer(1, 15);
    const Topology t = make_topology(L, K, g.integer(1, 8), 4);
    std::vector<std::vector<int>> m;
    for (int k = 0; k < K; ++k) {
      std::vector<int> c;
      for (int l = 0; l < L; ++l) {
        if (g.coin()) c.push_back(l);
      }
      if (c.empty()) c.push_back(g.integer(0, L - 1));
      m.push_back(c);
    }
    const auto map = clusters_of(m);
    const auto grid = schedule(map, t, SchedulerConfig{g.integer(1, 4), {}}, g.integer(0, 1000));
    for (int l = 0; l < L; ++l) {
      for (int rb = 0; rb < t.num_rbs; ++rb) {
        for (int k : grid.at(static_cast<std::size_t>(l), rb)) EXPECT_TRUE(map.serves(static_cast<std::size_t>(k), l));
      }
    }
  }
}

TEST(Schedule, Deterministic) {
  const Topology t = make_topology(2, 9, 7, 4);
  std::vector<std::vector<int>> m(9, std::vector<int>{0, 1});
  EXPECT_EQ(schedule(clusters_of(m), t, SchedulerConfig{}, 5), schedule(clusters_of(m), t, SchedulerConfig{}, 5));
}

// ---------------------------------------------------------------------------
// Zero forcing

TEST(Zf, IdentityChannel) {
  const Eigen::MatrixXcd w = zf_weights(Eigen::MatrixXcd::Identity(4, 4));
  EXPECT_TRUE(w.isApprox(Eigen::MatrixXcd::Identity(4, 4), 1e-14));
}

TEST(Zf, SingleUserIsMatchedFilter) {
  testing_support::Gen g(2);
  const Eigen::MatrixXcd h = random_h(g, 1, 6);
  const Eigen::MatrixXcd w = zf_weights(h);
  const Eigen::VectorXcd expected = h.row(0).adjoint() / h.row(0).norm();
  EXPECT_TRUE(w.col(0).isApprox(expected, 1e-14));
}

TEST(Zf, TwoByFourNulling) {
  testing_support::Gen g(3);
  const Eigen::MatrixXcd h = random_h(g, 2, 4);
  const Eigen::MatrixXcd w = zf_weights(h);
  const Eigen::MatrixXcd hw = h * w;
  EXPECT_LT(std::norm(hw(1, 0)) / std::norm(hw(0, 0)), 1e-20);
  EXPECT_LT(std::norm(hw(0, 1)) / std::norm(hw(1, 1)), 1e-20);
}

TEST(ZfProperty, MatchesIndependentSolve) {
  testing_support::Gen g(4);
  for (int trial = 0; trial < 300; ++trial) {
    const int A = g.integer(2, 32);
    const int U = g.integer(1, std::min(A, 4));
    const Eigen::MatrixXcd h = random_h(g, U, A);
    const Eigen::MatrixXcd w = zf_weights(h);
    const Eigen::MatrixXcd ref = oracle::zf(h);
    EXPECT_TRUE(w.isApprox(ref, 1e-9)) << "A=" << A << " U=" << U;
    for (Eigen::Index j = 0; j < U; ++j) EXPECT_NEAR(w.col(j).norm(), 1.0, 1e-12);
  }
}

TEST(Zf, RankDeficientThrows) {
  testing_support::Gen g(5);
  Eigen::MatrixXcd h = random_h(g, 3, 8);
  h.row(2) = h.row(0);
  EXPECT_THROW(zf_weights(h), RankDeficient);
  EXPECT_THROW(zf_weights(Eigen::MatrixXcd::Zero(1, 4)), RankDeficient);
  EXPECT_THROW(zf_weights(random_h(g, 5, 4)), RankDeficient);
}

TEST(Precode, RankFallbackDropsWeakestUser) {
  Topology t = make_topology(1, 3, 1, 4);
  FadingTensor f(3, 1);
  testing_support::Gen g(6);
  Eigen::MatrixXcd base(4, 1);
  for (Eigen::Index i = 0; i < 4; ++i) base(i, 0) = cd(g.normal(), g.normal());
  f.link(0, 0) = base;
  f.link(1, 0) = base;  // identical to user 0
  Eigen::MatrixXcd other(4, 1);
  for (Eigen::Index i = 0; i < 4; ++i) other(i, 0) = cd(g.normal(), g.normal());
  f.link(2, 0) = other;
  LargeScaleGains gains{Eigen::MatrixXd::Constant(3, 1, 1e-9), 0};
  gains.gain(1, 0) = 1e-11;  // user 1 is the weaker duplicate
  std::vector<std::vector<int>> m(3, std::vector<int>{0});
  const auto grid = schedule(clusters_of(m), t, SchedulerConfig{3, {}}, 0);
  const auto pre = precode(grid, f, gains, t);
  EXPECT_EQ(pre.at(0, 0).users, (std::vector<int>{0, 2}));
  EXPECT_EQ(pre.dropped_users, 1);
}

// ---------------------------------------------------------------------------
// Power and SINR

TEST(PrecodeProperty, PowerConservation) {
  testing_support::Gen g(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = g.integer(1, 3);
    const int K = g.integer(1, 12);
    Topology t = make_topology(L, K, g.integer(1, 6), g.integer(4, 16), g.uniform(20.0, 46.0));
    const auto f = random_fading(t, g);
    const auto gains = random_gains(t, g);
    std::vector<std::vector<int>> m;
    for (int k = 0; k < K; ++k) m.push_back({g.integer(0, L - 1)});
    const auto grid = schedule(clusters_of(m), t, SchedulerConfig{4, {}}, g.integer(0, 50));
    const auto pre = precode(grid, f, gains, t);
    const auto sinr = slot_sinr(pre, f, gains, t, 1e-12);
    for (int l = 0; l < L; ++l) {
      const double expected = dbm_to_mw(t.orus[static_cast<std::size_t>(l)].tx_power_dbm) / t.num_rbs;
      for (int rb = 0; rb < t.num_rbs; ++rb) {
        const auto& cell = pre.at(static_cast<std::size_t>(l), rb);
        if (cell.users.empty()) continue;
        double sum = 0.0;
        for (std::size_t j = 0; j < cell.users.size(); ++j) sum += cell.power_per_user * cell.weights.col(static_cast<Eigen::Index>(j)).squaredNorm();
        EXPECT_NEAR(sum / expected, 1.0, 1e-9);
        EXPECT_NEAR(sinr.radiated_mw(l, rb) / expected, 1.0, 1e-9);
      }
    }
  }
}

TEST(Sinr, SingleUserClosedForm) {
  Topology t = make_topology(1, 1, 3, 2, 30.0);
  FadingTensor f(1, 1);
  Eigen::MatrixXcd h(2, 3);
  h.col(0) << cd(1.0, 1.0), cd(0.5, -2.0);
  h.col(1) << cd(0.0, 1.0), cd(1.0, 0.0);
  h.col(2) << cd(-0.3, 0.2), cd(0.1, 0.7);
  f.link(0, 0) = h;
  LargeScaleGains gains{Eigen::MatrixXd::Constant(1, 1, 1e-9), 0};
  const double noise = 1e-10;
  const auto grid = schedule(clusters_of({{0}}), t, SchedulerConfig{}, 0);
  const auto sinr = slot_sinr(precode(grid, f, gains, t), f, gains, t, noise);
  ASSERT_EQ(sinr.per_user[0].size(), 3u);
  // Hand evaluation: P = 1000 mW over 3 RBs; |h|^2 of column 0 = 2 + 4.25.
  const double p_rb = 1000.0 / 3.0;
  const double norms[3] = {6.25, 2.0, 0.63};
  for (int rb = 0; rb < 3; ++rb) {
    EXPECT_NEAR(sinr.per_user[0][static_cast<std::size_t>(rb)].sinr, p_rb * 1e-9 * norms[rb] / noise, 1e-9);
  }
}

TEST(Sinr, DuplicateOruDoublesSignal) {
  // Two identical O-RUs with identical channels; serving the only user from
  // both instead of one doubles S exactly, and nothing interferes.
  Topology t = make_topology(2, 1, 2, 4);
  testing_support::Gen g(8);
  FadingTensor f = random_fading(t, g);
  f.link(0, 1) = f.link(0, 0);
  LargeScaleGains gains{Eigen::MatrixXd::Constant(1, 2, 2e-9), 0};
  const double noise = 1e-10;
  auto eval = [&](std::vector<int> cluster) {
    const auto grid = schedule(clusters_of({cluster}), t, SchedulerConfig{}, 0);
    return slot_sinr(precode(grid, f, gains, t), f, gains, t, noise);
  };
  const auto one = eval({0});
  const auto two = eval({0, 1});
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(two.per_user[0][i].sinr, 2.0 * one.per_user[0][i].sinr);
}

TEST(Sinr, IdleUserHasNoSinrAndZeroThroughput) {
  Topology t = make_topology(2, 2, 2, 4);
  testing_support::Gen g(9);
  const auto f = random_fading(t, g);
  const auto gains = random_gains(t, g);
  auto map = clusters_of({{0}, {1}});
  auto grid = schedule(map, t, SchedulerConfig{}, 0);
  for (int rb = 0; rb < 2; ++rb) grid.at(1, rb).clear();  // user 1 not placed anywhere
  const auto sinr = slot_sinr(precode(grid, f, gains, t), f, gains, t, 1e-12);
  EXPECT_TRUE(sinr.per_user[1].empty());
  const auto res = slot_throughput(sinr, McsTable{}, t);
  EXPECT_EQ(res.throughput_bps[1], 0.0);
}

TEST(SinrProperty, JoiningAClusterNeverHurts) {
  // User 0 served by O-RU 0; O-RU 1 serves user 1. Adding O-RU 1 to user 0's
  // cluster turns its interference into signal.
  testing_support::Gen g(10);
  for (int trial = 0; trial < 200; ++trial) {
    Topology t = make_topology(2, 2, 1, g.integer(2, 8));
    const auto f = random_fading(t, g);
    const auto gains = random_gains(t, g);
    const double noise = std::pow(10.0, g.uniform(-14.0, -10.0));
    auto eval = [&](std::vector<std::vector<int>> m) {
      const auto grid = schedule(clusters_of(m), t, SchedulerConfig{}, 0);
      return slot_sinr(precode(grid, f, gains, t), f, gains, t, noise).per_user[0][0].sinr;
    };
    EXPECT_GE(eval({{0, 1}, {1}}), eval({{0}, {1}}) * (1.0 - 1e-12));
  }
}

TEST(SinrProperty, NoncoherentAtMostCoherent) {
  testing_support::Gen g(11);
  Topology t = make_topology(3, 4, 3, 8);
  const auto f = random_fading(t, g);
  const auto gains = random_gains(t, g);
  const auto grid = schedule(clusters_of({{0, 1, 2}, {1}, {2, 0}, {0}}), t, SchedulerConfig{}, 0);
  const auto pre = precode(grid, f, gains, t);
  const auto a = slot_sinr(pre, f, gains, t, 1e-12, false);
  const auto b = slot_sinr(pre, f, gains, t, 1e-12, true);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < a.per_user[k].size(); ++i) EXPECT_LE(a.per_user[k][i].sinr, b.per_user[k][i].sinr * (1 + 1e-12));
  }
}

// ---------------------------------------------------------------------------
// Throughput

TEST(Throughput, SingleUserTopMcsAllRbs) {
  const Topology t = make_topology(1, 1, 69, 4);
  SinrMap s;
  s.per_user.resize(1);
  for (int rb = 0; rb < 69; ++rb) s.per_user[0].push_back({rb, 1e6});
  const auto r = slot_throughput(s, McsTable{}, t);
  EXPECT_NEAR(r.throughput_bps[0], 69 * 360e3 * 5.55, 1e-3);
  EXPECT_NEAR(r.throughput_bps[0] / 1e6, 137.9, 0.05);
}

TEST(Throughput, OutageGivesZero) {
  const Topology t = make_topology(1, 1, 4, 4);
  SinrMap s;
  s.per_user = {{{0, 1e-3}, {1, 1e-3}}};
  EXPECT_EQ(slot_throughput(s, McsTable{}, t).throughput_bps[0], 0.0);
}

TEST(Throughput, HalvingRbsHalvesRate) {
  const Topology t = make_topology(1, 1, 8, 4);
  SinrMap full;
  SinrMap half;
  full.per_user.resize(1);
  half.per_user.resize(1);
  for (int rb = 0; rb < 8; ++rb) {
    full.per_user[0].push_back({rb, 50.0});
    if (rb < 4) half.per_user[0].push_back({rb, 50.0});
  }
  EXPECT_EQ(slot_throughput(half, McsTable{}, t).throughput_bps[0] * 2.0,
            slot_throughput(full, McsTable{}, t).throughput_bps[0]);
}
