#pragma once

// Per-slot physical layer: round-robin scheduling per O-RU, per-O-RU
// zero-forcing, equal power split per RB, cluster SINR, wideband MCS and
// throughput.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "xapp_cluster.hpp"

namespace cfsim {

// ---------------------------------------------------------------------------
// MCS table

class McsTable {
 public:
  McsTable() : McsTable(default_mcs_entries()) {}

  explicit McsTable(std::vector<McsEntry> entries) : entries_(std::move(entries)) {
    if (entries_.size() != kMcsLevels) {
      throw SimError("MCS table must hold exactly 15 entries, got " + std::to_string(entries_.size()));
    }
    for (std::size_t i = 1; i < entries_.size(); ++i) {
      if (!(entries_[i].min_sinr_db > entries_[i - 1].min_sinr_db) ||
          !(entries_[i].efficiency > entries_[i - 1].efficiency)) {
        throw SimError("MCS table entries must be strictly increasing (row " + std::to_string(i + 1) + ")");
      }
    }
    for (const McsEntry& e : entries_) thresholds_linear_.push_back(db_to_linear(e.min_sinr_db));
  }

  const std::vector<McsEntry>& entries() const noexcept { return entries_; }

  /// Highest entry whose threshold is <= the SINR; 0 below the first.
  /// Compared in the linear domain so a SINR of exactly db_to_linear(t)
  /// selects the entry with threshold t.
  double efficiency(double sinr_linear) const {
    if (!(sinr_linear > 0.0)) return 0.0;
    double eff = 0.0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (thresholds_linear_[i] <= sinr_linear) eff = entries_[i].efficiency;
      else break;
    }
    return eff;
  }

 private:
  std::vector<McsEntry> entries_;
  std::vector<double> thresholds_linear_;
};

/// Parses 15 rows of "threshold_db efficiency" (whitespace or comma
/// separated; '#' starts a comment).
inline std::vector<McsEntry> parse_mcs_table(std::istream& in) {
  std::vector<McsEntry> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    McsEntry e;
    if (!(ss >> e.min_sinr_db)) continue;
    if (!(ss >> e.efficiency)) throw SimError("MCS table line " + std::to_string(lineno) + ": missing efficiency");
    std::string rest;
    if (ss >> rest) throw SimError("MCS table line " + std::to_string(lineno) + ": trailing data");
    rows.push_back(e);
  }
  McsTable check(rows);
  return rows;
}

inline std::vector<McsEntry> load_mcs_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError("cannot open MCS table '" + path + "'");
  return parse_mcs_table(in);
}

/// Wideband CQI: the MCS is chosen from the geometric mean of the user's
/// per-RB SINRs.
inline double select_mcs(std::span<const double> sinr_linear, const McsTable& table) {
  if (sinr_linear.empty()) return 0.0;
  double log_sum = 0.0;
  for (double s : sinr_linear) {
    if (!(s > 0.0)) return 0.0;
    log_sum += std::log(s);
  }
  return table.efficiency(std::exp(log_sum / static_cast<double>(sinr_linear.size())));
}

inline double select_mcs(double sinr_linear, const McsTable& table) { return table.efficiency(sinr_linear); }

// ---------------------------------------------------------------------------
// Scheduling

class ScheduleGrid {
 public:
  ScheduleGrid() = default;
  ScheduleGrid(std::size_t orus, int rbs) : orus_(orus), rbs_(rbs), cells_(orus * static_cast<std::size_t>(rbs)) {}

  std::size_t num_orus() const noexcept { return orus_; }
  int num_rbs() const noexcept { return rbs_; }

  std::vector<int>& at(std::size_t l, int rb) { return cells_[l * static_cast<std::size_t>(rbs_) + static_cast<std::size_t>(rb)]; }
  const std::vector<int>& at(std::size_t l, int rb) const {
    return cells_[l * static_cast<std::size_t>(rbs_) + static_cast<std::size_t>(rb)];
  }

  bool operator==(const ScheduleGrid&) const = default;

 private:
  std::size_t orus_ = 0;
  int rbs_ = 0;
  std::vector<std::vector<int>> cells_;
};

/// Users served by each O-RU (l in M_k), ascending user id.
inline std::vector<std::vector<int>> served_users(const ServingClusterMap& clusters, std::size_t num_orus) {
  std::vector<std::vector<int>> served(num_orus);
  for (std::size_t k = 0; k < clusters.num_users(); ++k) {
    for (int l : clusters.members(k)) served[static_cast<std::size_t>(l)].push_back(static_cast<int>(k));
  }
  return served;
}

/// Round robin per O-RU: the served users form a cycle; RB r of slot s takes
/// the next min(cap, n) users starting at position (s R + r) c mod n, so the
/// cycle continues across RBs and slots.
inline ScheduleGrid schedule(const ServingClusterMap& clusters, const Topology& topology,
                             const SchedulerConfig& cfg, int slot) {
  const int R = topology.num_rbs;
  ScheduleGrid grid(topology.num_orus(), R);
  const auto served = served_users(clusters, topology.num_orus());
  for (std::size_t l = 0; l < served.size(); ++l) {
    const auto& users = served[l];
    const auto n = static_cast<std::uint64_t>(users.size());
    if (n == 0) continue;
    const std::uint64_t c = std::min<std::uint64_t>(static_cast<std::uint64_t>(cfg.max_users_per_rb), n);
    const std::uint64_t base = (static_cast<std::uint64_t>(slot) % n) * static_cast<std::uint64_t>(R) * c % n;
    for (int rb = 0; rb < R; ++rb) {
      auto& cell = grid.at(l, rb);
      const std::uint64_t start = (base + static_cast<std::uint64_t>(rb) * c) % n;
      for (std::uint64_t i = 0; i < c; ++i) cell.push_back(users[(start + i) % n]);
      std::sort(cell.begin(), cell.end());
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Zero forcing

inline constexpr double kMaxGramCondition = 1e12;

/// Zero-forcing precoder from the co-scheduled channels given as columns
/// (`channels` is A x U, column i = h_i). Returns W = H^H (H H^H)^-1 with
/// unit-norm columns, where H has rows h_i^H. Throws RankDeficient when the
/// 1-norm condition number of the Gram matrix H H^H exceeds 1e12.
inline Eigen::MatrixXcd zf_weights_from_columns(const Eigen::MatrixXcd& channels) {
  const Eigen::Index A = channels.rows();
  const Eigen::Index U = channels.cols();
  if (U == 0) return Eigen::MatrixXcd(A, 0);
  if (U > A) throw RankDeficient(std::numeric_limits<double>::infinity());
  Eigen::MatrixXcd w(A, U);
  if (U == 1) {
    const double n = channels.col(0).norm();
    if (!(n > 0.0)) throw RankDeficient(std::numeric_limits<double>::infinity());
    w.col(0) = channels.col(0) / n;
    return w;
  }
  Eigen::MatrixXcd gram(U, U);
  for (Eigen::Index i = 0; i < U; ++i) {
    for (Eigen::Index j = i; j < U; ++j) {
      gram(i, j) = channels.col(i).dot(channels.col(j));  // h_i^H h_j
      gram(j, i) = std::conj(gram(i, j));
    }
  }
  const Eigen::LLT<Eigen::MatrixXcd> llt(gram);
  if (llt.info() != Eigen::Success) throw RankDeficient(std::numeric_limits<double>::infinity());
  const Eigen::MatrixXcd inv = llt.solve(Eigen::MatrixXcd::Identity(U, U));
  const double cond = gram.cwiseAbs().colwise().sum().maxCoeff() * inv.cwiseAbs().colwise().sum().maxCoeff();
  if (!(cond <= kMaxGramCondition)) throw RankDeficient(cond);
  // Column j of H^H G^-1 is sum_i h_i G^-1(i, j).
  for (Eigen::Index j = 0; j < U; ++j) {
    auto col = w.col(j);
    col = channels.col(0) * inv(0, j);
    for (Eigen::Index i = 1; i < U; ++i) col += channels.col(i) * inv(i, j);
    col.normalize();
  }
  return w;
}

/// `h` is U x A with row i equal to h_i^H, so the received sample of user i
/// is (h W)_i. Returns the A x U precoder H^H (H H^H)^-1 with unit-norm columns.
inline Eigen::MatrixXcd zf_weights(const Eigen::MatrixXcd& h) {
  return zf_weights_from_columns(h.adjoint());
}

/// Beams of one O-RU on one RB after precoding.
struct PrecodedCell {
  std::vector<int> users;
  Eigen::MatrixXcd weights;   // A x U
  double power_per_user = 0;  // mW, P_l / (R U)
};

class PrecodedGrid {
 public:
  PrecodedGrid(std::size_t orus, int rbs) : rbs_(rbs), cells_(orus * static_cast<std::size_t>(rbs)) {}
  PrecodedCell& at(std::size_t l, int rb) { return cells_[l * static_cast<std::size_t>(rbs_) + static_cast<std::size_t>(rb)]; }
  const PrecodedCell& at(std::size_t l, int rb) const {
    return cells_[l * static_cast<std::size_t>(rbs_) + static_cast<std::size_t>(rb)];
  }
  int dropped_users = 0;

 private:
  int rbs_;
  std::vector<PrecodedCell> cells_;
};

/// Builds ZF beams for every (O-RU, RB). When the co-scheduled channels are
/// rank deficient the weakest user (lowest g ||h||^2) is removed from that RB
/// and the solve repeated.
template <typename Fading>
PrecodedGrid precode(const ScheduleGrid& grid, Fading& fading, const LargeScaleGains& gains,
                     const Topology& topology) {
  const int R = grid.num_rbs();
  PrecodedGrid out(grid.num_orus(), R);
  for (std::size_t l = 0; l < grid.num_orus(); ++l) {
    const OruConfig& oru = topology.orus[l];
    const double p_rb = dbm_to_mw(oru.tx_power_dbm) / R;
    for (int rb = 0; rb < R; ++rb) {
      std::vector<int> users = grid.at(l, rb);
      PrecodedCell& cell = out.at(l, rb);
      while (!users.empty()) {
        Eigen::MatrixXcd h(oru.num_antennas, static_cast<Eigen::Index>(users.size()));
        for (std::size_t i = 0; i < users.size(); ++i) {
          h.col(static_cast<Eigen::Index>(i)) = fading.link(static_cast<std::size_t>(users[i]), l).col(rb);
        }
        try {
          cell.weights = zf_weights_from_columns(h);
          break;
        } catch (const RankDeficient&) {
          std::size_t weakest = 0;
          double weakest_power = std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < users.size(); ++i) {
            const double pw = gains(users[i], static_cast<Eigen::Index>(l)) *
                              h.col(static_cast<Eigen::Index>(i)).squaredNorm();
            if (pw < weakest_power) {
              weakest_power = pw;
              weakest = i;
            }
          }
          users.erase(users.begin() + static_cast<std::ptrdiff_t>(weakest));
          ++out.dropped_users;
        }
      }
      cell.users = std::move(users);
      if (!cell.users.empty()) cell.power_per_user = p_rb / static_cast<double>(cell.users.size());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SINR and throughput

struct RbSinr {
  int rb = 0;
  double sinr = 0.0;  // linear
};

struct SinrMap {
  std::vector<std::vector<RbSinr>> per_user;  // only RBs where the user is served
  Eigen::MatrixXd radiated_mw;                // L x R
};

/// Per-user, per-RB SINR. Signal is the power received through the user's
/// own beams from every serving O-RU that scheduled it on the RB (power sum,
/// or amplitude sum when `coherent`); every other beam on the RB is
/// interference.
template <typename Fading>
SinrMap slot_sinr(const PrecodedGrid& pre, Fading& fading, const LargeScaleGains& gains,
                  const Topology& topology, double noise_mw, bool coherent = false) {
  const std::size_t L = topology.num_orus();
  const int R = topology.num_rbs;
  SinrMap out;
  out.per_user.resize(topology.num_users());
  out.radiated_mw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L), R);

  std::vector<int> on_rb;
  std::vector<char> mark(topology.num_users(), 0);
  Eigen::RowVectorXcd proj;
  for (int rb = 0; rb < R; ++rb) {
    on_rb.clear();
    for (std::size_t l = 0; l < L; ++l) {
      const PrecodedCell& cell = pre.at(l, rb);
      out.radiated_mw(static_cast<Eigen::Index>(l), rb) =
          cell.power_per_user * static_cast<double>(cell.users.size());
      for (int k : cell.users) {
        if (!mark[static_cast<std::size_t>(k)]) {
          mark[static_cast<std::size_t>(k)] = 1;
          on_rb.push_back(k);
        }
      }
    }
    std::sort(on_rb.begin(), on_rb.end());
    for (int k : on_rb) {
      mark[static_cast<std::size_t>(k)] = 0;
      double signal = 0.0;
      double amplitude = 0.0;
      double interference = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        const PrecodedCell& cell = pre.at(l, rb);
        if (cell.users.empty()) continue;
        const double scale = gains(k, static_cast<Eigen::Index>(l)) * cell.power_per_user;
        proj.noalias() = fading.link(static_cast<std::size_t>(k), l).col(rb).adjoint() * cell.weights;
        for (std::size_t j = 0; j < cell.users.size(); ++j) {
          const double term = scale * std::norm(proj(static_cast<Eigen::Index>(j)));
          if (cell.users[j] == k) {
            signal += term;
            amplitude += std::sqrt(term);
          } else {
            interference += term;
          }
        }
      }
      const double s = coherent ? amplitude * amplitude : signal;
      out.per_user[static_cast<std::size_t>(k)].push_back({rb, s / (interference + noise_mw)});
    }
  }
  return out;
}

struct SlotResult {
  std::vector<double> throughput_bps;         // per user
  std::vector<double> efficiency;             // per user, bit/s/Hz
  std::vector<std::vector<RbSinr>> sinr;      // per user
  Eigen::MatrixXd radiated_mw;                // L x R
};

/// throughput_k = (#RBs serving k) x RB bandwidth x wideband efficiency.
inline SlotResult slot_throughput(SinrMap sinr, const McsTable& table, const Topology& topology) {
  SlotResult out;
  const std::size_t K = sinr.per_user.size();
  out.throughput_bps.assign(K, 0.0);
  out.efficiency.assign(K, 0.0);
  std::vector<double> values;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& rbs = sinr.per_user[k];
    if (rbs.empty()) continue;
    values.clear();
    for (const RbSinr& v : rbs) values.push_back(v.sinr);
    out.efficiency[k] = select_mcs(values, table);
    out.throughput_bps[k] = static_cast<double>(rbs.size()) * topology.rb_bandwidth_hz * out.efficiency[k];
  }
  out.sinr = std::move(sinr.per_user);
  out.radiated_mw = std::move(sinr.radiated_mw);
  return out;
}

}  // namespace cfsim
