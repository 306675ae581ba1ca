#pragma once

// Stochastic stand-in for a site-specific channel: log-distance pathloss with
// per-link lognormal shadowing, plus block Rayleigh fading per resource block.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "config.hpp"
#include "rng.hpp"

namespace cfsim {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_mw(double dbm) { return db_to_linear(dbm); }

inline constexpr double kThermalNoiseDbmPerHz = -174.0;
inline constexpr double kMinDistanceM = 1.0;

/// Per-RB noise power in mW: -174 dBm/Hz + 10 log10(B) + NF.
inline double noise_power_mw_per_rb(const Topology& t, const ChannelConfig& c) {
  return dbm_to_mw(kThermalNoiseDbmPerHz + 10.0 * std::log10(t.rb_bandwidth_hz) + c.noise_figure_db);
}

inline double link_distance_m(const OruConfig& oru, const Position& user) {
  const double dx = oru.position.x - user.x;
  const double dy = oru.position.y - user.y;
  const double dz = oru.antenna_height_m;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Pathloss in dB (positive) excluding shadowing. Distances below 1 m are
/// clamped to 1 m.
inline double pathloss_db(const ChannelConfig& c, const OruConfig& oru, double distance_m) {
  const double exponent = oru.kind == OruKind::Macro ? c.pathloss_exponent_macro
                                                     : c.pathloss_exponent_micro;
  const double d = std::max(distance_m, kMinDistanceM);
  return c.reference_loss_db + 10.0 * exponent * std::log10(d);
}

struct LargeScaleGains {
  Eigen::MatrixXd gain;  // K x L, linear power gain
  int clamped_links = 0; // links whose distance was clamped to 1 m

  double operator()(Eigen::Index k, Eigen::Index l) const { return gain(k, l); }
};

/// gain_kl[dB] = -(reference loss + 10 alpha log10(d_kl) + shadow_kl),
/// shadow_kl ~ N(0, sigma^2) drawn row-major (user, then O-RU) from `rng`.
inline LargeScaleGains generate_large_scale(const Topology& t, const ChannelConfig& c, Rng& rng) {
  const auto K = static_cast<Eigen::Index>(t.num_users());
  const auto L = static_cast<Eigen::Index>(t.num_orus());
  LargeScaleGains out{Eigen::MatrixXd(K, L), 0};
  NormalDist shadow(0.0, 1.0);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index l = 0; l < L; ++l) {
      const OruConfig& oru = t.orus[static_cast<std::size_t>(l)];
      const double d = link_distance_m(oru, t.users[static_cast<std::size_t>(k)].position);
      if (d < kMinDistanceM) ++out.clamped_links;
      // Always consume the draw so sigma = 0 keeps stream alignment.
      const double s = shadow(rng) * c.shadowing_sigma_db;
      out.gain(k, l) = db_to_linear(-(pathloss_db(c, oru, d) + s));
    }
  }
  return out;
}

inline LargeScaleGains generate_large_scale(const Topology& t, const ChannelConfig& c,
                                            std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::kShadowing);
  return generate_large_scale(t, c, rng);
}

/// Small-scale fading for every (user, O-RU) link: one column per resource
/// block, one row per antenna of that O-RU.
class FadingTensor {
 public:
  FadingTensor() = default;
  FadingTensor(std::size_t users, std::size_t orus) : users_(users), orus_(orus), links_(users * orus) {}

  std::size_t num_users() const noexcept { return users_; }
  std::size_t num_orus() const noexcept { return orus_; }

  Eigen::MatrixXcd& link(std::size_t k, std::size_t l) { return links_[k * orus_ + l]; }
  const Eigen::MatrixXcd& link(std::size_t k, std::size_t l) const { return links_[k * orus_ + l]; }

  // Channel vector h_{k,l,rb}, length = antennas of O-RU l.
  auto vec(std::size_t k, std::size_t l, Eigen::Index rb) const { return link(k, l).col(rb); }

  int valid_from_slot = 0;

  bool operator==(const FadingTensor& o) const {
    if (users_ != o.users_ || orus_ != o.orus_ || valid_from_slot != o.valid_from_slot) return false;
    for (std::size_t i = 0; i < links_.size(); ++i) {
      if (links_[i].rows() != o.links_[i].rows() || links_[i].cols() != o.links_[i].cols()) return false;
      if (links_[i] != o.links_[i]) return false;
    }
    return true;
  }

 private:
  std::size_t users_ = 0;
  std::size_t orus_ = 0;
  std::vector<Eigen::MatrixXcd> links_;
};

inline int fading_block(const ChannelConfig& c, int slot) { return slot / c.coherence_slots; }

/// Draws the fading matrix of one (user, O-RU) link for one coherence block.
/// Every link has its own stream keyed by (seed, block, link) so links can be
/// generated lazily and in any order.
inline Eigen::MatrixXcd fading_link(const Topology& t, const ChannelConfig& c, int block,
                                    std::size_t k, std::size_t l, std::uint64_t seed) {
  const Eigen::Index A = t.orus[l].num_antennas;
  const Eigen::Index R = t.num_rbs;
  if (c.fading == FadingKind::None) {
    return Eigen::MatrixXcd::Constant(A, R, std::complex<double>(1.0, 0.0));
  }
  const std::uint64_t link = k * t.num_orus() + l;
  Rng rng = make_rng(seed, Stream::kFading, mix64(static_cast<std::uint64_t>(block)) ^ link);
  NormalDist gauss(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd m(A, R);
  std::complex<double>* p = m.data();
  for (Eigen::Index i = 0; i < A * R; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    p[i] = {re, im};
  }
  return m;
}

/// Fading realization valid at `slot`: blocks of `coherence_slots` slots share
/// one draw, so any slot inside a block returns the same tensor.
inline FadingTensor generate_fading(const Topology& t, const ChannelConfig& c, int slot,
                                    std::uint64_t seed) {
  const int block = fading_block(c, slot);
  FadingTensor out(t.num_users(), t.num_orus());
  out.valid_from_slot = block * c.coherence_slots;
  for (std::size_t k = 0; k < t.num_users(); ++k) {
    for (std::size_t l = 0; l < t.num_orus(); ++l) {
      out.link(k, l) = fading_link(t, c, block, k, l, seed);
    }
  }
  return out;
}

/// Lazily materialized fading for the current block. Links are drawn on first
/// use and dropped when the block changes; values match generate_fading.
class FadingProcess {
 public:
  FadingProcess(const Topology& t, const ChannelConfig& c, std::uint64_t seed)
      : topology_(&t), config_(c), seed_(seed), links_(t.num_users() * t.num_orus()) {}

  void advance_to(int slot) {
    const int block = fading_block(config_, slot);
    if (block != block_) {
      block_ = block;
      for (auto& m : links_) m.resize(0, 0);
    }
  }

  const Eigen::MatrixXcd& link(std::size_t k, std::size_t l) {
    Eigen::MatrixXcd& m = links_[k * topology_->num_orus() + l];
    if (m.size() == 0) m = fading_link(*topology_, config_, block_, k, l, seed_);
    return m;
  }

  int block() const noexcept { return block_; }

 private:
  const Topology* topology_;
  ChannelConfig config_;
  std::uint64_t seed_;
  int block_ = 0;
  std::vector<Eigen::MatrixXcd> links_;
};

struct ChannelRealization {
  LargeScaleGains large_scale;
  FadingTensor small_scale;
  int valid_from_slot = 0;
};

struct RsrpReport {
  Eigen::MatrixXd p_mw;  // K x L
  int measurement_slot = 0;

  std::size_t num_users() const noexcept { return static_cast<std::size_t>(p_mw.rows()); }
  std::size_t num_orus() const noexcept { return static_cast<std::size_t>(p_mw.cols()); }
};

/// Wideband RSRP from large-scale gain only: p_kl = P_l[mW] * g_kl.
inline RsrpReport measure_rsrp(const LargeScaleGains& g, const Topology& t, int slot = 0) {
  RsrpReport r{Eigen::MatrixXd(g.gain.rows(), g.gain.cols()), slot};
  for (Eigen::Index l = 0; l < g.gain.cols(); ++l) {
    r.p_mw.col(l) = g.gain.col(l) * dbm_to_mw(t.orus[static_cast<std::size_t>(l)].tx_power_dbm);
  }
  return r;
}

inline RsrpReport measure_rsrp(const ChannelRealization& ch, const Topology& t, int slot = 0) {
  return measure_rsrp(ch.large_scale, t, slot);
}

}  // namespace cfsim
