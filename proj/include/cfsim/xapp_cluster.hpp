#pragma once

// Serving-cluster formation (the xApp). For each user the O-RUs are ranked by
// RSRP and the shortest prefix whose share of the user's total RSRP reaches
// the policy threshold delta is selected.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "channel.hpp"
#include "errors.hpp"

namespace cfsim {

struct ClusterPolicy {
  double delta = 0.8;
  std::optional<int> max_cluster_size;

  bool operator==(const ClusterPolicy&) const = default;
};

struct Cluster {
  std::vector<int> members;  // O-RU indices, descending RSRP
  bool capped = false;

  bool contains(int oru) const {
    return std::find(members.begin(), members.end(), oru) != members.end();
  }
  bool operator==(const Cluster&) const = default;
};

struct ServingClusterMap {
  std::vector<Cluster> clusters;  // indexed by user id
  ClusterPolicy policy_used;
  int decided_at_slot = 0;

  std::size_t num_users() const noexcept { return clusters.size(); }
  const std::vector<int>& members(std::size_t k) const { return clusters[k].members; }
  bool serves(std::size_t k, int oru) const { return clusters[k].contains(oru); }
};

/// O-RU indices sorted by descending power; equal powers keep ascending index.
inline std::vector<int> rsrp_order(std::span<const double> rsrp_row) {
  std::vector<int> order(rsrp_row.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return rsrp_row[static_cast<std::size_t>(a)] >
                                              rsrp_row[static_cast<std::size_t>(b)]; });
  return order;
}

inline Cluster form_cluster(std::span<const double> rsrp_row, const ClusterPolicy& policy) {
  const double total = std::accumulate(rsrp_row.begin(), rsrp_row.end(), 0.0);
  if (!(total > 0.0)) throw AllZeroRsrp();

  const std::vector<int> order = rsrp_order(rsrp_row);
  // delta >= 1 is only met once every positive entry is taken; comparing
  // against the rounded total could stop one tiny entry early.
  const bool take_all = policy.delta >= 1.0;
  const double target = policy.delta * total;
  Cluster out;
  double acc = 0.0;
  for (int l : order) {
    const double p = rsrp_row[static_cast<std::size_t>(l)];
    if (!out.members.empty() && (p <= 0.0 || (!take_all && acc >= target))) break;
    if (policy.max_cluster_size && static_cast<int>(out.members.size()) >= *policy.max_cluster_size) {
      out.capped = true;
      break;
    }
    out.members.push_back(l);
    acc += p;
  }
  return out;
}

inline Cluster form_cluster(const Eigen::MatrixXd& rsrp, Eigen::Index user, const ClusterPolicy& policy) {
  const Eigen::VectorXd row = rsrp.row(user).transpose();
  return form_cluster(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), policy);
}

inline ServingClusterMap form_all_clusters(const RsrpReport& report, const ClusterPolicy& policy,
                                           int slot = 0) {
  ServingClusterMap out;
  out.policy_used = policy;
  out.decided_at_slot = slot;
  out.clusters.reserve(report.num_users());
  for (Eigen::Index k = 0; k < report.p_mw.rows(); ++k) {
    try {
      out.clusters.push_back(form_cluster(report.p_mw, k, policy));
    } catch (const AllZeroRsrp&) {
      throw AllZeroRsrp(static_cast<int>(k));
    }
  }
  return out;
}

}  // namespace cfsim
