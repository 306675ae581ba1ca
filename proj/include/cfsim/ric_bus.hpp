#pragma once

// In-process analogues of the RIC interfaces: E2 (RSRP indications and
// cluster control), A1 (delta policies) and O1 (KPI windows).

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "channel.hpp"
#include "errors.hpp"
#include "phy.hpp"
#include "stats.hpp"
#include "xapp_cluster.hpp"

namespace cfsim {

struct RsrpIndication {
  RsrpReport report;
};

struct ClusterControl {
  ServingClusterMap clusters;
};

using E2Message = std::variant<RsrpIndication, ClusterControl>;

struct A1Policy {
  double delta = 0.0;
  std::int64_t issued_epoch = 0;
};

struct KpiWindow {
  std::int64_t epoch = 0;
  std::vector<double> mean_throughput_bps;  // per user
  int start_slot = 0;
  int end_slot = 0;  // inclusive
};

struct QuantileReport {
  std::int64_t epoch = 0;
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;

  bool operator==(const QuantileReport&) const = default;
};

using Message = std::variant<RsrpIndication, ClusterControl, A1Policy, KpiWindow>;

/// Per-user mean over the epoch's slots; idle slots contribute 0.
inline KpiWindow aggregate_window(std::span<const SlotResult> slots, std::int64_t epoch, int start_slot,
                                  int end_slot) {
  const auto expected = static_cast<std::size_t>(end_slot - start_slot + 1);
  if (slots.size() != expected) throw WindowLengthMismatch(slots.size(), expected);
  KpiWindow w{epoch, {}, start_slot, end_slot};
  if (slots.empty()) return w;
  w.mean_throughput_bps.assign(slots.front().throughput_bps.size(), 0.0);
  for (const SlotResult& s : slots) {
    for (std::size_t k = 0; k < w.mean_throughput_bps.size(); ++k) {
      w.mean_throughput_bps[k] += s.throughput_bps[k];
    }
  }
  for (double& v : w.mean_throughput_bps) v /= static_cast<double>(slots.size());
  return w;
}

inline QuantileReport quantiles(std::span<const double> values, std::int64_t epoch = 0) {
  if (values.empty()) throw EmptyWindow();
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return {epoch, stats::quantile_sorted(v, 0.1), stats::quantile_sorted(v, 0.5),
          stats::quantile_sorted(v, 0.9)};
}

inline QuantileReport quantiles(const KpiWindow& window) {
  return quantiles(window.mean_throughput_bps, window.epoch);
}

struct DeliveryReceipt {
  std::string destination;
  std::uint64_t sequence = 0;
  int sent_slot = 0;
  int visible_slot = 0;
};

/// Synchronous message bus. Each endpoint is one (interface, receiver) pair
/// with a fixed delivery latency in slots; messages become visible `latency`
/// slots after posting and are consumed in FIFO order.
class RicBus {
 public:
  void register_endpoint(const std::string& name, int latency_slots = 0) {
    endpoints_[name].latency = latency_slots;
  }

  bool has_endpoint(const std::string& name) const { return endpoints_.contains(name); }

  DeliveryReceipt deliver(Message message, const std::string& destination, int slot) {
    auto it = endpoints_.find(destination);
    if (it == endpoints_.end()) throw UnknownDestination(destination);
    Endpoint& ep = it->second;
    DeliveryReceipt r{destination, next_sequence_++, slot, slot + ep.latency};
    ep.queue.push_back({r.visible_slot, std::move(message)});
    return r;
  }

  /// Removes and returns every message visible at `slot`, in posting order.
  std::vector<Message> poll(const std::string& destination, int slot) {
    auto it = endpoints_.find(destination);
    if (it == endpoints_.end()) throw UnknownDestination(destination);
    std::vector<Message> out;
    auto& q = it->second.queue;
    while (!q.empty() && q.front().visible_slot <= slot) {
      out.push_back(std::move(q.front().message));
      q.pop_front();
    }
    return out;
  }

  std::size_t pending(const std::string& destination) const {
    auto it = endpoints_.find(destination);
    if (it == endpoints_.end()) throw UnknownDestination(destination);
    return it->second.queue.size();
  }

 private:
  struct Queued {
    int visible_slot;
    Message message;
  };
  struct Endpoint {
    int latency = 0;
    std::deque<Queued> queue;
  };

  std::map<std::string, Endpoint> endpoints_;
  std::uint64_t next_sequence_ = 0;
};

}  // namespace cfsim
