#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicesim/topology.hpp"

namespace slicesim {

using RequestId = std::uint64_t;

struct Request {
  RequestId id = 0;
  NodeId source = 0;
  NodeId destination = 0;
  double rate = 0.0;
  double delay_bound = 0.0;
  std::uint32_t demand_type = 0;  // index into the configured label set
  Slot arrival_slot = 0;
  Slot lifetime = 1;

  /// Slot at which the request terminates (first slot it is no longer usable).
  Slot expiry() const noexcept { return arrival_slot + lifetime; }
  bool alive_at(Slot t) const noexcept { return arrival_slot <= t && t < expiry(); }

  bool operator==(const Request&) const = default;
};

/// Throws infeasible when the request tuple is malformed.
void validate_request(const Request& r, std::size_t node_count);

/// Poisson arrivals with transformed normal attribute laws:
///   rate     = rate_scale * |N(0, rate_variance)|
///   delay    = delay_scale * max(eps, N(1, delay_variance))
///   lifetime = max(1, round(lifetime_scale * N(1, lifetime_variance)))
struct DemandConfig {
  double lambda = 2.0;
  double rate_scale = 100.0;
  double delay_scale = 10.0;
  double lifetime_scale = 5.0;
  double rate_variance = 0.1;
  double delay_variance = 0.1;
  double lifetime_variance = 0.1;
  double delay_floor = 0.01;
  std::vector<std::string> types{"eMBB", "URLLC"};
  std::uint64_t seed = 1;
};

/// Request ids encode the arrival slot: (slot << kSlotShift) | index.
inline constexpr int kSlotShift = 20;

class ArrivalProcess {
 public:
  ArrivalProcess(DemandConfig config, std::size_t node_count);

  /// Pure function of (seed, slot).
  std::vector<Request> sample_arrivals(Slot slot) const;
  const DemandConfig& config() const noexcept { return config_; }

 private:
  DemandConfig config_;
  std::size_t node_count_;
};

/// A recorded or hand-written request stream, replayed slot by slot.
class RequestTrace {
 public:
  RequestTrace() = default;
  explicit RequestTrace(std::vector<Request> requests);

  std::vector<Request> arrivals_at(Slot slot) const;
  const std::vector<Request>& requests() const noexcept { return requests_; }

  /// `req <id> <a> <h> <src> <dst> <b> <d> <type>` per line.
  std::string serialize(std::span<const std::string> type_labels) const;
  static RequestTrace parse(std::string_view text, std::span<const std::string> type_labels,
                            std::size_t node_count);

 private:
  std::vector<Request> requests_;
  std::multimap<Slot, std::size_t> by_slot_;
};

using ArrivalSource = std::function<std::vector<Request>(Slot)>;

/// FIFO backlog ordered by (arrival slot, id).
class RequestQueue {
 public:
  struct EnqueueResult {
    std::vector<Request> evicted;  // expired unserved: SLA violations
  };

  const std::vector<Request>& pending() const noexcept { return pending_; }
  Slot current_slot() const noexcept { return current_slot_; }
  std::size_t size() const noexcept { return pending_.size(); }
  bool empty() const noexcept { return pending_.empty(); }
  const Request* find(RequestId id) const;

  /// Appends arrivals, advances to current_slot, evicts requests with
  /// arrival + lifetime <= current_slot. Duplicated ids are rejected.
  EnqueueResult enqueue_and_evict(std::vector<Request> arrivals, Slot current_slot);
  /// Atomic: throws unknown_id when any id is not pending.
  void remove_served(std::span<const RequestId> served);

 private:
  std::vector<Request> pending_;
  Slot current_slot_ = 0;
};

}  // namespace slicesim
