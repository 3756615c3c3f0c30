#include "slicesim/demand.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "slicesim/error.hpp"
#include "slicesim/random.hpp"

namespace slicesim {

void validate_request(const Request& r, std::size_t node_count) {
  if (r.source >= node_count || r.destination >= node_count)
    throw Error(ErrorKind::infeasible, fmt::format("request {}: endpoint outside the graph", r.id));
  if (r.source == r.destination)
    throw Error(ErrorKind::infeasible, fmt::format("request {}: source equals destination", r.id));
  if (!(r.rate > 0.0 && std::isfinite(r.rate)) || !(r.delay_bound > 0.0 && std::isfinite(r.delay_bound)))
    throw Error(ErrorKind::infeasible, fmt::format("request {}: rate and delay bound must be positive", r.id));
  if (r.lifetime < 1) throw Error(ErrorKind::infeasible, fmt::format("request {}: lifetime below 1", r.id));
}

ArrivalProcess::ArrivalProcess(DemandConfig config, std::size_t node_count)
    : config_(std::move(config)), node_count_(node_count) {
  if (!(config_.lambda >= 0.0 && std::isfinite(config_.lambda)))
    throw Error(ErrorKind::config, "arrival rate must be finite and non-negative");
  if (node_count_ < 2) throw Error(ErrorKind::config, "arrivals need at least two nodes");
  if (config_.types.empty()) throw Error(ErrorKind::config, "at least one demand type label required");
  if (!(config_.rate_scale > 0.0 && config_.delay_scale > 0.0 && config_.lifetime_scale > 0.0))
    throw Error(ErrorKind::config, "demand scales must be positive");
  if (!(config_.rate_variance >= 0.0 && config_.delay_variance >= 0.0 && config_.lifetime_variance >= 0.0))
    throw Error(ErrorKind::config, "demand variances must be non-negative");
  if (!(config_.delay_floor > 0.0)) throw Error(ErrorKind::config, "delay floor must be positive");
}

std::vector<Request> ArrivalProcess::sample_arrivals(Slot slot) const {
  if (config_.lambda == 0.0) return {};
  Rng rng(derive_seed(config_.seed, {0x61727276ULL, static_cast<std::uint64_t>(slot)}));
  const auto count = std::poisson_distribution<std::uint64_t>(config_.lambda)(rng);
  if (count >= (1ULL << kSlotShift)) throw Error(ErrorKind::config, "arrival count per slot overflows id space");

  auto normal = [&rng](double mean, double variance) {
    if (variance == 0.0) return mean;
    return std::normal_distribution<double>(mean, std::sqrt(variance))(rng);
  };
  std::uniform_int_distribution<NodeId> src_dist(0, static_cast<NodeId>(node_count_ - 1));
  std::uniform_int_distribution<NodeId> dst_dist(0, static_cast<NodeId>(node_count_ - 2));
  std::uniform_int_distribution<std::uint32_t> type_dist(0, static_cast<std::uint32_t>(config_.types.size() - 1));

  std::vector<Request> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Request r;
    r.id = (static_cast<RequestId>(slot) << kSlotShift) | i;
    r.arrival_slot = slot;
    r.source = src_dist(rng);
    const NodeId d = dst_dist(rng);
    r.destination = d >= r.source ? d + 1 : d;
    r.rate = config_.rate_scale * std::abs(normal(0.0, config_.rate_variance));
    // |N| == 0 has probability zero but would break rate > 0
    if (r.rate <= 0.0) r.rate = config_.rate_scale * 1e-9;
    r.delay_bound = config_.delay_scale * std::max(config_.delay_floor, normal(1.0, config_.delay_variance));
    const double h = std::round(config_.lifetime_scale * normal(1.0, config_.lifetime_variance));
    r.lifetime = std::max<Slot>(1, static_cast<Slot>(h));
    r.demand_type = type_dist(rng);
    out.push_back(r);
  }
  return out;
}

RequestTrace::RequestTrace(std::vector<Request> requests) : requests_(std::move(requests)) {
  std::set<RequestId> ids;
  for (std::size_t i = 0; i < requests_.size(); ++i) {
    if (!ids.insert(requests_[i].id).second)
      throw Error(ErrorKind::infeasible, fmt::format("duplicate request id {} in trace", requests_[i].id));
    by_slot_.emplace(requests_[i].arrival_slot, i);
  }
}

std::vector<Request> RequestTrace::arrivals_at(Slot slot) const {
  std::vector<Request> out;
  auto [lo, hi] = by_slot_.equal_range(slot);
  for (auto it = lo; it != hi; ++it) out.push_back(requests_[it->second]);
  std::sort(out.begin(), out.end(), [](const Request& a, const Request& b) { return a.id < b.id; });
  return out;
}

std::string RequestTrace::serialize(std::span<const std::string> type_labels) const {
  std::string out;
  for (const auto& r : requests_) {
    const std::string label =
        r.demand_type < type_labels.size() ? type_labels[r.demand_type] : std::to_string(r.demand_type);
    out += fmt::format("req {} {} {} {} {} {:.17g} {:.17g} {}\n", r.id, r.arrival_slot, r.lifetime, r.source,
                       r.destination, r.rate, r.delay_bound, label);
  }
  return out;
}

RequestTrace RequestTrace::parse(std::string_view text, std::span<const std::string> type_labels,
                                 std::size_t node_count) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<Request> requests;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string tag, label, trailing;
    Request r;
    long long src = -1, dst = -1;
    if (!(ls >> tag) || tag != "req" ||
        !(ls >> r.id >> r.arrival_slot >> r.lifetime >> src >> dst >> r.rate >> r.delay_bound >> label) ||
        (ls >> trailing))
      throw Error(ErrorKind::parse,
                  fmt::format("line {}: expected `req <id> <a> <h> <src> <dst> <b> <d> <type>`", line_no));
    if (src < 0 || dst < 0) throw Error(ErrorKind::parse, fmt::format("line {}: negative node id", line_no));
    r.source = static_cast<NodeId>(src);
    r.destination = static_cast<NodeId>(dst);
    auto it = std::find(type_labels.begin(), type_labels.end(), label);
    if (it == type_labels.end())
      throw Error(ErrorKind::parse, fmt::format("line {}: unknown demand type `{}`", line_no, label));
    r.demand_type = static_cast<std::uint32_t>(it - type_labels.begin());
    try {
      validate_request(r, node_count);
    } catch (const Error& e) {
      throw Error(ErrorKind::parse, fmt::format("line {}: {}", line_no, e.what()));
    }
    requests.push_back(r);
  }
  return RequestTrace(std::move(requests));
}

const Request* RequestQueue::find(RequestId id) const {
  for (const auto& r : pending_)
    if (r.id == id) return &r;
  return nullptr;
}

RequestQueue::EnqueueResult RequestQueue::enqueue_and_evict(std::vector<Request> arrivals, Slot current_slot) {
  std::set<RequestId> ids;
  for (const auto& r : pending_) ids.insert(r.id);
  for (const auto& r : arrivals) {
    if (!ids.insert(r.id).second)
      throw Error(ErrorKind::infeasible, fmt::format("request {} enqueued twice", r.id));
  }
  auto order = [](const Request& a, const Request& b) {
    return a.arrival_slot != b.arrival_slot ? a.arrival_slot < b.arrival_slot : a.id < b.id;
  };
  std::sort(arrivals.begin(), arrivals.end(), order);
  const auto mid = static_cast<std::ptrdiff_t>(pending_.size());
  pending_.insert(pending_.end(), arrivals.begin(), arrivals.end());
  std::inplace_merge(pending_.begin(), pending_.begin() + mid, pending_.end(), order);
  current_slot_ = current_slot;

  EnqueueResult result;
  std::vector<Request> kept;
  kept.reserve(pending_.size());
  for (auto& r : pending_) {
    if (r.expiry() <= current_slot)
      result.evicted.push_back(r);
    else
      kept.push_back(r);
  }
  pending_ = std::move(kept);
  return result;
}

void RequestQueue::remove_served(std::span<const RequestId> served) {
  std::set<RequestId> to_remove(served.begin(), served.end());
  for (RequestId id : to_remove) {
    if (!find(id)) throw Error(ErrorKind::unknown_id, fmt::format("request {} is not pending", id));
  }
  std::erase_if(pending_, [&](const Request& r) { return to_remove.contains(r.id); });
}

}  // namespace slicesim
