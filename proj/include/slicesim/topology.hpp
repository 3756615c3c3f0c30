#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slicesim {

using NodeId = std::uint32_t;
using LinkId = std::uint32_t;
using SliceId = std::uint64_t;
using Slot = std::int64_t;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

struct LinkAttr {
  NodeId endpoint_a = 0;
  NodeId endpoint_b = 0;
  double capacity = 0.0;
  double delay = 0.0;
  double cost = 0.0;

  NodeId other_end(NodeId n) const noexcept {
    return n == endpoint_a ? endpoint_b : endpoint_a;
  }
};

/// Undirected simple connected substrate graph. Immutable once constructed;
/// the constructor rejects self-loops, parallel links, negative or
/// non-finite attributes, and disconnected graphs.
class NetworkGraph {
 public:
  NetworkGraph(std::size_t node_count, std::vector<LinkAttr> links);

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t link_count() const noexcept { return links_.size(); }
  const LinkAttr& link(LinkId id) const { return links_.at(id); }
  std::span<const LinkAttr> links() const noexcept { return links_; }
  /// Incident link ids of `node`, ordered by the neighbour's node id.
  std::span<const LinkId> incident(NodeId node) const { return adjacency_.at(node); }
  std::optional<LinkId> find_link(NodeId a, NodeId b) const;

  double max_capacity() const noexcept { return max_capacity_; }
  double max_delay() const noexcept { return max_delay_; }
  double max_cost() const noexcept { return max_cost_; }

  /// Line-oriented text form: `graph <n> <m>` then `link <a> <b> <C> <D> <P>`.
  std::string serialize() const;
  static NetworkGraph parse(std::string_view text);
  static NetworkGraph load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::size_t node_count_;
  std::vector<LinkAttr> links_;
  std::vector<std::vector<LinkId>> adjacency_;
  double max_capacity_ = 0.0;
  double max_delay_ = 0.0;
  double max_cost_ = 0.0;
};

bool is_connected(std::size_t node_count, std::span<const LinkAttr> links);

struct RandomGraphSpec {
  std::size_t node_count = 8;
  std::size_t link_count = 12;
  Interval capacity{100.0, 200.0};
  Interval delay{1.0, 10.0};
  Interval cost{1.0, 20.0};
};

/// Uniform G(n, m) conditioned on connectivity (rejection sampling), with
/// link attributes drawn uniformly from the configured intervals.
NetworkGraph generate_random_graph(const RandomGraphSpec& spec, std::uint64_t seed);

struct Reservation {
  std::vector<LinkId> links;
  double load = 0.0;
  Slot expiry = 0;
};

/// Occupied capacity per link plus the reservations that account for it.
///
/// Occupied values are always recomputed as the sum of the loads on a link in
/// ascending slice-id order, so reserve followed by release of the same slice
/// restores the previous vector bit-for-bit.
class ResidualState {
 public:
  explicit ResidualState(const NetworkGraph& graph);

  std::size_t link_count() const noexcept { return capacity_.size(); }
  double capacity(LinkId l) const { return capacity_.at(l); }
  double occupied(LinkId l) const { return occupied_.at(l); }
  double residual(LinkId l) const { return capacity_.at(l) - occupied_.at(l); }
  std::span<const double> occupied_vector() const noexcept { return occupied_; }
  std::span<const double> capacity_vector() const noexcept { return capacity_; }

  /// True iff adding `load` to link `l` keeps it within capacity.
  bool fits(LinkId l, double load) const { return occupied_.at(l) + load <= capacity_.at(l); }

  /// Atomic: throws capacity_exceeded (state unchanged) if any link would overflow.
  void reserve(SliceId slice, std::span<const LinkId> links, double load, Slot expiry);
  void release(SliceId slice);
  /// Removes every reservation with expiry <= current_slot; returns their ids.
  std::vector<SliceId> release_expired(Slot current_slot);

  const std::map<SliceId, Reservation>& reservations() const noexcept { return reservations_; }
  std::size_t active_count() const noexcept { return reservations_.size(); }

  /// Throws std::logic_error when 0 <= occupied <= capacity or the
  /// sum-of-loads bookkeeping is broken.
  void check_invariants() const;

 private:
  void recompute(LinkId l);

  std::vector<double> capacity_;
  std::vector<double> occupied_;
  // per link: (slice id, load) in ascending slice-id order
  std::vector<std::vector<std::pair<SliceId, double>>> per_link_;
  std::map<SliceId, Reservation> reservations_;
};

}  // namespace slicesim
