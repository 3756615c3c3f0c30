#include "slicesim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "slicesim/error.hpp"
#include "slicesim/random.hpp"

namespace slicesim {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::capacity_exceeded: return "capacity-exceeded";
    case ErrorKind::unknown_id: return "unknown-id";
    case ErrorKind::infeasible_path: return "infeasible-path";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::parse: return "parse";
    case ErrorKind::config: return "config";
    case ErrorKind::missing_checkpoint: return "missing-checkpoint";
    case ErrorKind::non_finite_gradient: return "non-finite-gradient";
  }
  return "unknown";
}

namespace {

bool valid_attr(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

bool is_connected(std::size_t node_count, std::span<const LinkAttr> links) {
  if (node_count == 0) return true;
  std::vector<std::vector<NodeId>> adj(node_count);
  for (const auto& l : links) {
    adj[l.endpoint_a].push_back(l.endpoint_b);
    adj[l.endpoint_b].push_back(l.endpoint_a);
  }
  std::vector<bool> seen(node_count, false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    for (NodeId m : adj[n]) {
      if (!seen[m]) {
        seen[m] = true;
        ++visited;
        stack.push_back(m);
      }
    }
  }
  return visited == node_count;
}

NetworkGraph::NetworkGraph(std::size_t node_count, std::vector<LinkAttr> links)
    : node_count_(node_count), links_(std::move(links)), adjacency_(node_count) {
  if (node_count_ < 1) throw Error(ErrorKind::infeasible, "graph needs at least one node");
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    if (l.endpoint_a >= node_count_ || l.endpoint_b >= node_count_)
      throw Error(ErrorKind::infeasible, fmt::format("link {} references a node outside [0, {})", i, node_count_));
    if (l.endpoint_a == l.endpoint_b)
      throw Error(ErrorKind::infeasible, fmt::format("link {} is a self-loop on node {}", i, l.endpoint_a));
    if (!valid_attr(l.capacity) || !valid_attr(l.delay) || !valid_attr(l.cost))
      throw Error(ErrorKind::infeasible, fmt::format("link {} has a negative or non-finite attribute", i));
    auto key = std::minmax(l.endpoint_a, l.endpoint_b);
    if (!pairs.insert({key.first, key.second}).second)
      throw Error(ErrorKind::infeasible,
                  fmt::format("link {} duplicates the pair ({}, {})", i, key.first, key.second));
    adjacency_[l.endpoint_a].push_back(static_cast<LinkId>(i));
    adjacency_[l.endpoint_b].push_back(static_cast<LinkId>(i));
    max_capacity_ = std::max(max_capacity_, l.capacity);
    max_delay_ = std::max(max_delay_, l.delay);
    max_cost_ = std::max(max_cost_, l.cost);
  }
  if (!is_connected(node_count_, links_)) throw Error(ErrorKind::infeasible, "graph is not connected");
  for (NodeId n = 0; n < node_count_; ++n) {
    auto& adj = adjacency_[n];
    std::sort(adj.begin(), adj.end(), [&](LinkId x, LinkId y) {
      return links_[x].other_end(n) < links_[y].other_end(n);
    });
  }
}

std::optional<LinkId> NetworkGraph::find_link(NodeId a, NodeId b) const {
  if (a >= node_count_ || b >= node_count_) return std::nullopt;
  for (LinkId id : adjacency_[a]) {
    if (links_[id].other_end(a) == b) return id;
  }
  return std::nullopt;
}

std::string NetworkGraph::serialize() const {
  std::string out = fmt::format("graph {} {}\n", node_count_, links_.size());
  for (const auto& l : links_) {
    out += fmt::format("link {} {} {:.17g} {:.17g} {:.17g}\n", l.endpoint_a, l.endpoint_b, l.capacity,
                       l.delay, l.cost);
  }
  return out;
}

NetworkGraph NetworkGraph::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::pair<std::size_t, std::size_t>> header;
  std::vector<LinkAttr> links;
  auto fail = [&](const std::string& msg) -> Error {
    return Error(ErrorKind::parse, fmt::format("line {}: {}", line_no, msg));
  };
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "graph") {
      if (header) throw fail("duplicate graph header");
      long long n = -1, m = -1;
      if (!(ls >> n >> m) || n < 1 || m < 0) throw fail("expected `graph <node_count> <link_count>`");
      header = {static_cast<std::size_t>(n), static_cast<std::size_t>(m)};
    } else if (tag == "link") {
      if (!header) throw fail("link before graph header");
      long long a = -1, b = -1;
      LinkAttr l;
      if (!(ls >> a >> b >> l.capacity >> l.delay >> l.cost))
        throw fail("expected `link <a> <b> <capacity> <delay> <cost>`");
      if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= header->first ||
          static_cast<std::size_t>(b) >= header->first)
        throw fail("endpoint out of range");
      if (a == b) throw fail("self-loop");
      if (!valid_attr(l.capacity) || !valid_attr(l.delay) || !valid_attr(l.cost))
        throw fail("attributes must be finite and non-negative");
      l.endpoint_a = static_cast<NodeId>(a);
      l.endpoint_b = static_cast<NodeId>(b);
      for (const auto& prev : links) {
        if (std::minmax(prev.endpoint_a, prev.endpoint_b) == std::minmax(l.endpoint_a, l.endpoint_b))
          throw fail("duplicate link");
      }
      links.push_back(l);
    } else {
      throw fail(fmt::format("unknown record `{}`", tag));
    }
    std::string trailing;
    if (ls >> trailing) throw fail("trailing tokens");
  }
  if (!header) throw Error(ErrorKind::parse, "missing graph header");
  if (links.size() != header->second)
    throw Error(ErrorKind::parse, fmt::format("line {}: header declares {} links, found {}", line_no,
                                              header->second, links.size()));
  if (!is_connected(header->first, links))
    throw Error(ErrorKind::parse, fmt::format("line {}: graph is not connected", line_no));
  return NetworkGraph(header->first, std::move(links));
}

NetworkGraph NetworkGraph::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, fmt::format("cannot open graph file {}", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void NetworkGraph::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write graph file {}", path));
  out << serialize();
}

NetworkGraph generate_random_graph(const RandomGraphSpec& spec, std::uint64_t seed) {
  const std::size_t n = spec.node_count;
  const std::size_t max_links = n * (n - 1) / 2;
  if (n < 1 || spec.link_count + 1 < n || spec.link_count > max_links)
    throw Error(ErrorKind::infeasible,
                fmt::format("cannot build a connected simple graph with {} nodes and {} links", n,
                            spec.link_count));
  for (const Interval* iv : {&spec.capacity, &spec.delay, &spec.cost}) {
    if (!(iv->lo >= 0.0 && iv->hi >= iv->lo && std::isfinite(iv->hi)))
      throw Error(ErrorKind::infeasible, "attribute intervals must satisfy 0 <= lo <= hi < inf");
  }

  std::vector<std::pair<NodeId, NodeId>> all_pairs;
  all_pairs.reserve(max_links);
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b) all_pairs.emplace_back(a, b);

  Rng rng(derive_seed(seed, {0x746f706fULL}));
  constexpr int kMaxAttempts = 1'000'000;
  std::vector<LinkAttr> links(spec.link_count);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    // partial Fisher-Yates: the first link_count entries are a uniform m-subset
    for (std::size_t i = 0; i < spec.link_count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all_pairs.size() - 1);
      std::swap(all_pairs[i], all_pairs[pick(rng)]);
    }
    std::vector<std::pair<NodeId, NodeId>> chosen(all_pairs.begin(), all_pairs.begin() + spec.link_count);
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      links[i].endpoint_a = chosen[i].first;
      links[i].endpoint_b = chosen[i].second;
    }
    if (!is_connected(n, links)) continue;

    auto draw = [&](const Interval& iv) { return std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng); };
    for (auto& l : links) {
      l.capacity = draw(spec.capacity);
      l.delay = draw(spec.delay);
      l.cost = draw(spec.cost);
    }
    return NetworkGraph(n, std::move(links));
  }
  throw Error(ErrorKind::infeasible, "rejection sampling did not find a connected graph");
}

ResidualState::ResidualState(const NetworkGraph& graph)
    : capacity_(graph.link_count()), occupied_(graph.link_count(), 0.0), per_link_(graph.link_count()) {
  for (std::size_t i = 0; i < graph.link_count(); ++i) capacity_[i] = graph.links()[i].capacity;
}

void ResidualState::recompute(LinkId l) {
  double sum = 0.0;
  for (const auto& [id, load] : per_link_[l]) sum += load;
  occupied_[l] = sum;
}

void ResidualState::reserve(SliceId slice, std::span<const LinkId> links, double load, Slot expiry) {
  if (reservations_.contains(slice))
    throw Error(ErrorKind::infeasible, fmt::format("slice {} is already reserved", slice));
  if (!(std::isfinite(load) && load >= 0.0))
    throw Error(ErrorKind::infeasible, "reservation load must be finite and non-negative");
  std::set<LinkId> distinct;
  for (LinkId l : links) {
    if (l >= capacity_.size()) throw Error(ErrorKind::unknown_id, fmt::format("unknown link {}", l));
    if (!distinct.insert(l).second)
      throw Error(ErrorKind::infeasible, fmt::format("link {} listed twice", l));
  }
  // Evaluate the post-reservation sums exactly as recompute() will.
  for (LinkId l : links) {
    double sum = 0.0;
    bool placed = false;
    for (const auto& [id, existing] : per_link_[l]) {
      if (!placed && slice < id) {
        sum += load;
        placed = true;
      }
      sum += existing;
    }
    if (!placed) sum += load;
    if (sum > capacity_[l])
      throw Error(ErrorKind::capacity_exceeded,
                  fmt::format("link {}: occupied {} + load {} exceeds capacity {}", l, occupied_[l], load,
                              capacity_[l]));
  }
  for (LinkId l : links) {
    auto& entries = per_link_[l];
    auto pos = std::lower_bound(entries.begin(), entries.end(), slice,
                                [](const auto& e, SliceId id) { return e.first < id; });
    entries.insert(pos, {slice, load});
    recompute(l);
  }
  reservations_.emplace(slice, Reservation{{links.begin(), links.end()}, load, expiry});
}

void ResidualState::release(SliceId slice) {
  auto it = reservations_.find(slice);
  if (it == reservations_.end()) throw Error(ErrorKind::unknown_id, fmt::format("no reservation {}", slice));
  for (LinkId l : it->second.links) {
    auto& entries = per_link_[l];
    std::erase_if(entries, [&](const auto& e) { return e.first == slice; });
    recompute(l);
  }
  reservations_.erase(it);
}

std::vector<SliceId> ResidualState::release_expired(Slot current_slot) {
  std::vector<SliceId> expired;
  for (const auto& [id, r] : reservations_) {
    if (r.expiry <= current_slot) expired.push_back(id);
  }
  for (SliceId id : expired) release(id);
  return expired;
}

void ResidualState::check_invariants() const {
  for (std::size_t l = 0; l < capacity_.size(); ++l) {
    if (!(occupied_[l] >= 0.0 && occupied_[l] <= capacity_[l]))
      throw std::logic_error(fmt::format("link {}: occupied {} outside [0, {}]", l, occupied_[l], capacity_[l]));
  }
  std::vector<std::vector<std::pair<SliceId, double>>> expected(capacity_.size());
  for (const auto& [id, r] : reservations_) {
    for (LinkId l : r.links) expected[l].emplace_back(id, r.load);
  }
  for (std::size_t l = 0; l < capacity_.size(); ++l) {
    double sum = 0.0;
    for (const auto& e : expected[l]) sum += e.second;
    if (expected[l] != per_link_[l] || sum != occupied_[l])
      throw std::logic_error(fmt::format("link {}: occupied bookkeeping out of sync", l));
  }
}

}  // namespace slicesim
