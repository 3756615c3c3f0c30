#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "slicesim/error.hpp"
#include "slicesim/slicing.hpp"

using namespace slicesim;

namespace {

// A=0, B=1, C=2
NetworkGraph triangle() { return NetworkGraph(3, {{0, 1, 100, 1, 3}, {1, 2, 100, 1, 5}, {0, 2, 100, 1, 20}}); }

Request req(NodeId s, NodeId d, double b = 1.0, double delay = 100.0, Slot a = 0, Slot h = 5) {
  Request r;
  r.id = 1;
  r.source = s;
  r.destination = d;
  r.rate = b;
  r.delay_bound = delay;
  r.arrival_slot = a;
  r.lifetime = h;
  return r;
}

std::vector<std::vector<NodeId>> node_lists(const std::vector<Path>& paths) {
  std::vector<std::vector<NodeId>> out;
  for (const auto& p : paths) out.push_back(p.nodes);
  return out;
}

Path path_of(const NetworkGraph& g, std::vector<NodeId> nodes) {
  Path p;
  p.nodes = nodes;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) p.links.push_back(*g.find_link(nodes[i], nodes[i + 1]));
  return p;
}

}  // namespace

TEST(Enumerate, TriangleBreadthFirst) {
  const auto g = triangle();
  const auto paths = enumerate_feasible_paths(g, ResidualState(g), req(0, 2));
  EXPECT_EQ(node_lists(paths), (std::vector<std::vector<NodeId>>{{0, 2}, {0, 1, 2}}));
}

TEST(Enumerate, LineGraphUniquePath) {
  const NetworkGraph g(3, {{0, 1, 100, 1, 1}, {1, 2, 100, 1, 1}});
  EXPECT_EQ(node_lists(enumerate_simple_paths(g, 0, 2)), (std::vector<std::vector<NodeId>>{{0, 1, 2}}));
}

TEST(Enumerate, CompleteGraphK4HasFivePaths) {
  std::vector<LinkAttr> links;
  for (NodeId a = 0; a < 4; ++a)
    for (NodeId b = a + 1; b < 4; ++b) links.push_back({a, b, 100, 1, 1});
  const NetworkGraph g(4, links);
  const auto paths = enumerate_simple_paths(g, 0, 3);
  EXPECT_EQ(paths.size(), 5u);
  for (std::size_t i = 1; i < paths.size(); ++i) EXPECT_LE(paths[i - 1].hops(), paths[i].hops());
}

TEST(Enumerate, LimitsAreHonoured) {
  std::vector<LinkAttr> links;
  for (NodeId a = 0; a < 5; ++a)
    for (NodeId b = a + 1; b < 5; ++b) links.push_back({a, b, 100, 1, 1});
  const NetworkGraph g(5, links);
  PathSearchLimits lim;
  lim.max_paths = 3;
  EXPECT_EQ(enumerate_simple_paths(g, 0, 4, lim).size(), 3u);
  lim.max_paths = 1000;
  lim.max_hops = 1;
  EXPECT_EQ(enumerate_simple_paths(g, 0, 4, lim).size(), 1u);
}

TEST(Enumerate, PrunesByBandwidthAndDelay) {
  const auto g = triangle();
  ResidualState s(g);
  s.reserve(9, std::vector<LinkId>{1}, 99.5, 10);
  EXPECT_EQ(node_lists(enumerate_feasible_paths(g, s, req(0, 2, 1.0))),
            (std::vector<std::vector<NodeId>>{{0, 2}}));
  EXPECT_TRUE(enumerate_feasible_paths(g, ResidualState(g), req(0, 2, 1.0, 0.5)).empty());
  EXPECT_EQ(enumerate_feasible_paths(g, ResidualState(g), req(0, 2, 1.0, 1.0)).size(), 1u);
}

TEST(Enumerate, MatchesDfsOracleOnRandomGraphs) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + rng() % 4;
    RandomGraphSpec spec;
    spec.node_count = n;
    spec.link_count = n - 1 + rng() % (n * (n - 1) / 2 - n + 2);
    const auto g = generate_random_graph(spec, rng());
    ResidualState s(g);
    std::vector<double> occ(g.link_count(), 0.0);
    for (LinkId l = 0; l < g.link_count(); ++l) {
      const double load = std::uniform_real_distribution<double>(0.0, 0.95)(rng) * g.link(l).capacity;
      s.reserve(100 + l, std::vector<LinkId>{l}, load, 10);
      occ[l] = s.occupied(l);
    }
    Request r = req(0, static_cast<NodeId>(n - 1), 20.0, std::uniform_real_distribution<double>(2, 30)(rng));
    const auto got = enumerate_feasible_paths(g, s, r);
    std::set<slicesim::testing::NodeSeq> got_set;
    for (const auto& p : got) {
      EXPECT_TRUE(is_valid_path(p, g));
      EXPECT_TRUE(check_bandwidth(p, s, r.rate));
      EXPECT_TRUE(check_latency(p, g, r.delay_bound));
      got_set.insert(p.nodes);
    }
    EXPECT_EQ(got_set.size(), got.size());
    EXPECT_EQ(got_set, slicesim::testing::dfs_feasible_paths(g, occ, r));
  }
}

TEST(Checks, Bandwidth) {
  const NetworkGraph g(3, {{0, 1, 10, 1, 1}, {1, 2, 10, 1, 1}});
  ResidualState s(g);
  s.reserve(1, std::vector<LinkId>{1}, 5, 9);
  const Path p = path_of(g, {0, 1, 2});
  EXPECT_FALSE(check_bandwidth(p, s, 6));
  EXPECT_TRUE(check_bandwidth(p, s, 5));
  EXPECT_TRUE(check_bandwidth(p, ResidualState(g), 0));
}

TEST(Checks, Latency) {
  const NetworkGraph g(3, {{0, 1, 10, 2, 1}, {1, 2, 10, 3, 1}});
  const Path p = path_of(g, {0, 1, 2});
  EXPECT_FALSE(check_latency(p, g, 4));
  EXPECT_TRUE(check_latency(p, g, 5));
  EXPECT_TRUE(check_latency(path_of(NetworkGraph(2, {{0, 1, 10, 1, 1}}), {0, 1}), NetworkGraph(2, {{0, 1, 10, 1, 1}}), 10));
}

TEST(Checks, SliceCost) {
  const NetworkGraph g(4, {{0, 1, 10, 1, 3}, {1, 2, 10, 1, 5}, {2, 3, 10, 1, 20}});
  EXPECT_EQ(slice_cost(path_of(g, {0, 1, 2}), g), 8.0);
  EXPECT_EQ(slice_cost(path_of(g, {2, 3}), g), 20.0);
  const NetworkGraph h(4, {{0, 1, 10, 1, 1}, {1, 2, 10, 1, 20}, {2, 3, 10, 1, 7}});
  EXPECT_EQ(slice_cost(path_of(h, {0, 1, 2, 3}), h), 28.0);
}

TEST(Fairness, Examples) {
  EXPECT_DOUBLE_EQ(jain_index(std::vector<double>{0.5, 0.5, 0.5}), 1.0);
  EXPECT_DOUBLE_EQ(jain_index(std::vector<double>{1, 0, 0, 0}), 0.25);
  EXPECT_NEAR(jain_index(std::vector<double>{0.2, 0.4}), 0.9, 1e-15);
  EXPECT_EQ(jain_index(std::vector<double>{0, 0, 0}), 1.0);
  EXPECT_EQ(jain_index(std::vector<double>{}), 1.0);
}

TEST(Fairness, UtilizationFromState) {
  const NetworkGraph g(3, {{0, 1, 100, 1, 1}, {1, 2, 200, 1, 1}});
  ResidualState s(g);
  EXPECT_EQ(jain_fairness(s), 1.0);
  s.reserve(1, std::vector<LinkId>{0}, 20, 5);
  s.reserve(2, std::vector<LinkId>{1}, 80, 5);
  EXPECT_NEAR(jain_fairness(s), 0.9, 1e-15);  // utilizations 0.2 and 0.4
  EXPECT_NEAR(jain_fairness(s, 1, FairnessDenominator::slices), 1.8, 1e-15);
}

TEST(BuildSlice, FieldMapping) {
  const auto g = triangle();
  Request r = req(0, 2, 5.0, 100.0, 0, 3);
  r.demand_type = 1;
  const auto s = build_slice(g, ResidualState(g), r, path_of(g, {0, 2}), 0, 7);
  EXPECT_EQ(s.load, 5.0);
  EXPECT_EQ(s.expiry, 3);
  EXPECT_EQ(s.slice_type, 1u);
  EXPECT_EQ(s.slice_id, 7u);
  EXPECT_EQ(s.cost, 20.0);
}

TEST(BuildSlice, Rejections) {
  const auto g = triangle();
  const Request r = req(0, 2, 5.0, 1.5, 0, 3);
  auto kind = [&](const Request& rq, Path p, Slot t, const ResidualState& s) {
    try {
      build_slice(g, s, rq, std::move(p), t, 1);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::config;
  };
  const ResidualState idle(g);
  EXPECT_EQ(kind(r, path_of(g, {0, 2}), 3, idle), ErrorKind::infeasible_path);  // expired
  EXPECT_EQ(kind(r, path_of(g, {0, 1, 2}), 0, idle), ErrorKind::infeasible_path);  // delay 2 > 1.5
  ResidualState full(g);
  full.reserve(1, std::vector<LinkId>{2}, 98, 9);
  EXPECT_EQ(kind(r, path_of(g, {0, 2}), 0, full), ErrorKind::infeasible_path);  // bandwidth
  EXPECT_EQ(kind(r, path_of(g, {0, 1}), 0, idle), ErrorKind::infeasible_path);  // wrong endpoint
}

TEST(Evaluate, Examples) {
  const auto g = triangle();
  const ResidualState idle(g);
  const auto empty = evaluate_assignment(Assignment{}, g, idle);
  EXPECT_EQ(empty.cost, 0.0);
  EXPECT_EQ(empty.fairness, 1.0);

  Assignment a;
  a.admit(build_slice(g, idle, req(0, 2, 10.0), path_of(g, {0, 1, 2}), 0, 1));
  const auto v = evaluate_assignment(a, g, idle);
  EXPECT_EQ(v.cost, 8.0);
  EXPECT_NEAR(v.fairness, 4.0 / 6.0, 1e-15);  // utilizations 0.1, 0.1, 0
  EXPECT_THROW(a.admit(build_slice(g, idle, req(0, 2, 10.0), path_of(g, {0, 2}), 0, 2)), Error);
}

TEST(Evaluate, DefaultTopologyFairnessRange) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = generate_random_graph(RandomGraphSpec{}, rng());
    ResidualState s(g);
    Assignment a;
    SliceId id = 1;
    for (int k = 0; k < 6; ++k) {
      const NodeId src = static_cast<NodeId>(rng() % 8);
      const NodeId dst = static_cast<NodeId>((src + 1 + rng() % 7) % 8);
      const auto paths = enumerate_feasible_paths(g, s, req(src, dst, 30.0));
      if (paths.empty()) continue;
      Request r = req(src, dst, 30.0);
      r.id = id;
      a.admit(build_slice(g, s, r, paths.front(), 0, id++));
    }
    const double f = evaluate_assignment(a, g, s).fairness;
    EXPECT_GE(f, 1.0 / 12.0 - 1e-12);
    EXPECT_LE(f, 1.0 + 1e-12);
  }
}
