#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "slicesim/error.hpp"
#include "slicesim/exact.hpp"
#include "slicesim/greedy.hpp"

using namespace slicesim;

namespace {

Request req(RequestId id, NodeId s, NodeId d, double b, double delay = 1000.0) {
  Request r;
  r.id = id;
  r.source = s;
  r.destination = d;
  r.rate = b;
  r.delay_bound = delay;
  r.arrival_slot = 0;
  r.lifetime = 4;
  return r;
}

RequestQueue queue_of(std::vector<Request> rs) {
  RequestQueue q;
  q.enqueue_and_evict(std::move(rs), 0);
  return q;
}

}  // namespace

TEST(BuildInstance, EmptyQueue) {
  const NetworkGraph g(2, {{0, 1, 10, 1, 1}});
  const auto inst = build_instance(g, ResidualState(g), RequestQueue{}, {}, 0);
  EXPECT_TRUE(inst.requests.empty());
  const auto sol = solve_exact(inst);
  EXPECT_EQ(sol.served, 0u);
  EXPECT_TRUE(sol.optimal);
}

TEST(BuildInstance, ChoiceSets) {
  const NetworkGraph g(3, {{0, 1, 10, 1, 6}, {1, 2, 10, 1, 6}, {0, 2, 10, 1, 8}});
  const auto inst = build_instance(g, ResidualState(g), queue_of({req(1, 0, 2, 5)}), {}, 0);
  ASSERT_EQ(inst.requests.size(), 1u);
  EXPECT_EQ(inst.choice_count(0), 3u);
  EXPECT_EQ(inst.requests[0].costs, (std::vector<double>{8, 12}));

  const auto none = build_instance(g, ResidualState(g), queue_of({req(1, 0, 2, 50)}), {}, 0);
  EXPECT_EQ(none.choice_count(0), 1u);
  EXPECT_EQ(solve_exact(none).choice[0], kReject);
}

TEST(SolveExact, CheaperPathWins) {
  const NetworkGraph g(3, {{0, 1, 10, 1, 6}, {1, 2, 10, 1, 6}, {0, 2, 10, 1, 8}});
  const auto inst = build_instance(g, ResidualState(g), queue_of({req(1, 0, 2, 5)}), {}, 0);
  const auto sol = solve_exact(inst);
  EXPECT_EQ(sol.served, 1u);
  EXPECT_EQ(sol.values.cost, 8.0);
}

TEST(SolveExact, SharedBottleneckRoutesOneAround) {
  // Both requests want link 0-2 (capacity 1, each needs 1); the detour serves the second.
  const NetworkGraph g(3, {{0, 2, 1, 1, 1}, {0, 1, 1, 1, 5}, {1, 2, 1, 1, 5}});
  const std::vector<Request> rs{req(1, 0, 2, 1), req(2, 0, 2, 1)};
  const auto q = queue_of(rs);
  const ResidualState idle(g);
  const auto sol = solve_exact(build_instance(g, idle, q, {}, 0));
  EXPECT_EQ(sol.served, 2u);
  EXPECT_EQ(sol.values.cost, 11.0);
  const auto oracle = slicesim::testing::exhaustive_lexicographic(g, idle.occupied_vector(), rs);
  EXPECT_EQ(oracle.served, sol.served);
  EXPECT_EQ(oracle.cost, sol.values.cost);
  EXPECT_EQ(oracle.fairness, sol.values.fairness);
}

TEST(SolveExact, PrefersServingMore) {
  // Serving only the cheap request is cheaper, but serving both wins lexicographically.
  const NetworkGraph g(3, {{0, 1, 10, 1, 1}, {1, 2, 10, 1, 20}});
  const auto sol = solve_exact(build_instance(g, ResidualState(g), queue_of({req(1, 0, 1, 5), req(2, 0, 2, 5)}), {}, 0));
  EXPECT_EQ(sol.served, 2u);
  EXPECT_EQ(sol.values.cost, 22.0);
}

TEST(SolveExact, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  while (checked < 150) {
    RandomGraphSpec spec;
    spec.node_count = 3 + rng() % 4;
    const std::size_t max_links = spec.node_count * (spec.node_count - 1) / 2;
    spec.link_count = spec.node_count - 1 + rng() % (max_links - spec.node_count + 2);
    spec.capacity = {20, 60};
    const auto g = generate_random_graph(spec, rng());
    ResidualState s(g);
    for (LinkId l = 0; l < g.link_count(); ++l)
      if (rng() % 2) s.reserve(1000 + l, std::vector<LinkId>{l}, std::uniform_real_distribution<double>(0, 0.95)(rng) * g.link(l).capacity, 9);
    std::vector<Request> rs;
    const std::size_t n = 1 + rng() % 4;
    for (RequestId i = 0; i < n; ++i) {
      const NodeId a = static_cast<NodeId>(rng() % spec.node_count);
      rs.push_back(req(i + 1, a, static_cast<NodeId>((a + 1 + rng() % (spec.node_count - 1)) % spec.node_count),
                       std::uniform_real_distribution<double>(1, 30)(rng), std::uniform_real_distribution<double>(3, 30)(rng)));
    }
    std::vector<double> occ(s.occupied_vector().begin(), s.occupied_vector().end());
    if (slicesim::testing::combination_count(g, occ, rs) > 20000) continue;
    const auto sol = solve_exact(build_instance(g, s, queue_of(rs), {}, 0));
    const auto oracle = slicesim::testing::exhaustive_lexicographic(g, occ, rs);
    ASSERT_TRUE(sol.optimal);
    EXPECT_EQ(sol.served, oracle.served);
    EXPECT_EQ(sol.values.cost, oracle.cost);
    EXPECT_EQ(sol.values.fairness, oracle.fairness);
    ++checked;
  }
}

TEST(SolveExact, SolutionIsFeasible) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = generate_random_graph(RandomGraphSpec{}, rng());
    std::vector<Request> rs;
    for (RequestId i = 0; i < 6; ++i) {
      const NodeId a = static_cast<NodeId>(rng() % 8);
      rs.push_back(req(i + 1, a, static_cast<NodeId>((a + 1 + rng() % 7) % 8),
                       std::uniform_real_distribution<double>(20, 120)(rng), 20.0));
    }
    const auto q = queue_of(rs);
    const ResidualState idle(g);
    const auto inst = build_instance(g, idle, q, {}, 0);
    const auto sol = solve_exact(inst);
    const auto a = to_assignment(inst, sol, g, idle, 0, 1);
    ResidualState after(g);
    EXPECT_NO_THROW(commit_assignment(a, after));
    EXPECT_NO_THROW(after.check_invariants());
    for (const auto& sl : a.slices()) {
      const Request* r = q.find(sl.request_id);
      ASSERT_NE(r, nullptr);
      EXPECT_TRUE(check_latency(sl.path, g, r->delay_bound));
    }
    EXPECT_EQ(a.size(), sol.served);
    EXPECT_EQ(evaluate_assignment(a, g, idle).cost, sol.values.cost);
  }
}

TEST(SolveExact, NeverServesFewerThanGreedy) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = generate_random_graph(RandomGraphSpec{}, rng());
    std::vector<Request> rs;
    for (RequestId i = 0; i < 6; ++i) {
      const NodeId a = static_cast<NodeId>(rng() % 8);
      rs.push_back(req(i + 1, a, static_cast<NodeId>((a + 1 + rng() % 7) % 8),
                       std::uniform_real_distribution<double>(20, 120)(rng), 20.0));
    }
    const auto q = queue_of(rs);
    const ResidualState idle(g);
    const auto sol = solve_exact(build_instance(g, idle, q, {}, 0));
    EXPECT_GE(sol.served, greedy_solve(g, idle, q, {}, 0, 1).assignment.size());
  }
}

TEST(SolveExact, WeightedModeKeepsServedFirst) {
  const NetworkGraph g(3, {{0, 1, 10, 1, 6}, {1, 2, 10, 1, 6}, {0, 2, 10, 1, 8}});
  IpConfig cfg;
  cfg.mode = IpMode::weighted;
  cfg.w1 = 1.0;
  cfg.w2 = 100.0;
  const auto sol = solve_exact(build_instance(g, ResidualState(g), queue_of({req(1, 0, 2, 5)}), cfg, 0));
  EXPECT_EQ(sol.served, 1u);
  // Fairness dominates: the two-link path spreads utilization over more links.
  EXPECT_EQ(sol.values.cost, 12.0);
  cfg.w2 = 0.0;
  EXPECT_EQ(solve_exact(build_instance(g, ResidualState(g), queue_of({req(1, 0, 2, 5)}), cfg, 0)).values.cost, 8.0);
}

TEST(SolveExact, NodeLimitReportsNonOptimal) {
  const auto g = generate_random_graph(RandomGraphSpec{}, 4);
  std::vector<Request> rs;
  std::mt19937_64 rng(1);
  for (RequestId i = 0; i < 12; ++i) {
    const NodeId a = static_cast<NodeId>(rng() % 8);
    rs.push_back(req(i + 1, a, static_cast<NodeId>((a + 1 + rng() % 7) % 8), 30, 40));
  }
  IpConfig cfg;
  cfg.node_limit = 10;
  const auto inst = build_instance(g, ResidualState(g), queue_of(rs), cfg, 0);
  const auto sol = solve_exact(inst);
  EXPECT_FALSE(sol.optimal);
  EXPECT_EQ(sol.choice.size(), inst.requests.size());
  EXPECT_NO_THROW(to_assignment(inst, sol, g, ResidualState(g), 0, 1));
}

TEST(SolveExact, ModeParsing) {
  EXPECT_EQ(parse_ip_mode("lex"), IpMode::lexicographic);
  EXPECT_EQ(parse_ip_mode("weighted"), IpMode::weighted);
  EXPECT_THROW(parse_ip_mode("fast"), Error);
}
