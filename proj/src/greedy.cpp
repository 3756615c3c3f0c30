#include "slicesim/greedy.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "slicesim/error.hpp"

namespace slicesim {

ImprovementRule parse_improvement_rule(std::string_view text) {
  if (text == "both" || text == "strict_both") return ImprovementRule::strict_both;
  if (text == "either") return ImprovementRule::either;
  if (text == "weighted" || text == "weighted_sum") return ImprovementRule::weighted_sum;
  throw Error(ErrorKind::config, fmt::format("unknown greedy rule `{}` (both|either|weighted)", text));
}

std::string_view to_string(ImprovementRule rule) {
  switch (rule) {
    case ImprovementRule::strict_both: return "both";
    case ImprovementRule::either: return "either";
    case ImprovementRule::weighted_sum: return "weighted";
  }
  return "both";
}

namespace {

struct Candidate {
  std::size_t index;
  double cost;
  double fairness;
};

bool improves(const Candidate& next, const Candidate& incumbent, const GreedyConfig& config, double scale) {
  switch (config.rule) {
    case ImprovementRule::strict_both:
      return next.cost < incumbent.cost && next.fairness > incumbent.fairness;
    case ImprovementRule::either:
      return next.cost < incumbent.cost || next.fairness > incumbent.fairness;
    case ImprovementRule::weighted_sum:
      return config.w1 * next.cost - config.w2 * scale * next.fairness <
             config.w1 * incumbent.cost - config.w2 * scale * incumbent.fairness;
  }
  return false;
}

}  // namespace

GreedyResult greedy_solve(const NetworkGraph& graph, const ResidualState& state, const RequestQueue& queue,
                          const GreedyConfig& config, Slot slot, SliceId first_slice_id, PathSearchLimits limits,
                          FairnessDenominator denominator) {
  if (config.max_paths < 1) throw Error(ErrorKind::config, "greedy max_paths must be at least 1");
  limits.max_paths = std::min(limits.max_paths, config.max_paths);
  const double scale = graph.max_cost() * static_cast<double>(graph.link_count());

  GreedyResult out{Assignment{}, state};
  SliceId next_id = first_slice_id;
  std::vector<double> hypothetical;
  for (const Request& r : queue.pending()) {
    if (!r.alive_at(slot)) continue;
    auto paths = enumerate_feasible_paths(graph, out.state, r, limits);
    if (paths.empty()) continue;

    auto evaluate = [&](std::size_t i) {
      hypothetical.assign(out.state.occupied_vector().begin(), out.state.occupied_vector().end());
      for (LinkId l : paths[i].links) hypothetical[l] += r.rate;
      return Candidate{i, slice_cost(paths[i], graph),
                       jain_fairness(hypothetical, out.state.capacity_vector(), out.state.active_count() + 1,
                                     denominator)};
    };
    Candidate incumbent = evaluate(0);
    for (std::size_t i = 1; i < paths.size(); ++i) {
      Candidate c = evaluate(i);
      if (improves(c, incumbent, config, scale)) incumbent = c;
    }

    SliceInstance slice = build_slice(graph, out.state, r, std::move(paths[incumbent.index]), slot, next_id++);
    out.state.reserve(slice.slice_id, slice.path.links, slice.load, slice.expiry);
    out.assignment.admit(std::move(slice));
  }
  return out;
}

Assignment GreedySolver::provision(const ProvisionContext& ctx) {
  return greedy_solve(ctx.graph, ctx.state, ctx.queue, config_, ctx.slot, ctx.first_slice_id, ctx.limits,
                      ctx.denominator)
      .assignment;
}

}  // namespace slicesim
