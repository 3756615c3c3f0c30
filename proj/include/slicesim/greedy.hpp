#pragma once

#include <string_view>

#include "slicesim/solver.hpp"

namespace slicesim {

enum class ImprovementRule {
  strict_both,   // lower cost AND higher fairness than the incumbent
  either,        // lower cost OR higher fairness
  weighted_sum,  // lower w1*cost - w2*scale*fairness
};

ImprovementRule parse_improvement_rule(std::string_view text);
std::string_view to_string(ImprovementRule rule);

struct GreedyConfig {
  std::size_t max_paths = 1000;
  ImprovementRule rule = ImprovementRule::strict_both;
  double w1 = 1.0;
  double w2 = 1.0;
};

struct GreedyResult {
  Assignment assignment;
  ResidualState state;  // input state with every admitted slice committed
};

/// Sequential provisioning in queue order. The first feasible path of each
/// request is the incumbent; later paths replace it only when the rule says
/// they improve on it. Ties keep the incumbent.
GreedyResult greedy_solve(const NetworkGraph& graph, const ResidualState& state, const RequestQueue& queue,
                          const GreedyConfig& config, Slot slot, SliceId first_slice_id,
                          PathSearchLimits limits = {},
                          FairnessDenominator denominator = FairnessDenominator::links);

class GreedySolver final : public Solver {
 public:
  explicit GreedySolver(GreedyConfig config = {}) : config_(config) {}
  std::string_view name() const override { return "greedy"; }
  Assignment provision(const ProvisionContext& ctx) override;

 private:
  GreedyConfig config_;
};

}  // namespace slicesim
