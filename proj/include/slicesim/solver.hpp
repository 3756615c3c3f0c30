#pragma once

#include <string_view>

#include "slicesim/demand.hpp"
#include "slicesim/slicing.hpp"
#include "slicesim/topology.hpp"

namespace slicesim {

/// Everything a solver may look at in one slot. Solvers number their slices
/// consecutively from `first_slice_id`; the returned assignment must be
/// committable onto `state` in order.
struct ProvisionContext {
  const NetworkGraph& graph;
  const ResidualState& state;
  const RequestQueue& queue;
  Slot slot = 0;
  SliceId first_slice_id = 0;
  PathSearchLimits limits{};
  FairnessDenominator denominator = FairnessDenominator::links;
};

class Solver {
 public:
  virtual ~Solver() = default;
  virtual std::string_view name() const = 0;
  virtual Assignment provision(const ProvisionContext& ctx) = 0;
};

}  // namespace slicesim
