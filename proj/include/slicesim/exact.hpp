#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "slicesim/solver.hpp"

namespace slicesim {

enum class IpMode {
  lexicographic,  // max served, then min cost, then max fairness
  weighted,       // max served, then min w1*cost - w2*cost_scale*fairness
};

IpMode parse_ip_mode(std::string_view text);
std::string_view to_string(IpMode mode);

struct IpConfig {
  IpMode mode = IpMode::lexicographic;
  double w1 = 1.0;
  double w2 = 1.0;
  std::uint64_t node_limit = 2'000'000;
  std::size_t max_paths = 1000;
};

struct IpRequest {
  Request request;
  std::vector<Path> paths;    // ascending cost, enumeration order on ties
  std::vector<double> costs;  // slice_cost of each path
};

/// A self-contained snapshot: solving it needs no access to the graph or the
/// live residual state.
struct IpInstance {
  std::vector<IpRequest> requests;  // queue order
  std::vector<double> capacity;
  std::vector<double> occupied;
  std::vector<double> delay;
  std::vector<double> link_cost;
  std::size_t active_slices = 0;
  IpMode mode = IpMode::lexicographic;
  double w1 = 1.0;
  double w2 = 1.0;
  double cost_scale = 1.0;  // max link cost * |L|
  std::uint64_t node_limit = 2'000'000;
  FairnessDenominator denominator = FairnessDenominator::links;

  std::size_t choice_count(std::size_t request) const { return requests[request].paths.size() + 1; }
};

inline constexpr std::size_t kReject = std::numeric_limits<std::size_t>::max();

struct IpSolution {
  std::vector<std::size_t> choice;  // path index per request, or kReject
  std::size_t served = 0;
  double objective = 0.0;  // f1 in lexicographic mode, the weighted scalar otherwise
  ObjectiveValues values;
  bool optimal = true;
  std::uint64_t nodes_explored = 0;
};

IpInstance build_instance(const NetworkGraph& graph, const ResidualState& state, const RequestQueue& queue,
                          const IpConfig& config, Slot slot, PathSearchLimits limits = {},
                          FairnessDenominator denominator = FairnessDenominator::links);

/// Branch-and-bound over per-request path choices (queue order, cheapest path
/// first, reject last). Returns a global optimum unless node_limit is hit, in
/// which case the best incumbent is returned with optimal = false.
IpSolution solve_exact(const IpInstance& instance);

/// Scalar that solve_exact minimizes after the served count.
double scalarize(const IpInstance& instance, const ObjectiveValues& values);

/// Builds the slices for the chosen paths, numbering them from first_slice_id.
Assignment to_assignment(const IpInstance& instance, const IpSolution& solution, const NetworkGraph& graph,
                         const ResidualState& state, Slot slot, SliceId first_slice_id);

class ExactSolver final : public Solver {
 public:
  explicit ExactSolver(IpConfig config = {}) : config_(config) {}
  std::string_view name() const override { return "ip"; }
  Assignment provision(const ProvisionContext& ctx) override;

  const IpSolution& last_solution() const noexcept { return last_; }
  std::uint64_t non_optimal_slots() const noexcept { return non_optimal_; }

 private:
  IpConfig config_;
  IpSolution last_;
  std::uint64_t non_optimal_ = 0;
};

}  // namespace slicesim
