#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicesim/demand.hpp"
#include "slicesim/mlp.hpp"
#include "slicesim/sim.hpp"
#include "slicesim/solver.hpp"
#include "slicesim/topology.hpp"

namespace slicesim {

// ---------------------------------------------------------------- observation

struct ObservationConfig {
  std::size_t max_requests = 16;  // M request slots
  std::size_t cost_history = 4;   // k past per-slot average costs
  double lifetime_norm = 10.0;    // remaining lifetime is divided by this
};

/// 2|L| + M(2|V| + 4) + k
std::size_t observation_size(std::size_t node_count, std::size_t link_count, const ObservationConfig& config);

struct Observation {
  std::vector<double> features;
  std::vector<std::uint8_t> present;     // per request slot
  std::vector<RequestId> slot_requests;  // request id per present slot
};

/// Link block [alpha/C, P/P_max] per link; request blocks [present, source
/// one-hot, destination one-hot, b/C_max, d/(D_max(|V|-1)), remaining/lifetime_norm]
/// for the M earliest-expiring pending requests; then the last k per-slot
/// average costs over P_max(|V|-1). Every feature is clamped to [0, 1].
Observation encode_observation(const NetworkGraph& graph, const ResidualState& state, const RequestQueue& queue,
                               std::span<const double> cost_history, const ObservationConfig& config, Slot slot);

// ---------------------------------------------------------------- actions

struct ActionSample {
  std::vector<std::uint8_t> accept;
  double log_prob = 0.0;
};

/// Independent Bernoulli draw per slot: accept iff U[0,1) < p.
ActionSample sample_action(std::span<const double> probabilities, Rng& rng);

struct ApplyResult {
  Assignment assignment;
  ResidualState state;
  std::vector<double> served_costs;  // per admitted slice, commit order
};

/// Routes each accepted request (queue order) on its cheapest feasible path;
/// accepted requests without a feasible path stay pending.
ApplyResult apply_action(const ProvisionContext& ctx, const Observation& observation,
                         std::span<const std::uint8_t> accept);

// ---------------------------------------------------------------- reward

enum class RewardMode { shaped, literal };
RewardMode parse_reward_mode(std::string_view text);
std::string_view to_string(RewardMode mode);

struct RewardConfig {
  RewardMode mode = RewardMode::shaped;
  double kappa = 2.0;      // eviction penalty (shaped)
  double cost_norm = 0.0;  // P_norm; 0 = the graph's maximum link cost
};

struct StepOutcome {
  std::vector<double> served_costs;
  std::size_t evicted = 0;
  std::vector<double> waiting_cheapest_costs;  // per still-pending request; 0 if unroutable
};

/// shaped: -sum(cost)/P_norm - kappa * evicted
/// literal: +sum of served path costs - sum of cheapest-path costs of waiting requests
double compute_reward(const StepOutcome& outcome, const RewardConfig& config, double cost_norm);

// ---------------------------------------------------------------- trajectories

struct Transition {
  std::vector<double> observation;
  std::vector<std::uint8_t> present;
  std::vector<std::uint8_t> action;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool episode_end = false;
  double bootstrap_value = 0.0;  // V(next) used when episode_end; 0 for a true terminal
};

struct Trajectory {
  std::vector<Transition> steps;
  double last_value = 0.0;  // V of the state after the final step when it is not an episode end
};

struct AdvantageEstimate {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimation; returns = advantages + values.
AdvantageEstimate estimate_advantages(const Trajectory& trajectory, double gamma, double gae_lambda);

// ---------------------------------------------------------------- policy

enum class OptimizerKind { adam, sgd };

struct PpoConfig {
  double gamma = 0.99;
  double clip = 0.2;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  std::size_t epochs = 4;
  std::size_t minibatch = 64;
  std::size_t rollout = 512;
  std::size_t iterations = 200;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  bool normalize_advantages = true;
  std::vector<std::size_t> hidden{64, 64};
  OptimizerKind optimizer = OptimizerKind::adam;
  RewardConfig reward{};
  ObservationConfig observation{};
  std::uint64_t seed = 7;
};

void validate(const PpoConfig& config);

/// Policy and value networks with their optimizers and hyperparameters.
class PolicyState {
 public:
  PolicyState(std::size_t observation_dim, PpoConfig config);
  PolicyState(Mlp policy, Mlp value, PpoConfig config);

  std::size_t observation_dim() const { return policy_.input_size(); }
  std::size_t slots() const { return policy_.output_size(); }
  const PpoConfig& config() const noexcept { return config_; }
  PpoConfig& config() noexcept { return config_; }

  Mlp& policy() noexcept { return policy_; }
  const Mlp& policy() const noexcept { return policy_; }
  Mlp& value() noexcept { return value_; }
  const Mlp& value() const noexcept { return value_; }
  Optimizer& policy_optimizer() noexcept { return policy_opt_; }
  Optimizer& value_optimizer() noexcept { return value_opt_; }
  /// Rebuilds both optimizers (fresh moments) at the configured learning rate.
  void reset_optimizers();

  std::vector<double> logits(std::span<const double> observation) const;
  double state_value(std::span<const double> observation) const;
  bool all_finite() const { return policy_.all_finite() && value_.all_finite(); }

 private:
  PpoConfig config_;
  Mlp policy_;
  Mlp value_;
  Optimizer policy_opt_;
  Optimizer value_opt_;
};

/// Acceptance probability per slot; slots with present == 0 are forced to 0.
std::vector<double> policy_forward(const PolicyState& policy, const Observation& observation);

double sigmoid(double z);

// ---------------------------------------------------------------- loss and update

struct PpoSample {
  std::vector<double> observation;
  std::vector<std::uint8_t> present;
  std::vector<std::uint8_t> action;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double target_return = 0.0;
};

struct LossCoefficients {
  double clip = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
};

struct LossBreakdown {
  double total = 0.0;
  double policy = 0.0;  // -mean clipped surrogate
  double value = 0.0;   // mean squared error
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
};

struct PpoGradients {
  LayerBuffers policy;
  LayerBuffers value;
};

/// Mean loss over `batch`; when `grads` is given, d(total)/d(params) is
/// written into it (overwriting).
LossBreakdown ppo_loss(const PolicyState& state, std::span<const PpoSample> batch, const LossCoefficients& coef,
                       PpoGradients* grads = nullptr);

struct UpdateDiagnostics {
  std::size_t minibatch_steps = 0;
  std::size_t skipped_steps = 0;  // non-finite gradients
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

/// Builds update samples from trajectories (GAE per trajectory, then
/// optional batch-wide advantage normalization).
std::vector<PpoSample> make_samples(std::span<const Trajectory> trajectories, const PpoConfig& config);

/// e epochs of shuffled minibatch steps on the clipped surrogate.
UpdateDiagnostics ppo_update(PolicyState& state, std::span<const PpoSample> samples, Rng& rng);

// ---------------------------------------------------------------- environment and training

using GraphFactory = std::function<NetworkGraph(std::uint64_t episode_seed)>;
using ArrivalFactory = std::function<ArrivalSource(std::uint64_t episode_seed, const NetworkGraph& graph)>;

struct EnvConfig {
  GraphFactory graphs;      // default: random graphs with the default topology settings
  ArrivalFactory arrivals;  // default: Poisson with `demand`
  RandomGraphSpec topology{};
  DemandConfig demand{};
  SimConfig sim{};
  std::uint64_t seed = 11;
};

/// Fills unset factories with the topology/demand defaults.
EnvConfig with_defaults(EnvConfig config);

class SlicingEnv {
 public:
  SlicingEnv(EnvConfig config, ObservationConfig observation, RewardConfig reward);

  const Observation& reset();
  struct StepResult {
    double reward = 0.0;
    bool episode_end = false;
    SlotReport report;
  };
  StepResult step(std::span<const std::uint8_t> accept);

  const Observation& observation() const noexcept { return observation_; }
  const Simulation& simulation() const { return *sim_; }
  std::size_t observation_dim() const;
  std::uint64_t episode() const noexcept { return episode_; }

 private:
  void refresh_observation();

  EnvConfig config_;
  ObservationConfig obs_config_;
  RewardConfig reward_;
  std::optional<Simulation> sim_;
  std::deque<double> cost_history_;
  Observation observation_;
  std::uint64_t episode_ = 0;
};

struct TrainingCurve {
  std::vector<double> mean_reward;  // per iteration
  std::vector<UpdateDiagnostics> diagnostics;
};

using IterationCallback = std::function<void(std::size_t iteration, double mean_reward, const UpdateDiagnostics&)>;

/// Collect -> advantages -> update, `iterations` times.
TrainingCurve train(SlicingEnv& env, PolicyState& policy, std::size_t iterations,
                    const IterationCallback& on_iteration = {});

// ---------------------------------------------------------------- checkpoint

/// Text layout headed by `ppo-ckpt v1 <obs_dim> <M>`, then both networks
/// layer by layer with row-major weights.
std::string serialize_checkpoint(const PolicyState& policy);
PolicyState parse_checkpoint(std::string_view text, const PpoConfig& config,
                             std::optional<std::size_t> expected_obs_dim = std::nullopt,
                             std::optional<std::size_t> expected_slots = std::nullopt);
void save_checkpoint(const PolicyState& policy, const std::string& path);
PolicyState load_checkpoint(const std::string& path, const PpoConfig& config,
                            std::optional<std::size_t> expected_obs_dim = std::nullopt,
                            std::optional<std::size_t> expected_slots = std::nullopt);

// ---------------------------------------------------------------- solver

class PpoSolver final : public Solver {
 public:
  /// deterministic: accept iff p >= 0.5; otherwise sample with `seed`.
  PpoSolver(PolicyState policy, bool deterministic = true, std::uint64_t seed = 0);

  std::string_view name() const override { return "ppo"; }
  Assignment provision(const ProvisionContext& ctx) override;

 private:
  PolicyState policy_;
  bool deterministic_;
  Rng rng_;
  std::deque<double> cost_history_;
};

}  // namespace slicesim
