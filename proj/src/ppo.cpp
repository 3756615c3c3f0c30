#include "slicesim/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "slicesim/error.hpp"

namespace slicesim {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double nonzero_or_one(double v) { return v > 0.0 ? v : 1.0; }

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// log(sigmoid(z)) without overflow
double log_sigmoid(double z) { return -softplus(-z); }

double joint_log_prob(std::span<const double> logits, std::span<const std::uint8_t> present,
                      std::span<const std::uint8_t> action) {
  double lp = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!present[i]) continue;
    lp += action[i] ? log_sigmoid(logits[i]) : log_sigmoid(-logits[i]);
  }
  return lp;
}

std::optional<double> cheapest_feasible_cost(const NetworkGraph& graph, const ResidualState& state,
                                             const Request& r, const PathSearchLimits& limits) {
  auto paths = enumerate_feasible_paths(graph, state, r, limits);
  std::optional<double> best;
  for (const auto& p : paths) {
    const double c = slice_cost(p, graph);
    if (!best || c < *best) best = c;
  }
  return best;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------- observation

std::size_t observation_size(std::size_t node_count, std::size_t link_count, const ObservationConfig& config) {
  return 2 * link_count + config.max_requests * (2 * node_count + 4) + config.cost_history;
}

Observation encode_observation(const NetworkGraph& graph, const ResidualState& state, const RequestQueue& queue,
                               std::span<const double> cost_history, const ObservationConfig& config, Slot slot) {
  const std::size_t n_links = graph.link_count();
  const std::size_t n_nodes = graph.node_count();
  const std::size_t block = 2 * n_nodes + 4;
  Observation obs;
  obs.features.assign(observation_size(n_nodes, n_links, config), 0.0);
  obs.present.assign(config.max_requests, 0);
  obs.slot_requests.assign(config.max_requests, 0);

  const double p_max = nonzero_or_one(graph.max_cost());
  for (std::size_t l = 0; l < n_links; ++l) {
    const double cap = state.capacity(static_cast<LinkId>(l));
    obs.features[2 * l] = cap > 0.0 ? clamp01(state.occupied(static_cast<LinkId>(l)) / cap) : 1.0;
    obs.features[2 * l + 1] = clamp01(graph.link(static_cast<LinkId>(l)).cost / p_max);
  }

  const auto& pending = queue.pending();
  std::vector<std::size_t> order(pending.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pending[a].expiry() < pending[b].expiry(); });

  const double rate_norm = nonzero_or_one(graph.max_capacity());
  const double delay_norm = nonzero_or_one(graph.max_delay() * static_cast<double>(n_nodes > 1 ? n_nodes - 1 : 1));
  const double life_norm = nonzero_or_one(config.lifetime_norm);
  const std::size_t base = 2 * n_links;
  for (std::size_t j = 0; j < std::min(order.size(), config.max_requests); ++j) {
    const Request& r = pending[order[j]];
    double* f = obs.features.data() + base + j * block;
    f[0] = 1.0;
    f[1 + r.source] = 1.0;
    f[1 + n_nodes + r.destination] = 1.0;
    f[1 + 2 * n_nodes] = clamp01(r.rate / rate_norm);
    f[2 + 2 * n_nodes] = clamp01(r.delay_bound / delay_norm);
    f[3 + 2 * n_nodes] = clamp01(static_cast<double>(r.expiry() - slot) / life_norm);
    obs.present[j] = 1;
    obs.slot_requests[j] = r.id;
  }

  const std::size_t hist_base = base + config.max_requests * block;
  const double cost_norm = p_max * static_cast<double>(n_nodes > 1 ? n_nodes - 1 : 1);
  const std::size_t k = config.cost_history;
  const std::size_t available = std::min(k, cost_history.size());
  // most recent value last; missing history stays zero at the front
  for (std::size_t i = 0; i < available; ++i) {
    obs.features[hist_base + (k - available) + i] =
        clamp01(cost_history[cost_history.size() - available + i] / cost_norm);
  }
  return obs;
}

// ---------------------------------------------------------------- actions

ActionSample sample_action(std::span<const double> probabilities, Rng& rng) {
  ActionSample out;
  out.accept.assign(probabilities.size(), 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities[i];
    const bool accept = u(rng) < p;
    out.accept[i] = accept ? 1 : 0;
    out.log_prob += accept ? std::log(p) : std::log1p(-p);
  }
  return out;
}

ApplyResult apply_action(const ProvisionContext& ctx, const Observation& observation,
                         std::span<const std::uint8_t> accept) {
  if (accept.size() != observation.present.size())
    throw Error(ErrorKind::dimension_mismatch, "action size does not match the observation's request slots");
  std::map<RequestId, bool> accepted;
  for (std::size_t j = 0; j < accept.size(); ++j) {
    if (!accept[j]) continue;
    if (!observation.present[j]) throw Error(ErrorKind::infeasible, fmt::format("action accepts empty slot {}", j));
    accepted[observation.slot_requests[j]] = true;
  }

  ApplyResult out{Assignment{}, ctx.state, {}};
  SliceId next_id = ctx.first_slice_id;
  for (const Request& r : ctx.queue.pending()) {
    if (!accepted.contains(r.id) || !r.alive_at(ctx.slot)) continue;
    auto paths = enumerate_feasible_paths(ctx.graph, out.state, r, ctx.limits);
    if (paths.empty()) continue;
    std::size_t best = 0;
    double best_cost = slice_cost(paths[0], ctx.graph);
    for (std::size_t i = 1; i < paths.size(); ++i) {
      const double c = slice_cost(paths[i], ctx.graph);
      if (c < best_cost) {
        best = i;
        best_cost = c;
      }
    }
    SliceInstance s = build_slice(ctx.graph, out.state, r, std::move(paths[best]), ctx.slot, next_id++);
    out.state.reserve(s.slice_id, s.path.links, s.load, s.expiry);
    out.served_costs.push_back(s.cost);
    out.assignment.admit(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------- reward

RewardMode parse_reward_mode(std::string_view text) {
  if (text == "shaped") return RewardMode::shaped;
  if (text == "literal") return RewardMode::literal;
  throw Error(ErrorKind::config, fmt::format("unknown reward mode `{}` (shaped|literal)", text));
}

std::string_view to_string(RewardMode mode) { return mode == RewardMode::shaped ? "shaped" : "literal"; }

double compute_reward(const StepOutcome& outcome, const RewardConfig& config, double cost_norm) {
  double reward = 0.0;
  if (config.mode == RewardMode::literal) {
    for (double c : outcome.served_costs) reward += c;
    for (double c : outcome.waiting_cheapest_costs) reward -= c;
    return reward;
  }
  const double norm = nonzero_or_one(cost_norm);
  for (double c : outcome.served_costs) reward -= c / norm;
  reward -= config.kappa * static_cast<double>(outcome.evicted);
  return reward;
}

// ---------------------------------------------------------------- advantages

AdvantageEstimate estimate_advantages(const Trajectory& trajectory, double gamma, double gae_lambda) {
  const auto& steps = trajectory.steps;
  AdvantageEstimate out;
  out.advantages.assign(steps.size(), 0.0);
  out.returns.assign(steps.size(), 0.0);
  double gae = 0.0;
  for (std::size_t t = steps.size(); t-- > 0;) {
    const auto& s = steps[t];
    double next_value;
    if (s.episode_end)
      next_value = s.bootstrap_value;
    else
      next_value = t + 1 < steps.size() ? steps[t + 1].value : trajectory.last_value;
    const double delta = s.reward + gamma * next_value - s.value;
    gae = delta + (s.episode_end ? 0.0 : gamma * gae_lambda * gae);
    out.advantages[t] = gae;
    out.returns[t] = gae + s.value;
  }
  return out;
}

// ---------------------------------------------------------------- policy

void validate(const PpoConfig& c) {
  auto bad = [](const std::string& what) { return Error(ErrorKind::config, "ppo: " + what); };
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw bad("gamma must lie in [0, 1]");
  if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0)) throw bad("gae_lambda must lie in [0, 1]");
  if (!(c.clip > 0.0 && c.clip < 1.0)) throw bad("clip must lie in (0, 1)");
  if (!(c.learning_rate > 0.0)) throw bad("learning rate must be positive");
  if (c.epochs < 1 || c.minibatch < 1 || c.rollout < 1) throw bad("epochs, minibatch and rollout must be >= 1");
  if (c.observation.max_requests < 1) throw bad("max_requests must be >= 1");
  if (c.hidden.empty()) throw bad("at least one hidden layer required");
  if (!(c.entropy_coef >= 0.0 && c.value_coef >= 0.0)) throw bad("loss coefficients must be non-negative");
}

PolicyState::PolicyState(std::size_t observation_dim, PpoConfig config) : config_(std::move(config)) {
  validate(config_);
  Rng rng(derive_seed(config_.seed, {0x706f6c69ULL}));
  std::vector<std::size_t> sizes{observation_dim};
  sizes.insert(sizes.end(), config_.hidden.begin(), config_.hidden.end());
  sizes.push_back(config_.observation.max_requests);
  policy_ = Mlp(sizes, rng, 0.01);
  sizes.back() = 1;
  value_ = Mlp(sizes, rng, 1.0);
  reset_optimizers();
}

PolicyState::PolicyState(Mlp policy, Mlp value, PpoConfig config)
    : config_(std::move(config)), policy_(std::move(policy)), value_(std::move(value)) {
  validate(config_);
  if (policy_.input_size() != value_.input_size() || value_.output_size() != 1)
    throw Error(ErrorKind::dimension_mismatch, "policy and value networks do not share an input layout");
  config_.observation.max_requests = policy_.output_size();
  reset_optimizers();
}

void PolicyState::reset_optimizers() {
  const bool adaptive = config_.optimizer == OptimizerKind::adam;
  policy_opt_ = Optimizer(policy_, config_.learning_rate, adaptive);
  value_opt_ = Optimizer(value_, config_.learning_rate, adaptive);
}

std::vector<double> PolicyState::logits(std::span<const double> observation) const {
  return policy_.forward(observation);
}

double PolicyState::state_value(std::span<const double> observation) const {
  return value_.forward(observation)[0];
}

std::vector<double> policy_forward(const PolicyState& policy, const Observation& observation) {
  if (observation.features.size() != policy.observation_dim() || observation.present.size() != policy.slots())
    throw Error(ErrorKind::dimension_mismatch,
                fmt::format("observation ({} features, {} slots) does not match the policy ({}, {})",
                            observation.features.size(), observation.present.size(), policy.observation_dim(),
                            policy.slots()));
  auto z = policy.logits(observation.features);
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = observation.present[i] ? sigmoid(z[i]) : 0.0;
  return p;
}

// ---------------------------------------------------------------- loss

LossBreakdown ppo_loss(const PolicyState& state, std::span<const PpoSample> batch, const LossCoefficients& coef,
                       PpoGradients* grads) {
  LossBreakdown out;
  if (batch.empty()) return out;
  if (grads) {
    grads->policy = state.policy().zero_buffers();
    grads->value = state.value().zero_buffers();
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const std::size_t slots = state.slots();
  Mlp::Tape ptape, vtape;
  std::vector<double> dz(slots);
  std::size_t clipped = 0;

  for (const auto& s : batch) {
    if (s.observation.size() != state.observation_dim() || s.present.size() != slots || s.action.size() != slots)
      throw Error(ErrorKind::dimension_mismatch, "sample shape does not match the policy");
    const auto z = state.policy().forward(s.observation, ptape);
    const double v = state.value().forward(s.observation, vtape)[0];

    double logp = 0.0;
    double entropy = 0.0;
    for (std::size_t i = 0; i < slots; ++i) {
      if (!s.present[i]) continue;
      const double lp1 = log_sigmoid(z[i]);
      const double lp0 = log_sigmoid(-z[i]);
      const double p = sigmoid(z[i]);
      logp += s.action[i] ? lp1 : lp0;
      entropy += -p * lp1 - (1.0 - p) * lp0;
    }
    const double ratio = std::exp(logp - s.old_log_prob);
    const double a = s.advantage;
    const double clipped_ratio = std::clamp(ratio, 1.0 - coef.clip, 1.0 + coef.clip);
    const double surr = std::min(ratio * a, clipped_ratio * a);
    // the unclipped term is the active branch of the min
    const bool active = a >= 0.0 ? ratio <= 1.0 + coef.clip : ratio >= 1.0 - coef.clip;
    if (std::abs(ratio - 1.0) > coef.clip) ++clipped;

    out.policy -= surr * inv_b;
    out.value += (v - s.target_return) * (v - s.target_return) * inv_b;
    out.entropy += entropy * inv_b;
    out.mean_ratio += ratio * inv_b;

    if (grads) {
      const double dlogp = active ? -a * ratio * inv_b : 0.0;
      for (std::size_t i = 0; i < slots; ++i) {
        if (!s.present[i]) {
          dz[i] = 0.0;
          continue;
        }
        const double p = sigmoid(z[i]);
        const double dlogp_dz = (s.action[i] ? 1.0 : 0.0) - p;
        const double dentropy_dz = -z[i] * p * (1.0 - p);
        dz[i] = dlogp * dlogp_dz - coef.entropy_coef * inv_b * dentropy_dz;
      }
      state.policy().backward(ptape, dz, grads->policy);
      const double dv = coef.value_coef * 2.0 * (v - s.target_return) * inv_b;
      state.value().backward(vtape, std::span<const double>(&dv, 1), grads->value);
    }
  }
  out.clip_fraction = static_cast<double>(clipped) * inv_b;
  out.total = out.policy + coef.value_coef * out.value - coef.entropy_coef * out.entropy;
  return out;
}

std::vector<PpoSample> make_samples(std::span<const Trajectory> trajectories, const PpoConfig& config) {
  std::vector<PpoSample> samples;
  for (const auto& traj : trajectories) {
    const auto est = estimate_advantages(traj, config.gamma, config.gae_lambda);
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const auto& s = traj.steps[t];
      samples.push_back(PpoSample{s.observation, s.present, s.action, s.log_prob, est.advantages[t], est.returns[t]});
    }
  }
  if (config.normalize_advantages && samples.size() > 1) {
    double mean = 0.0;
    for (const auto& s : samples) mean += s.advantage;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (const auto& s : samples) var += (s.advantage - mean) * (s.advantage - mean);
    const double sd = std::sqrt(var / static_cast<double>(samples.size()));
    for (auto& s : samples) s.advantage = (s.advantage - mean) / (sd + 1e-8);
  }
  return samples;
}

UpdateDiagnostics ppo_update(PolicyState& state, std::span<const PpoSample> samples, Rng& rng) {
  if (samples.empty()) throw Error(ErrorKind::infeasible, "ppo update needs a non-empty batch");
  const auto& cfg = state.config();
  const LossCoefficients coef{cfg.clip, cfg.value_coef, cfg.entropy_coef};
  UpdateDiagnostics diag;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<PpoSample> minibatch;
  PpoGradients grads;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.minibatch) {
      const std::size_t end = std::min(order.size(), start + cfg.minibatch);
      minibatch.clear();
      for (std::size_t i = start; i < end; ++i) minibatch.push_back(samples[order[i]]);
      const auto loss = ppo_loss(state, minibatch, coef, &grads);
      if (!grads.policy.all_finite() || !grads.value.all_finite() || !std::isfinite(loss.total)) {
        ++diag.skipped_steps;
        continue;
      }
      if (cfg.max_grad_norm > 0.0) {
        const double norm = std::sqrt(grads.policy.squared_norm() + grads.value.squared_norm());
        if (norm > cfg.max_grad_norm) {
          grads.policy.scale(cfg.max_grad_norm / norm);
          grads.value.scale(cfg.max_grad_norm / norm);
        }
      }
      state.policy_optimizer().step(state.policy(), grads.policy);
      state.value_optimizer().step(state.value(), grads.value);
      ++diag.minibatch_steps;
      diag.mean_ratio += loss.mean_ratio;
      diag.clip_fraction += loss.clip_fraction;
      diag.policy_loss += loss.policy;
      diag.value_loss += loss.value;
      diag.entropy += loss.entropy;
    }
  }
  if (diag.minibatch_steps) {
    const double n = static_cast<double>(diag.minibatch_steps);
    diag.mean_ratio /= n;
    diag.clip_fraction /= n;
    diag.policy_loss /= n;
    diag.value_loss /= n;
    diag.entropy /= n;
  }
  return diag;
}

// ---------------------------------------------------------------- environment

EnvConfig with_defaults(EnvConfig config) {
  if (!config.graphs) {
    config.graphs = [spec = config.topology](std::uint64_t seed) { return generate_random_graph(spec, seed); };
  }
  if (!config.arrivals) {
    config.arrivals = [demand = config.demand](std::uint64_t seed, const NetworkGraph& graph) {
      DemandConfig d = demand;
      d.seed = derive_seed(seed, {0x64656dULL});
      return poisson_source(ArrivalProcess(d, graph.node_count()));
    };
  }
  return config;
}

SlicingEnv::SlicingEnv(EnvConfig config, ObservationConfig observation, RewardConfig reward)
    : config_(with_defaults(std::move(config))), obs_config_(observation), reward_(reward) {}

std::size_t SlicingEnv::observation_dim() const {
  if (sim_) return observation_size(sim_->graph().node_count(), sim_->graph().link_count(), obs_config_);
  const NetworkGraph g = config_.graphs(derive_seed(config_.seed, {episode_}));
  return observation_size(g.node_count(), g.link_count(), obs_config_);
}

void SlicingEnv::refresh_observation() {
  std::vector<double> hist(cost_history_.begin(), cost_history_.end());
  observation_ = encode_observation(sim_->graph(), sim_->state(), sim_->queue(), hist, obs_config_,
                                    sim_->current_slot());
}

const Observation& SlicingEnv::reset() {
  const std::uint64_t seed = derive_seed(config_.seed, {episode_});
  NetworkGraph graph = config_.graphs(seed);
  ArrivalSource arrivals = config_.arrivals(seed, graph);
  sim_.emplace(std::move(graph), config_.sim, std::move(arrivals));
  cost_history_.clear();
  ++episode_;
  sim_->begin_slot();
  refresh_observation();
  return observation_;
}

SlicingEnv::StepResult SlicingEnv::step(std::span<const std::uint8_t> accept) {
  if (!sim_ || sim_->finished()) reset();
  auto applied = apply_action(sim_->context(), observation_, accept);
  StepResult out;
  out.report = sim_->commit(applied.assignment);
  cost_history_.push_back(out.report.served ? out.report.slot_cost / static_cast<double>(out.report.served) : 0.0);
  while (cost_history_.size() > obs_config_.cost_history) cost_history_.pop_front();

  StepOutcome outcome;
  outcome.served_costs = std::move(applied.served_costs);
  if (reward_.mode == RewardMode::literal) {
    for (const auto& r : sim_->queue().pending()) {
      outcome.waiting_cheapest_costs.push_back(
          cheapest_feasible_cost(sim_->graph(), sim_->state(), r, sim_->config().limits).value_or(0.0));
    }
  }
  if (!sim_->finished()) {
    outcome.evicted = sim_->begin_slot().evicted.size();
  } else {
    out.episode_end = true;
    const Slot end = sim_->current_slot();
    outcome.evicted = static_cast<std::size_t>(std::count_if(
        sim_->queue().pending().begin(), sim_->queue().pending().end(),
        [end](const Request& r) { return r.expiry() <= end; }));
  }
  const double norm = reward_.cost_norm > 0.0 ? reward_.cost_norm : sim_->graph().max_cost();
  out.reward = compute_reward(outcome, reward_, norm);
  refresh_observation();
  return out;
}

TrainingCurve train(SlicingEnv& env, PolicyState& policy, std::size_t iterations,
                    const IterationCallback& on_iteration) {
  TrainingCurve curve;
  if (iterations == 0) return curve;
  const auto& cfg = policy.config();
  Rng action_rng(derive_seed(cfg.seed, {0x616374ULL}));
  Rng update_rng(derive_seed(cfg.seed, {0x757064ULL}));
  if (env.episode() == 0) env.reset();

  for (std::size_t it = 0; it < iterations; ++it) {
    Trajectory traj;
    traj.steps.reserve(cfg.rollout);
    double reward_sum = 0.0;
    for (std::size_t n = 0; n < cfg.rollout; ++n) {
      const Observation& obs = env.observation();
      const auto z = policy.logits(obs.features);
      std::vector<double> probs(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) probs[i] = obs.present[i] ? sigmoid(z[i]) : 0.0;
      ActionSample act = sample_action(probs, action_rng);
      Transition tr;
      tr.observation = obs.features;
      tr.present = obs.present;
      tr.action = act.accept;
      tr.log_prob = joint_log_prob(z, obs.present, act.accept);
      tr.value = policy.state_value(obs.features);
      const auto res = env.step(act.accept);
      tr.reward = res.reward;
      reward_sum += res.reward;
      if (res.episode_end) {
        tr.episode_end = true;
        tr.bootstrap_value = policy.state_value(env.observation().features);
        env.reset();
      }
      traj.steps.push_back(std::move(tr));
    }
    traj.last_value = policy.state_value(env.observation().features);

    const auto samples = make_samples(std::span<const Trajectory>(&traj, 1), cfg);
    const auto diag = ppo_update(policy, samples, update_rng);
    const double mean_reward = reward_sum / static_cast<double>(cfg.rollout);
    curve.mean_reward.push_back(mean_reward);
    curve.diagnostics.push_back(diag);
    if (on_iteration) on_iteration(it, mean_reward, diag);
  }
  return curve;
}

// ---------------------------------------------------------------- checkpoint

namespace {

void write_net(std::string& out, const char* name, const Mlp& net) {
  out += fmt::format("net {} {}\n", name, net.layers().size());
  for (const auto& l : net.layers()) {
    out += fmt::format("layer {} {} {}\n", l.inputs, l.outputs, l.activation == Activation::tanh ? "tanh" : "identity");
    for (std::size_t i = 0; i < l.weight.size(); ++i) out += fmt::format("{}{:.17g}", i ? " " : "", l.weight[i]);
    out += '\n';
    for (std::size_t i = 0; i < l.bias.size(); ++i) out += fmt::format("{}{:.17g}", i ? " " : "", l.bias[i]);
    out += '\n';
  }
}

Mlp read_net(std::istream& in, const char* expected_name) {
  auto fail = [&](const std::string& msg) {
    return Error(ErrorKind::parse, fmt::format("checkpoint ({} net): {}", expected_name, msg));
  };
  std::string tag, name;
  std::size_t count = 0;
  if (!(in >> tag >> name >> count) || tag != "net" || name != expected_name) throw fail("missing net header");
  std::vector<DenseLayer> layers;
  for (std::size_t li = 0; li < count; ++li) {
    DenseLayer l;
    std::string act;
    if (!(in >> tag >> l.inputs >> l.outputs >> act) || tag != "layer") throw fail("missing layer header");
    if (act == "tanh")
      l.activation = Activation::tanh;
    else if (act == "identity")
      l.activation = Activation::identity;
    else
      throw fail("unknown activation " + act);
    if (l.inputs == 0 || l.outputs == 0 || l.inputs > (1u << 20) || l.outputs > (1u << 20))
      throw fail("implausible layer shape");
    l.weight.resize(l.inputs * l.outputs);
    l.bias.resize(l.outputs);
    for (double& w : l.weight)
      if (!(in >> w) || !std::isfinite(w)) throw fail("bad weight value");
    for (double& b : l.bias)
      if (!(in >> b) || !std::isfinite(b)) throw fail("bad bias value");
    layers.push_back(std::move(l));
  }
  try {
    return Mlp(std::move(layers));
  } catch (const Error& e) {
    throw fail(e.what());
  }
}

}  // namespace

std::string serialize_checkpoint(const PolicyState& policy) {
  std::string out = fmt::format("ppo-ckpt v1 {} {}\n", policy.observation_dim(), policy.slots());
  write_net(out, "policy", policy.policy());
  write_net(out, "value", policy.value());
  out += "end\n";
  return out;
}

PolicyState parse_checkpoint(std::string_view text, const PpoConfig& config,
                             std::optional<std::size_t> expected_obs_dim, std::optional<std::size_t> expected_slots) {
  std::istringstream in{std::string(text)};
  std::string magic, version, end;
  std::size_t obs_dim = 0, slots = 0;
  if (!(in >> magic >> version >> obs_dim >> slots) || magic != "ppo-ckpt")
    throw Error(ErrorKind::parse, "not a ppo checkpoint (expected `ppo-ckpt v1 <obs_dim> <M>`)");
  if (version != "v1") throw Error(ErrorKind::parse, "unsupported checkpoint version " + version);
  if (expected_obs_dim && *expected_obs_dim != obs_dim)
    throw Error(ErrorKind::dimension_mismatch,
                fmt::format("checkpoint observation size {} does not match {}", obs_dim, *expected_obs_dim));
  if (expected_slots && *expected_slots != slots)
    throw Error(ErrorKind::dimension_mismatch,
                fmt::format("checkpoint has {} request slots, expected {}", slots, *expected_slots));
  Mlp policy = read_net(in, "policy");
  Mlp value = read_net(in, "value");
  if (!(in >> end) || end != "end") throw Error(ErrorKind::parse, "checkpoint is truncated");
  if (policy.input_size() != obs_dim || policy.output_size() != slots || value.input_size() != obs_dim ||
      value.output_size() != 1)
    throw Error(ErrorKind::dimension_mismatch, "checkpoint layer shapes disagree with its header");
  return PolicyState(std::move(policy), std::move(value), config);
}

void save_checkpoint(const PolicyState& policy, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::missing_checkpoint, "cannot write checkpoint " + path);
  out << serialize_checkpoint(policy);
}

PolicyState load_checkpoint(const std::string& path, const PpoConfig& config,
                            std::optional<std::size_t> expected_obs_dim, std::optional<std::size_t> expected_slots) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_checkpoint, "cannot open checkpoint " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str(), config, expected_obs_dim, expected_slots);
}

// ---------------------------------------------------------------- solver

PpoSolver::PpoSolver(PolicyState policy, bool deterministic, std::uint64_t seed)
    : policy_(std::move(policy)), deterministic_(deterministic), rng_(derive_seed(seed, {0x736f6cULL})) {}

Assignment PpoSolver::provision(const ProvisionContext& ctx) {
  const auto& ocfg = policy_.config().observation;
  std::vector<double> hist(cost_history_.begin(), cost_history_.end());
  const Observation obs = encode_observation(ctx.graph, ctx.state, ctx.queue, hist, ocfg, ctx.slot);
  const auto probs = policy_forward(policy_, obs);
  std::vector<std::uint8_t> accept(probs.size(), 0);
  if (deterministic_) {
    for (std::size_t i = 0; i < probs.size(); ++i) accept[i] = obs.present[i] && probs[i] >= 0.5 ? 1 : 0;
  } else {
    accept = sample_action(probs, rng_).accept;
  }
  auto applied = apply_action(ctx, obs, accept);
  double cost = 0.0;
  for (double c : applied.served_costs) cost += c;
  cost_history_.push_back(applied.served_costs.empty() ? 0.0 : cost / static_cast<double>(applied.served_costs.size()));
  while (cost_history_.size() > ocfg.cost_history) cost_history_.pop_front();
  return std::move(applied.assignment);
}

}  // namespace slicesim
