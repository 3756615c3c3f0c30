#include "slicesim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "slicesim/error.hpp"

namespace slicesim {

namespace {

struct BadValue {
  std::string message;
};

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw BadValue{"empty list element"};
    out.push_back(item);
  }
  if (out.empty()) throw BadValue{"expected a non-empty comma-separated list"};
  return out;
}

double to_double(const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw BadValue{fmt::format("expected a number, got `{}`", v)};
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw BadValue{fmt::format("expected a non-negative integer, got `{}`", v)};
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw BadValue{fmt::format("expected a boolean, got `{}`", v)};
}

Interval to_interval(const std::string& v) {
  auto parts = split_list(v);
  if (parts.size() != 2) throw BadValue{"expected `lo,hi`"};
  return {to_double(parts[0]), to_double(parts[1])};
}

std::vector<double> to_doubles(const std::string& v) {
  std::vector<double> out;
  for (const auto& p : split_list(v)) out.push_back(to_double(p));
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& p : split_list(v)) out.push_back(static_cast<std::size_t>(to_u64(p)));
  return out;
}

std::string num(double v) { return fmt::format("{}", v); }
std::string interval(const Interval& iv) { return fmt::format("{},{}", iv.lo, iv.hi); }

struct KeyDef {
  std::string key;  // section.name
  std::string doc;
  std::function<void(ExperimentSpec&, const std::string&)> set;
  std::function<std::string(const ExperimentSpec&)> show;
};

const std::vector<KeyDef>& registry() {
  using S = ExperimentSpec;
  static const std::vector<KeyDef> keys = {
      {"topology.nodes", "number of nodes |V|", [](S& s, const std::string& v) { s.topology.node_count = to_u64(v); },
       [](const S& s) { return std::to_string(s.topology.node_count); }},
      {"topology.links", "number of links |L|", [](S& s, const std::string& v) { s.topology.link_count = to_u64(v); },
       [](const S& s) { return std::to_string(s.topology.link_count); }},
      {"topology.capacity", "link capacity interval lo,hi (uniform)",
       [](S& s, const std::string& v) { s.topology.capacity = to_interval(v); },
       [](const S& s) { return interval(s.topology.capacity); }},
      {"topology.delay", "link delay interval lo,hi (uniform)",
       [](S& s, const std::string& v) { s.topology.delay = to_interval(v); },
       [](const S& s) { return interval(s.topology.delay); }},
      {"topology.cost", "link cost interval lo,hi (uniform)",
       [](S& s, const std::string& v) { s.topology.cost = to_interval(v); },
       [](const S& s) { return interval(s.topology.cost); }},
      {"topology.file", "fixed graph file instead of random graphs",
       [](S& s, const std::string& v) { s.graph_file = v; },
       [](const S& s) { return s.graph_file.value_or(""); }},

      {"demand.lambda", "Poisson arrival rate per slot (used by `run`)",
       [](S& s, const std::string& v) { s.demand.lambda = to_double(v); },
       [](const S& s) { return num(s.demand.lambda); }},
      {"demand.rate_scale", "b = rate_scale * |N(0, rate_variance)|",
       [](S& s, const std::string& v) { s.demand.rate_scale = to_double(v); },
       [](const S& s) { return num(s.demand.rate_scale); }},
      {"demand.delay_scale", "d = delay_scale * max(floor, N(1, delay_variance))",
       [](S& s, const std::string& v) { s.demand.delay_scale = to_double(v); },
       [](const S& s) { return num(s.demand.delay_scale); }},
      {"demand.lifetime_scale", "h = max(1, round(lifetime_scale * N(1, lifetime_variance)))",
       [](S& s, const std::string& v) { s.demand.lifetime_scale = to_double(v); },
       [](const S& s) { return num(s.demand.lifetime_scale); }},
      {"demand.rate_variance", "variance of the rate base normal",
       [](S& s, const std::string& v) { s.demand.rate_variance = to_double(v); },
       [](const S& s) { return num(s.demand.rate_variance); }},
      {"demand.delay_variance", "variance of the delay base normal",
       [](S& s, const std::string& v) { s.demand.delay_variance = to_double(v); },
       [](const S& s) { return num(s.demand.delay_variance); }},
      {"demand.lifetime_variance", "variance of the lifetime base normal",
       [](S& s, const std::string& v) { s.demand.lifetime_variance = to_double(v); },
       [](const S& s) { return num(s.demand.lifetime_variance); }},
      {"demand.delay_floor", "lower clamp of the delay base normal",
       [](S& s, const std::string& v) { s.demand.delay_floor = to_double(v); },
       [](const S& s) { return num(s.demand.delay_floor); }},
      {"demand.types", "demand type labels", [](S& s, const std::string& v) { s.demand.types = split_list(v); },
       [](const S& s) { return fmt::format("{}", fmt::join(s.demand.types, ",")); }},
      {"demand.seed", "arrival seed (used by `run`)", [](S& s, const std::string& v) { s.demand.seed = to_u64(v); },
       [](const S& s) { return std::to_string(s.demand.seed); }},
      {"demand.trace", "replay requests from a trace file instead of Poisson arrivals",
       [](S& s, const std::string& v) { s.trace_file = v; },
       [](const S& s) { return s.trace_file.value_or(""); }},

      {"solver.name", "solver for `run`: greedy|ip|ppo", [](S& s, const std::string& v) { s.solver = v; },
       [](const S& s) { return s.solver; }},
      {"solver.max_paths", "cap on enumerated paths per request",
       [](S& s, const std::string& v) { s.sim.limits.max_paths = to_u64(v); },
       [](const S& s) { return std::to_string(s.sim.limits.max_paths); }},
      {"solver.max_hops", "cap on path hop count (0 = |V|-1)",
       [](S& s, const std::string& v) {
         const auto h = to_u64(v);
         s.sim.limits.max_hops = h ? std::optional<std::size_t>(h) : std::nullopt;
       },
       [](const S& s) { return std::to_string(s.sim.limits.max_hops.value_or(0)); }},
      {"solver.fairness_denominator", "links|slices",
       [](S& s, const std::string& v) {
         if (v == "links")
           s.sim.denominator = FairnessDenominator::links;
         else if (v == "slices")
           s.sim.denominator = FairnessDenominator::slices;
         else
           throw BadValue{"expected links|slices"};
       },
       [](const S& s) { return std::string(s.sim.denominator == FairnessDenominator::links ? "links" : "slices"); }},
      {"solver.greedy.rule", "candidate replacement rule: both|either|weighted",
       [](S& s, const std::string& v) {
         try {
           s.greedy.rule = parse_improvement_rule(v);
         } catch (const Error& e) {
           throw BadValue{e.what()};
         }
       },
       [](const S& s) { return std::string(to_string(s.greedy.rule)); }},
      {"solver.greedy.w1", "cost weight (weighted rule)", [](S& s, const std::string& v) { s.greedy.w1 = to_double(v); },
       [](const S& s) { return num(s.greedy.w1); }},
      {"solver.greedy.w2", "fairness weight (weighted rule)",
       [](S& s, const std::string& v) { s.greedy.w2 = to_double(v); },
       [](const S& s) { return num(s.greedy.w2); }},
      {"solver.ip.mode", "lex|weighted",
       [](S& s, const std::string& v) {
         try {
           s.ip.mode = parse_ip_mode(v);
         } catch (const Error& e) {
           throw BadValue{e.what()};
         }
       },
       [](const S& s) { return std::string(to_string(s.ip.mode)); }},
      {"solver.ip.w1", "cost weight (weighted mode)", [](S& s, const std::string& v) { s.ip.w1 = to_double(v); },
       [](const S& s) { return num(s.ip.w1); }},
      {"solver.ip.w2", "fairness weight (weighted mode)", [](S& s, const std::string& v) { s.ip.w2 = to_double(v); },
       [](const S& s) { return num(s.ip.w2); }},
      {"solver.ip.node_limit", "branch-and-bound node cap per slot",
       [](S& s, const std::string& v) { s.ip.node_limit = to_u64(v); },
       [](const S& s) { return std::to_string(s.ip.node_limit); }},

      {"ppo.reward", "shaped|literal",
       [](S& s, const std::string& v) {
         try {
           s.ppo.reward.mode = parse_reward_mode(v);
         } catch (const Error& e) {
           throw BadValue{e.what()};
         }
       },
       [](const S& s) { return std::string(to_string(s.ppo.reward.mode)); }},
      {"ppo.kappa", "eviction penalty (shaped reward)", [](S& s, const std::string& v) { s.ppo.reward.kappa = to_double(v); },
       [](const S& s) { return num(s.ppo.reward.kappa); }},
      {"ppo.cost_norm", "cost normalizer (0 = max link cost)",
       [](S& s, const std::string& v) { s.ppo.reward.cost_norm = to_double(v); },
       [](const S& s) { return num(s.ppo.reward.cost_norm); }},
      {"ppo.gamma", "discount factor", [](S& s, const std::string& v) { s.ppo.gamma = to_double(v); },
       [](const S& s) { return num(s.ppo.gamma); }},
      {"ppo.clip", "surrogate clip epsilon", [](S& s, const std::string& v) { s.ppo.clip = to_double(v); },
       [](const S& s) { return num(s.ppo.clip); }},
      {"ppo.gae_lambda", "GAE lambda", [](S& s, const std::string& v) { s.ppo.gae_lambda = to_double(v); },
       [](const S& s) { return num(s.ppo.gae_lambda); }},
      {"ppo.lr", "learning rate", [](S& s, const std::string& v) { s.ppo.learning_rate = to_double(v); },
       [](const S& s) { return num(s.ppo.learning_rate); }},
      {"ppo.epochs", "epochs per update", [](S& s, const std::string& v) { s.ppo.epochs = to_u64(v); },
       [](const S& s) { return std::to_string(s.ppo.epochs); }},
      {"ppo.minibatch", "minibatch size", [](S& s, const std::string& v) { s.ppo.minibatch = to_u64(v); },
       [](const S& s) { return std::to_string(s.ppo.minibatch); }},
      {"ppo.rollout", "slots collected per iteration", [](S& s, const std::string& v) { s.ppo.rollout = to_u64(v); },
       [](const S& s) { return std::to_string(s.ppo.rollout); }},
      {"ppo.iters", "training iterations (inline training when no checkpoint)",
       [](S& s, const std::string& v) { s.ppo.iterations = to_u64(v); },
       [](const S& s) { return std::to_string(s.ppo.iterations); }},
      {"ppo.entropy_coef", "entropy bonus coefficient",
       [](S& s, const std::string& v) { s.ppo.entropy_coef = to_double(v); },
       [](const S& s) { return num(s.ppo.entropy_coef); }},
      {"ppo.value_coef", "value loss coefficient", [](S& s, const std::string& v) { s.ppo.value_coef = to_double(v); },
       [](const S& s) { return num(s.ppo.value_coef); }},
      {"ppo.max_grad_norm", "global gradient norm clip (0 = off)",
       [](S& s, const std::string& v) { s.ppo.max_grad_norm = to_double(v); },
       [](const S& s) { return num(s.ppo.max_grad_norm); }},
      {"ppo.normalize_advantages", "per-batch advantage normalization",
       [](S& s, const std::string& v) { s.ppo.normalize_advantages = to_bool(v); },
       [](const S& s) { return std::string(s.ppo.normalize_advantages ? "true" : "false"); }},
      {"ppo.hidden", "hidden layer widths", [](S& s, const std::string& v) { s.ppo.hidden = to_sizes(v); },
       [](const S& s) { return fmt::format("{}", fmt::join(s.ppo.hidden, ",")); }},
      {"ppo.optimizer", "adam|sgd",
       [](S& s, const std::string& v) {
         if (v == "adam")
           s.ppo.optimizer = OptimizerKind::adam;
         else if (v == "sgd")
           s.ppo.optimizer = OptimizerKind::sgd;
         else
           throw BadValue{"expected adam|sgd"};
       },
       [](const S& s) { return std::string(s.ppo.optimizer == OptimizerKind::adam ? "adam" : "sgd"); }},
      {"ppo.max_requests", "observed request slots M",
       [](S& s, const std::string& v) { s.ppo.observation.max_requests = to_u64(v); },
       [](const S& s) { return std::to_string(s.ppo.observation.max_requests); }},
      {"ppo.cost_history", "observed past-cost window k",
       [](S& s, const std::string& v) { s.ppo.observation.cost_history = to_u64(v); },
       [](const S& s) { return std::to_string(s.ppo.observation.cost_history); }},
      {"ppo.lifetime_norm", "remaining-lifetime normalizer",
       [](S& s, const std::string& v) { s.ppo.observation.lifetime_norm = to_double(v); },
       [](const S& s) { return num(s.ppo.observation.lifetime_norm); }},
      {"ppo.seed", "policy init / sampling seed", [](S& s, const std::string& v) { s.ppo.seed = to_u64(v); },
       [](const S& s) { return std::to_string(s.ppo.seed); }},
      {"ppo.ckpt", "checkpoint to load for evaluation", [](S& s, const std::string& v) { s.ppo_checkpoint = v; },
       [](const S& s) { return s.ppo_checkpoint.value_or(""); }},
      {"ppo.deterministic", "evaluate with p >= 0.5 instead of sampling",
       [](S& s, const std::string& v) { s.ppo_deterministic = to_bool(v); },
       [](const S& s) { return std::string(s.ppo_deterministic ? "true" : "false"); }},
      {"ppo.train_lambda", "arrival rate for inline training (0 = middle of sweep)",
       [](S& s, const std::string& v) { s.ppo_train_lambda = to_double(v); },
       [](const S& s) { return num(s.ppo_train_lambda); }},
      {"ppo.train_horizon", "training episode length (0 = experiment horizon)",
       [](S& s, const std::string& v) { s.ppo_train_horizon = static_cast<Slot>(to_u64(v)); },
       [](const S& s) { return std::to_string(s.ppo_train_horizon); }},

      {"experiment.lambdas", "arrival-rate sweep", [](S& s, const std::string& v) { s.lambda_sweep = to_doubles(v); },
       [](const S& s) { return fmt::format("{}", fmt::join(s.lambda_sweep, ",")); }},
      {"experiment.replications", "seeds per (solver, lambda)",
       [](S& s, const std::string& v) { s.replications = to_u64(v); },
       [](const S& s) { return std::to_string(s.replications); }},
      {"experiment.solvers", "solvers to compare", [](S& s, const std::string& v) { s.solvers = split_list(v); },
       [](const S& s) { return fmt::format("{}", fmt::join(s.solvers, ",")); }},
      {"experiment.horizon", "simulation length in slots",
       [](S& s, const std::string& v) { s.sim.horizon = static_cast<Slot>(to_u64(v)); },
       [](const S& s) { return std::to_string(s.sim.horizon); }},
      {"experiment.seed", "base seed for replications", [](S& s, const std::string& v) { s.seed = to_u64(v); },
       [](const S& s) { return std::to_string(s.seed); }},
      {"experiment.threads", "worker threads (0 = hardware)",
       [](S& s, const std::string& v) { s.threads = to_u64(v); },
       [](const S& s) { return std::to_string(s.threads); }},
      {"experiment.out", "CSV output path", [](S& s, const std::string& v) { s.output = v; },
       [](const S& s) { return s.output; }},
  };
  return keys;
}

const std::set<std::string>& sections() {
  static const std::set<std::string> s{"topology", "demand", "solver", "ppo", "experiment"};
  return s;
}

}  // namespace

ExperimentSpec parse_config_text(std::string_view text, std::string_view source) {
  ExperimentSpec spec;
  std::istringstream in{std::string(text)};
  std::string line, section;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  auto fail = [&](const std::string& msg) {
    return Error(ErrorKind::config, fmt::format("{}:{}: {}", source, line_no, msg));
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    std::string body = trim(comment == std::string::npos ? line : line.substr(0, comment));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw fail("unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      if (!sections().contains(section)) throw fail(fmt::format("unknown section `{}`", section));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw fail("expected `key = value`");
    const std::string name = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (name.empty()) throw fail("empty key");
    const std::string key = section.empty() ? name : section + "." + name;
    const auto& keys = registry();
    auto it = std::find_if(keys.begin(), keys.end(), [&](const KeyDef& k) { return k.key == key; });
    if (it == keys.end()) throw fail(fmt::format("unknown key `{}`", key));
    if (!seen.insert(key).second) throw fail(fmt::format("duplicate key `{}`", key));
    try {
      it->set(spec, value);
    } catch (const BadValue& e) {
      throw fail(fmt::format("{}: {}", key, e.message));
    }
  }
  try {
    validate(spec);
  } catch (const Error& e) {
    throw Error(ErrorKind::config, fmt::format("{}: {}", source, e.what()));
  }
  return spec;
}

ExperimentSpec parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, fmt::format("cannot open config file {}", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string config_reference() {
  const ExperimentSpec defaults;
  std::string out;
  std::string current;
  for (const auto& k : registry()) {
    const auto dot = k.key.find('.');
    const std::string section = k.key.substr(0, dot);
    if (section != current) {
      out += fmt::format("[{}]\n", section);
      current = section;
    }
    out += fmt::format("  {:<24} = {:<14} # {}\n", k.key.substr(dot + 1), k.show(defaults), k.doc);
  }
  return out;
}

void validate(const ExperimentSpec& spec) {
  if (spec.replications < 1) throw Error(ErrorKind::config, "experiment.replications must be >= 1");
  if (spec.lambda_sweep.empty()) throw Error(ErrorKind::config, "experiment.lambdas must not be empty");
  for (double l : spec.lambda_sweep)
    if (l < 0.0) throw Error(ErrorKind::config, "experiment.lambdas must be non-negative");
  if (spec.demand.lambda < 0.0) throw Error(ErrorKind::config, "demand.lambda must be non-negative");
  if (spec.sim.horizon < 1) throw Error(ErrorKind::config, "experiment.horizon must be >= 1");
  if (spec.sim.limits.max_paths < 1) throw Error(ErrorKind::config, "solver.max_paths must be >= 1");
  for (const auto& s : spec.solvers)
    if (s != "greedy" && s != "ip" && s != "ppo") throw Error(ErrorKind::config, fmt::format("unknown solver `{}`", s));
  if (spec.solver != "greedy" && spec.solver != "ip" && spec.solver != "ppo")
    throw Error(ErrorKind::config, fmt::format("solver.name: unknown solver `{}`", spec.solver));
  validate(spec.ppo);
}

}  // namespace slicesim
