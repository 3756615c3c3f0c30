#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slicesim/demand.hpp"
#include "slicesim/exact.hpp"
#include "slicesim/greedy.hpp"
#include "slicesim/ppo.hpp"
#include "slicesim/sim.hpp"
#include "slicesim/topology.hpp"

namespace slicesim {

struct ExperimentSpec {
  RandomGraphSpec topology{};
  std::optional<std::string> graph_file;

  DemandConfig demand{};
  std::optional<std::string> trace_file;

  SimConfig sim{};
  std::string solver = "greedy";
  GreedyConfig greedy{};
  IpConfig ip{};

  PpoConfig ppo{};
  std::optional<std::string> ppo_checkpoint;
  bool ppo_deterministic = true;
  double ppo_train_lambda = 0.0;  // 0 = middle of the sweep
  Slot ppo_train_horizon = 0;     // 0 = experiment horizon

  std::vector<double> lambda_sweep{0.5, 1.0, 2.0, 3.0, 4.0};
  std::size_t replications = 20;
  std::vector<std::string> solvers{"greedy", "ip"};
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::string output;
};

/// INI-style text: `[section]` headers (topology, demand, solver, ppo,
/// experiment) and `key = value` lines; `#`/`;` start comments. Keys outside
/// a section are written `section.key`. Unknown keys are errors.
ExperimentSpec parse_config_text(std::string_view text, std::string_view source = "<config>");
ExperimentSpec parse_config(const std::string& path);

/// Documentation of every key with its default, for --help.
std::string config_reference();

void validate(const ExperimentSpec& spec);

}  // namespace slicesim
