#include "slicesim/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "slicesim/error.hpp"
#include "slicesim/exact.hpp"
#include "slicesim/greedy.hpp"
#include "slicesim/random.hpp"

namespace slicesim {

namespace {

constexpr std::uint64_t kGraphStream = 0x67726170ULL;
constexpr std::uint64_t kDemandStream = 0x64656d61ULL;
constexpr std::uint64_t kTrainStream = 0x74726169ULL;
constexpr std::uint64_t kEvalStream = 0x6576616cULL;

std::string read_file(const std::string& path, ErrorKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(kind, fmt::format("cannot open {}", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Stats {
  double mean = 0.0;
  double se = 0.0;
};

Stats stats(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
  }
  return s;
}

struct Job {
  std::string solver;
  std::size_t lambda_index = 0;
  std::size_t replication = 0;
};

ResultRow run_job(const ExperimentSpec& spec, const Job& job, const PolicyState* policy) {
  const double lambda = spec.lambda_sweep[job.lambda_index];
  const std::uint64_t seed = replication_seed(spec, job.replication);
  const auto start = std::chrono::steady_clock::now();

  NetworkGraph graph = experiment_graph(spec, seed);
  ArrivalSource arrivals = experiment_arrivals(spec, graph, lambda, derive_seed(seed, {job.lambda_index}));
  auto solver = make_solver(spec, job.solver, policy, derive_seed(seed, {kEvalStream, job.lambda_index}));
  SimConfig sim = spec.sim;
  sim.record_events = false;
  Simulation simulation(std::move(graph), sim, std::move(arrivals));
  const RunSummary summary = run_simulation(simulation, *solver).summary;

  const auto stop = std::chrono::steady_clock::now();
  ResultRow row;
  row.kind = "run";
  row.solver = job.solver;
  row.lambda = lambda;
  row.replication = job.replication;
  row.seed = seed;
  row.generated = summary.generated;
  row.served = summary.served;
  row.evicted = summary.evicted;
  row.avg_cost_per_request = summary.avg_cost_per_request;
  row.sla_violation_rate = summary.sla_violation_rate;
  row.mean_fairness = summary.mean_fairness;
  row.wall_time_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return row;
}

template <class T>
T parse_number(const std::string& field, std::size_t line) {
  T out{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw Error(ErrorKind::parse, fmt::format("csv line {}: bad number `{}`", line, field));
  return out;
}

}  // namespace

std::uint64_t replication_seed(const ExperimentSpec& spec, std::size_t replication) {
  return derive_seed(spec.seed, {static_cast<std::uint64_t>(replication)});
}

NetworkGraph experiment_graph(const ExperimentSpec& spec, std::uint64_t seed) {
  if (spec.graph_file) return NetworkGraph::load(*spec.graph_file);
  return generate_random_graph(spec.topology, derive_seed(seed, {kGraphStream}));
}

ArrivalSource experiment_arrivals(const ExperimentSpec& spec, const NetworkGraph& graph, double lambda,
                                  std::uint64_t seed) {
  if (spec.trace_file) {
    const std::string text = read_file(*spec.trace_file, ErrorKind::config);
    return trace_source(RequestTrace::parse(text, spec.demand.types, graph.node_count()));
  }
  DemandConfig demand = spec.demand;
  demand.lambda = lambda;
  demand.seed = derive_seed(seed, {kDemandStream});
  return poisson_source(ArrivalProcess(demand, graph.node_count()));
}

PolicyState train_policy(const ExperimentSpec& spec, double lambda, std::size_t iterations,
                         const IterationCallback& on_iteration) {
  EnvConfig env;
  env.topology = spec.topology;
  env.demand = spec.demand;
  env.demand.lambda = lambda;
  env.sim = spec.sim;
  env.sim.record_events = false;
  if (spec.ppo_train_horizon > 0) env.sim.horizon = spec.ppo_train_horizon;
  env.seed = derive_seed(spec.seed, {kTrainStream, spec.ppo.seed});
  if (spec.graph_file) {
    const NetworkGraph fixed = NetworkGraph::load(*spec.graph_file);
    env.graphs = [fixed](std::uint64_t) { return fixed; };
  }
  SlicingEnv environment(env, spec.ppo.observation, spec.ppo.reward);
  PolicyState policy(environment.observation_dim(), spec.ppo);
  train(environment, policy, iterations, on_iteration);
  return policy;
}

PolicyState experiment_policy(const ExperimentSpec& spec) {
  const NetworkGraph probe = experiment_graph(spec, replication_seed(spec, 0));
  const std::size_t dim = observation_size(probe.node_count(), probe.link_count(), spec.ppo.observation);
  if (spec.ppo_checkpoint)
    return load_checkpoint(*spec.ppo_checkpoint, spec.ppo, dim, spec.ppo.observation.max_requests);
  if (spec.ppo.iterations == 0)
    throw Error(ErrorKind::missing_checkpoint, "ppo solver needs ppo.ckpt or a positive ppo.iters training budget");
  double lambda = spec.ppo_train_lambda;
  if (lambda <= 0.0) lambda = spec.lambda_sweep[spec.lambda_sweep.size() / 2];
  return train_policy(spec, lambda, spec.ppo.iterations);
}

std::unique_ptr<Solver> make_solver(const ExperimentSpec& spec, std::string_view name, const PolicyState* policy,
                                    std::uint64_t seed) {
  if (name == "greedy") {
    GreedyConfig cfg = spec.greedy;
    cfg.max_paths = spec.sim.limits.max_paths;
    return std::make_unique<GreedySolver>(cfg);
  }
  if (name == "ip") {
    IpConfig cfg = spec.ip;
    cfg.max_paths = spec.sim.limits.max_paths;
    return std::make_unique<ExactSolver>(cfg);
  }
  if (name == "ppo") {
    if (!policy) throw Error(ErrorKind::missing_checkpoint, "ppo solver requires a trained policy");
    return std::make_unique<PpoSolver>(*policy, spec.ppo_deterministic, seed);
  }
  throw Error(ErrorKind::config, fmt::format("unknown solver `{}`", name));
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const std::optional<PolicyState>& policy) {
  validate(spec);
  std::optional<PolicyState> trained = policy;
  bool wants_ppo = false;
  for (const auto& s : spec.solvers) wants_ppo = wants_ppo || s == "ppo";
  if (wants_ppo && !trained) trained = experiment_policy(spec);

  std::vector<Job> jobs;
  for (const auto& s : spec.solvers)
    for (std::size_t li = 0; li < spec.lambda_sweep.size(); ++li)
      for (std::size_t r = 0; r < spec.replications; ++r) jobs.push_back({s, li, r});

  std::vector<ResultRow> rows(jobs.size());
  std::size_t workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        rows[i] = run_job(spec, jobs[i], trained ? &*trained : nullptr);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs.size());
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ResultRow> out = rows;
  const std::size_t per_group = spec.replications;
  for (std::size_t g = 0; g * per_group < rows.size(); ++g) {
    std::vector<double> cost, sla, fair;
    ResultRow summary;
    summary.kind = "summary";
    summary.solver = rows[g * per_group].solver;
    summary.lambda = rows[g * per_group].lambda;
    summary.replication = per_group;
    for (std::size_t r = 0; r < per_group; ++r) {
      const auto& row = rows[g * per_group + r];
      cost.push_back(row.avg_cost_per_request);
      sla.push_back(row.sla_violation_rate);
      fair.push_back(row.mean_fairness);
      summary.generated += row.generated;
      summary.served += row.served;
      summary.evicted += row.evicted;
      summary.wall_time_ms += row.wall_time_ms;
    }
    const Stats c = stats(cost), s = stats(sla), f = stats(fair);
    summary.avg_cost_per_request = c.mean;
    summary.avg_cost_se = c.se;
    summary.sla_violation_rate = s.mean;
    summary.sla_se = s.se;
    summary.mean_fairness = f.mean;
    summary.fairness_se = f.se;
    out.push_back(summary);
  }
  return out;
}

std::string csv_header() {
  return "kind,solver,lambda,replication,seed,generated,served,evicted,avg_cost_per_request,avg_cost_se,"
         "sla_violation_rate,sla_se,mean_fairness,fairness_se,wall_time_ms";
}

std::string write_csv(const std::vector<ResultRow>& rows) {
  std::string out = "schema=1\n" + csv_header() + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.kind, r.solver, r.lambda, r.replication,
                       r.seed, r.generated, r.served, r.evicted, r.avg_cost_per_request, r.avg_cost_se,
                       r.sla_violation_rate, r.sla_se, r.mean_fairness, r.fairness_se, r.wall_time_ms);
  }
  return out;
}

std::vector<ResultRow> parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line() || line != "schema=1") throw Error(ErrorKind::parse, "csv: missing `schema=1` header");
  if (!next_line() || line != csv_header()) throw Error(ErrorKind::parse, "csv: unexpected column header");
  std::vector<ResultRow> rows;
  while (next_line()) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 15) throw Error(ErrorKind::parse, fmt::format("csv line {}: expected 15 fields", line_no));
    ResultRow r;
    r.kind = f[0];
    r.solver = f[1];
    r.lambda = parse_number<double>(f[2], line_no);
    r.replication = parse_number<std::size_t>(f[3], line_no);
    r.seed = parse_number<std::uint64_t>(f[4], line_no);
    r.generated = parse_number<std::size_t>(f[5], line_no);
    r.served = parse_number<std::size_t>(f[6], line_no);
    r.evicted = parse_number<std::size_t>(f[7], line_no);
    r.avg_cost_per_request = parse_number<double>(f[8], line_no);
    r.avg_cost_se = parse_number<double>(f[9], line_no);
    r.sla_violation_rate = parse_number<double>(f[10], line_no);
    r.sla_se = parse_number<double>(f[11], line_no);
    r.mean_fairness = parse_number<double>(f[12], line_no);
    r.fairness_se = parse_number<double>(f[13], line_no);
    r.wall_time_ms = parse_number<double>(f[14], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string strip_wall_time(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line, out;
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    if (line.rfind("schema=", 0) == 0 || cut == std::string::npos)
      out += line;
    else
      out += line.substr(0, cut);
    out += '\n';
  }
  return out;
}

}  // namespace slicesim
