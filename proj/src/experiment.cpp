#include "cas4dl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "cas4dl/checkpoint.hpp"
#include "cas4dl/random.hpp"
#include "cas4dl/subspace.hpp"
#include "cas4dl/tabulated.hpp"

namespace cas4dl {

namespace {

std::uint64_t method_id(Method method) { return method == Method::CAS ? 0 : 1; }

}  // namespace

Problem make_problem(const ExperimentConfig& config) {
  config.validate();
  if (config.is_tabulated()) {
    TabulatedOracle oracle = load_tabulated(config.grid_file, config.values_file, config.test_grid_file,
                                            config.test_values_file, config.dimension);
    if (oracle.output_dim() != config.output_dim)
      throw ConfigError("network.output_dim: table has " + std::to_string(oracle.output_dim()) +
                        " value columns");
    if (oracle.grid.size() < config.width)
      throw ConfigError("grid.size: K < N: the table holds fewer points than the network width");
    if (config.grid_size > 0 && config.grid_size != oracle.grid.size())
      throw ConfigError("grid.size: does not match the tabulated grid");
    return Problem{std::move(oracle.grid), std::move(oracle.values), std::move(*oracle.test)};
  }
  const TargetFunction target(config.target, config.dimension);
  Grid grid = build_grid(config.dimension, config.effective_grid_size(), config.grid_seed);
  Eigen::MatrixXd values = target.eval_rows(grid.points());
  TestSet test = make_test_set(target, config.test_size, config.test_seed);
  return Problem{std::move(grid), std::move(values), std::move(test)};
}

TrialSeeds trial_seeds(const ExperimentConfig& config, Method method, int trial) {
  TrialSeeds seeds;
  const auto t = static_cast<std::uint64_t>(trial);
  // Shared across methods so both start from the same network.
  seeds.init = derive_seed(config.seed, StreamPurpose::NetworkInit, t);
  for (std::size_t l = 1; l <= config.schedule.size(); ++l) {
    seeds.sampling.push_back(derive_seed(config.seed, StreamPurpose::Sampling, t, method_id(method), l));
    seeds.noise.push_back(derive_seed(config.seed, StreamPurpose::Noise, t, method_id(method), l));
  }
  return seeds;
}

namespace {

template <typename Scalar>
std::optional<SubspaceFactorization> factorize_network(const NetworkParams<Scalar>& params,
                                                       const Grid& grid, double eps_tol) {
  try {
    return factorize(DictionaryEvaluation(penultimate_features(params, grid.points())), eps_tol);
  } catch (const TrivialSubspaceError&) {
    return std::nullopt;
  }
}

template <typename Scalar>
TrialResult run_staged(const ExperimentConfig& config, const Problem& problem, Method method,
                       int trial) {
  TrialResult result;
  result.method = method;
  result.trial = trial;

  const Architecture arch = config.architecture();
  if (arch.output_dim != problem.output_dim())
    throw std::invalid_argument("network output dimension does not match the target");
  if (arch.input_dim != problem.grid.dimension())
    throw std::invalid_argument("network input dimension does not match the grid");

  const Grid& grid = problem.grid;
  const TrialSeeds seeds = trial_seeds(config, method, trial);
  NetworkParams<Scalar> params = init_params<Scalar>(arch, seeds.init);
  AdamState<Scalar> optimizer =
      AdamState<Scalar>::fresh(arch, config.adam_beta1, config.adam_beta2, config.adam_epsilon);
  const LearningRateSchedule lr = LearningRateSchedule::with_total_decay(
      config.learning_rate, config.lr_decay_factor, config.total_epochs());

  TrainingData data;
  data.points.resize(0, grid.dimension());
  data.targets.resize(0, problem.output_dim());
  data.weights.resize(0);

  std::optional<SubspaceFactorization> current;
  if (method == Method::CAS) current = factorize_network(params, grid, config.eps_tol);

  RandomStream stream;
  std::size_t previous = 0;
  int completed = 0;
  for (std::size_t l = 1; l <= config.schedule.size(); ++l) {
    const auto started = std::chrono::steady_clock::now();
    const int stage = static_cast<int>(l);
    const std::size_t fresh_count = config.schedule[l - 1] - previous;

    stream = RandomStream(seeds.sampling[l - 1]);
    // A rank-0 dictionary (all features zero) falls back to uniform draws.
    const SampleSet fresh = method == Method::CAS && current
                                ? cas_draw(*current, fresh_count, stream, stage)
                                : uniform_draw(grid.size(), fresh_count, stream, stage);
    result.samples.append(fresh);

    const auto old_m = data.size();
    const auto new_m = static_cast<Eigen::Index>(result.samples.size());
    data.points.conservativeResize(new_m, Eigen::NoChange);
    data.targets.conservativeResize(new_m, Eigen::NoChange);
    data.weights.conservativeResize(new_m);
    RandomStream noise(seeds.noise[l - 1]);
    for (Eigen::Index i = old_m; i < new_m; ++i) {
      const auto s = static_cast<std::size_t>(i);
      const Eigen::Index idx = result.samples.indices[s];
      data.points.row(i) = grid.points().row(idx);
      data.targets.row(i) = problem.grid_values.row(idx);
      if (config.noise_std > 0.0)
        for (Eigen::Index k = 0; k < data.targets.cols(); ++k)
          data.targets(i, k) += noise.normal(0.0, config.noise_std);
      data.weights(i) = result.samples.weights[s];
    }

    StageRecord record;
    record.method = method;
    record.trial = trial;
    record.stage = stage;
    record.m = config.schedule[l - 1];
    try {
      const TrainReport report = train(params, optimizer, data, config.epochs_per_stage, lr);
      record.final_loss = report.final_loss;
      current = factorize_network(params, grid, config.eps_tol);
      const Eigen::MatrixXd predicted = forward(params, problem.test.points);
      record.rel_error = relative_l2_error(predicted, problem.test.values);
    } catch (const DivergenceError& err) {
      result.failed = true;
      result.failure = "stage " + std::to_string(stage) + ": " + err.what() + " at step " +
                       std::to_string(err.epoch());
      break;
    }
    if (current) {
      record.n = current->numerical_dim;
      const double alpha = stability_constant(*current, result.samples, method == Method::MC);
      record.alpha_inv = alpha > 0.0 ? 1.0 / alpha : std::numeric_limits<double>::infinity();
    } else {
      record.n = 0;
      record.alpha_inv = std::numeric_limits<double>::infinity();
    }
    record.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.records.push_back(record);
    previous = config.schedule[l - 1];
    completed = stage;
  }

  if (current) result.final_christoffel = christoffel_values(*current);
  result.final_params = params.template cast<double>();
  if (config.checkpoints)
    result.checkpoint = serialize_checkpoint(Checkpoint<Scalar>{params, optimizer, stream, completed});
  return result;
}

TrialResult run_method(const ExperimentConfig& config, const Problem& problem, Method method,
                       int trial) {
  if (config.precision == Precision::Single)
    return run_staged<float>(config, problem, method, trial);
  return run_staged<double>(config, problem, method, trial);
}

}  // namespace

TrialResult run_cas4dl(const ExperimentConfig& config, const Problem& problem, int trial) {
  if (!config.has_method(Method::CAS)) throw std::invalid_argument("CAS is not in the method set");
  return run_method(config, problem, Method::CAS, trial);
}

TrialResult run_mc(const ExperimentConfig& config, const Problem& problem, int trial) {
  if (!config.has_method(Method::MC)) throw std::invalid_argument("MC is not in the method set");
  return run_method(config, problem, Method::MC, trial);
}

TrialResult run_trial(const ExperimentConfig& config, const Problem& problem, Method method,
                      int trial) {
  return method == Method::CAS ? run_cas4dl(config, problem, trial) : run_mc(config, problem, trial);
}

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  const auto count = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / (count - 1.0));
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return s;
}

std::vector<StageAggregate> aggregate(const std::vector<TrialResult>& trials) {
  std::map<std::pair<int, int>, std::vector<const StageRecord*>> groups;
  std::vector<Method> method_order;
  for (const TrialResult& t : trials) {
    if (std::find(method_order.begin(), method_order.end(), t.method) == method_order.end())
      method_order.push_back(t.method);
    if (t.failed) continue;
    const int rank = static_cast<int>(
        std::find(method_order.begin(), method_order.end(), t.method) - method_order.begin());
    for (const StageRecord& r : t.records) groups[{rank, r.stage}].push_back(&r);
  }
  std::vector<StageAggregate> out;
  for (const auto& [key, records] : groups) {
    StageAggregate a;
    a.method = method_order[static_cast<std::size_t>(key.first)];
    a.stage = key.second;
    a.m = records.front()->m;
    a.trials = static_cast<int>(records.size());
    std::vector<double> err, n, alpha;
    for (const StageRecord* r : records) {
      err.push_back(r->rel_error);
      n.push_back(static_cast<double>(r->n));
      alpha.push_back(r->alpha_inv);
    }
    a.rel_error = summarize(err);
    a.n = summarize(n);
    a.alpha_inv = summarize(alpha);
    out.push_back(a);
  }
  return out;
}

std::vector<StageRecord> SuiteResult::records() const {
  std::vector<StageRecord> out;
  for (const TrialResult& t : trials) out.insert(out.end(), t.records.begin(), t.records.end());
  return out;
}

SuiteResult run_suite(const ExperimentConfig& config, const Problem& problem) {
  config.validate();
  std::vector<std::pair<Method, int>> jobs;
  for (Method method : config.methods)
    for (int t = 0; t < config.trials; ++t) jobs.emplace_back(method, t);

  SuiteResult suite;
  suite.trials.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const auto [method, trial] = jobs[j];
      try {
        suite.trials[j] = run_method(config, problem, method, trial);
      } catch (const std::exception& err) {
        TrialResult failed;
        failed.method = method;
        failed.trial = trial;
        failed.failed = true;
        failed.failure = err.what();
        suite.trials[j] = std::move(failed);
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), jobs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  suite.aggregates = aggregate(suite.trials);
  return suite;
}

SuiteResult run_suite(const ExperimentConfig& config) {
  return run_suite(config, make_problem(config));
}

DictionaryTrace dictionary_trace(const NetworkParams<double>& params, const Grid& grid,
                                 std::size_t count, Eigen::Index line_points) {
  const Eigen::MatrixXd on_grid = penultimate_features(params, grid.points());
  const Eigen::MatrixXd& output_map = params.weights.back();  // J x N
  const Eigen::Index width = on_grid.cols();
  std::vector<double> score(static_cast<std::size_t>(width));
  for (Eigen::Index i = 0; i < width; ++i) {
    const double norm = std::sqrt(on_grid.col(i).squaredNorm() / static_cast<double>(on_grid.rows()));
    score[static_cast<std::size_t>(i)] = norm > 0.0 ? output_map.col(i).norm() / norm : 0.0;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(width));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
  });
  order.resize(std::min(count, order.size()));

  DictionaryTrace trace;
  trace.neurons = order;
  trace.line = Eigen::VectorXd::LinSpaced(line_points, -1.0, 1.0);
  Eigen::MatrixXd points(line_points, grid.dimension());
  for (Eigen::Index j = 0; j < grid.dimension(); ++j) points.col(j) = trace.line;
  const Eigen::MatrixXd on_line = penultimate_features(params, points);
  trace.values.resize(line_points, static_cast<Eigen::Index>(order.size()));
  for (std::size_t k = 0; k < order.size(); ++k)
    trace.values.col(static_cast<Eigen::Index>(k)) = on_line.col(order[k]);
  return trace;
}

Eigen::VectorXd weighted_least_squares(const SubspaceFactorization& fact, const SampleSet& samples,
                                       const Eigen::VectorXd& values) {
  const auto m = static_cast<Eigen::Index>(samples.size());
  if (values.size() != m) throw std::invalid_argument("one value per sample is required");
  const double root_k = std::sqrt(static_cast<double>(fact.grid_size));
  Eigen::MatrixXd design(m, fact.numerical_dim);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const double root_w = std::sqrt(samples.weights[s]);
    design.row(i) = root_w * root_k * fact.left_vectors.row(samples.indices[s]);
    rhs(i) = root_w * values(i);
  }
  return design.colPivHouseholderQr().solve(rhs);
}

}  // namespace cas4dl
