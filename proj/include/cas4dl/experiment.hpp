#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cas4dl/cas_sampler.hpp"
#include "cas4dl/config.hpp"
#include "cas4dl/metrics.hpp"
#include "cas4dl/neural_net.hpp"
#include "cas4dl/sample_grid.hpp"

namespace cas4dl {

/// Metrics of one (method, trial, stage) after training.
struct StageRecord {
  Method method = Method::CAS;
  int trial = 0;
  int stage = 0;        // 1-based
  std::size_t m = 0;    // cumulative samples
  Eigen::Index n = 0;   // numerical dimension of the trained network's dictionary
  double rel_error = 0.0;
  double alpha_inv = 0.0;
  double final_loss = 0.0;
  double wall_time_s = 0.0;
};

/// Resolved training problem: grid, target values on it and the test set.
struct Problem {
  Grid grid;
  Eigen::MatrixXd grid_values;  // K x J
  TestSet test;

  int output_dim() const { return static_cast<int>(grid_values.cols()); }
};

/// Builds the grid and test set from the config (or loads the tabulated oracle).
Problem make_problem(const ExperimentConfig& config);

struct TrialResult {
  Method method = Method::CAS;
  int trial = 0;
  std::vector<StageRecord> records;
  SampleSet samples;  // cumulative, in draw order
  bool failed = false;
  std::string failure;
  Eigen::VectorXd final_christoffel;  // over the grid, from the last trained network
  NetworkParams<double> final_params;
  std::string checkpoint;  // serialized, when enabled in the config
};

/// Seeds of one trial, derived from the base seed.
struct TrialSeeds {
  std::uint64_t init = 0;
  std::vector<std::uint64_t> sampling;  // per stage
  std::vector<std::uint64_t> noise;     // per stage
};

TrialSeeds trial_seeds(const ExperimentConfig& config, Method method, int trial);

/// Adaptive sampling with network retraining: at each stage the penultimate
/// layer of the current network is the dictionary from which new samples are
/// drawn, then the network is warm-start trained on all samples so far.
TrialResult run_cas4dl(const ExperimentConfig& config, const Problem& problem, int trial);

/// Same staging with uniform draws from the grid and unit weights.
TrialResult run_mc(const ExperimentConfig& config, const Problem& problem, int trial);

TrialResult run_trial(const ExperimentConfig& config, const Problem& problem, Method method,
                      int trial);

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one value
};

Summary summarize(std::vector<double> values);

struct StageAggregate {
  Method method = Method::CAS;
  int stage = 0;
  std::size_t m = 0;
  int trials = 0;
  Summary rel_error;
  Summary n;
  Summary alpha_inv;
};

/// Per-(method, stage) statistics over trials that completed.
std::vector<StageAggregate> aggregate(const std::vector<TrialResult>& trials);

struct SuiteResult {
  std::vector<TrialResult> trials;  // ordered by (method, trial)
  std::vector<StageAggregate> aggregates;

  std::vector<StageRecord> records() const;
};

/// Runs every (method, trial) pair, up to config.threads at a time. The result
/// does not depend on the thread count.
SuiteResult run_suite(const ExperimentConfig& config, const Problem& problem);
SuiteResult run_suite(const ExperimentConfig& config);

/// First dictionary functions of a trained network along the diagonal
/// t * (1,...,1), ranked by |c_i| / ||psi_i||_{L2(tau)} in decreasing order.
struct DictionaryTrace {
  Eigen::VectorXd line;                 // t values
  std::vector<Eigen::Index> neurons;    // ranked neuron indices
  Eigen::MatrixXd values;               // line.size() x neurons.size()
};

DictionaryTrace dictionary_trace(const NetworkParams<double>& params, const Grid& grid,
                                 std::size_t count = 6, Eigen::Index line_points = 201);

/// Weighted least-squares coefficients in the orthonormal basis of `fact`
/// fitted to `values` (one per sample) at the sample points.
Eigen::VectorXd weighted_least_squares(const SubspaceFactorization& fact, const SampleSet& samples,
                                       const Eigen::VectorXd& values);

}  // namespace cas4dl
