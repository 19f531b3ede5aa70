#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cas4dl/neural_net.hpp"
#include "cas4dl/test_functions.hpp"

namespace cas4dl {

enum class Method { CAS, MC };
enum class Precision { Single, Double };

std::string to_string(Method method);
Method parse_method(std::string_view name);
std::string to_string(Precision precision);
Precision parse_precision(std::string_view name);

/// Schema or value error in a configuration file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sample sizes used by the reference experiments.
inline const std::vector<std::size_t> kDefaultSchedule = {1000, 1400, 1900, 2300, 2800,
                                                          3200, 4100, 4600, 5000};

/// Everything needed to run (and re-run) an experiment suite.
struct ExperimentConfig {
  // [target]
  FunctionKind target = FunctionKind::F1;
  int dimension = 2;
  std::string grid_file;  // tabulated targets only
  std::string values_file;
  std::string test_grid_file;
  std::string test_values_file;
  double noise_std = 0.0;

  // [grid]
  Eigen::Index grid_size = 0;  // 0 selects default_grid_size(dimension)
  std::uint64_t grid_seed = 0;

  // [network]
  int depth = 5;
  int width = 50;
  int output_dim = 1;
  Activation activation = Activation::Tanh;

  // [training]
  long epochs_per_stage = 5000;
  double learning_rate = 1e-3;
  double lr_decay_factor = 0.1;  // total decay over all stages
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  Precision precision = Precision::Double;

  // [sampling]
  std::vector<std::size_t> schedule = kDefaultSchedule;
  double eps_tol = 1e-6;
  std::vector<Method> methods = {Method::CAS, Method::MC};

  // [experiment]
  int trials = 20;
  std::uint64_t seed = 0;
  Eigen::Index test_size = 20000;
  std::uint64_t test_seed = 1;
  int threads = 1;

  // [output]
  bool record_wall_time = false;
  bool checkpoints = false;

  Architecture architecture() const;
  Eigen::Index effective_grid_size() const;
  long total_epochs() const { return epochs_per_stage * static_cast<long>(schedule.size()); }
  bool is_tabulated() const { return target == FunctionKind::Tabulated; }
  bool has_method(Method method) const;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Parses key = value text with [sections]. Unknown sections or keys are
/// rejected. Relative file paths resolve against `base_dir`.
ExperimentConfig parse_config_string(const std::string& text,
                                     const std::filesystem::path& base_dir = {});
ExperimentConfig parse_config(const std::filesystem::path& file);

/// Normalized dump listing every key, parseable by parse_config_string.
std::string dump_config(const ExperimentConfig& config);

}  // namespace cas4dl
