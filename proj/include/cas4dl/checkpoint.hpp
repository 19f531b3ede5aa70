#pragma once

#include <filesystem>
#include <string>

#include "cas4dl/config.hpp"
#include "cas4dl/neural_net.hpp"
#include "cas4dl/random.hpp"

namespace cas4dl {

/// Binary training checkpoint: architecture, parameters in layer order,
/// Adam moments and step counter, and the sampling stream position.
/// Numbers are stored in host byte order with the network's own scalar type.
template <typename Scalar>
struct Checkpoint {
  NetworkParams<Scalar> params;
  AdamState<Scalar> optimizer;
  RandomStream stream;
  int stage = 0;
};

template <typename Scalar>
std::string serialize_checkpoint(const Checkpoint<Scalar>& checkpoint);

/// Throws std::runtime_error on a malformed container or a scalar-type mismatch.
template <typename Scalar>
Checkpoint<Scalar> deserialize_checkpoint(const std::string& bytes);

template <typename Scalar>
void save_checkpoint(const std::filesystem::path& file, const Checkpoint<Scalar>& checkpoint);

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& file);

/// Header fields of a checkpoint, readable without knowing its precision.
struct CheckpointSummary {
  Architecture arch;
  Precision precision = Precision::Double;
  long step = 0;
  int stage = 0;
  Eigen::Index parameter_count = 0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double epsilon = 0.0;
  double parameter_norm = 0.0;
};

CheckpointSummary inspect_checkpoint(const std::filesystem::path& file);

}  // namespace cas4dl
