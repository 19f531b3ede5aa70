#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cas4dl {

enum class Activation { ReLU, Tanh, ELU };

std::string to_string(Activation activation);
Activation parse_activation(std::string_view name);

/// Fully connected L x N network: layer widths d, N (L+1 times), J. There are
/// L+1 activated hidden layers followed by a bias-free linear output map.
struct Architecture {
  int input_dim = 1;
  int depth = 1;  // L
  int width = 1;  // N
  int output_dim = 1;
  Activation activation = Activation::Tanh;

  int hidden_layers() const { return depth + 1; }
  void validate() const;
  bool operator==(const Architecture&) const = default;
};

/// Raised when a forward pass, loss or gradient becomes non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long epoch) : std::runtime_error(what), epoch_(epoch) {}
  long epoch() const { return epoch_; }

 private:
  long epoch_;
};

/// Weights W_0..W_{L+1} (W_l is N_{l+1} x N_l) and biases b_0..b_L. The output
/// map has no bias. The same layout doubles as the gradient type.
template <typename Scalar>
struct NetworkParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Architecture arch;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static NetworkParams zeros(const Architecture& arch);

  Eigen::Index parameter_count() const;
  bool all_finite() const;

  /// Flattened in layer order: W_0, b_0, W_1, b_1, ..., W_L, b_L, W_{L+1}
  /// (matrices column-major).
  std::vector<Scalar> flatten() const;
  void assign_flat(std::span<const Scalar> flat);

  template <typename Other>
  NetworkParams<Other> cast() const {
    NetworkParams<Other> out;
    out.arch = arch;
    for (const auto& w : weights) out.weights.push_back(w.template cast<Other>());
    for (const auto& b : biases) out.biases.push_back(b.template cast<Other>());
    return out;
  }

  /// Applies f(this_array, other_array) to matching arrays.
  template <typename F>
  void zip(const NetworkParams& other, F&& f) {
    for (std::size_t i = 0; i < weights.size(); ++i) f(weights[i], other.weights[i]);
    for (std::size_t i = 0; i < biases.size(); ++i) f(biases[i], other.biases[i]);
  }

  bool operator==(const NetworkParams&) const;
};

/// Training set in double precision; rows of `points` and `targets` are samples.
struct TrainingData {
  Eigen::MatrixXd points;   // m x d
  Eigen::MatrixXd targets;  // m x J
  Eigen::VectorXd weights;  // m

  Eigen::Index size() const { return points.rows(); }
  void validate(const Architecture& arch) const;
};

/// Entries i.i.d. normal with mean 0 and standard deviation 0.1.
template <typename Scalar>
NetworkParams<Scalar> init_params(const Architecture& arch, std::uint64_t seed);

/// Network outputs for each row of `points` (m x d); result m x J.
template <typename Scalar>
Eigen::MatrixXd forward(const NetworkParams<Scalar>& params, const Eigen::MatrixXd& points);

/// Activated output of the last hidden layer for each row; result m x N.
/// forward(y) = W_{L+1} * penultimate_features(y).
template <typename Scalar>
Eigen::MatrixXd penultimate_features(const NetworkParams<Scalar>& params,
                                     const Eigen::MatrixXd& points);

/// (1/m) sum_i w_i sum_k (Psi(y_i)_k - t_{ik})^2.
template <typename Scalar>
double weighted_loss(const NetworkParams<Scalar>& params, const TrainingData& data);

template <typename Scalar>
struct LossAndGradient {
  double loss = 0.0;
  NetworkParams<Scalar> gradient;
};

/// Exact gradient of weighted_loss by reverse accumulation. The ReLU
/// derivative at 0 is 0.
template <typename Scalar>
LossAndGradient<Scalar> gradient(const NetworkParams<Scalar>& params, const TrainingData& data);

template <typename Scalar>
struct AdamState {
  NetworkParams<Scalar> first_moment;
  NetworkParams<Scalar> second_moment;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState fresh(const Architecture& arch, double beta1 = 0.9, double beta2 = 0.999,
                         double epsilon = 1e-8);
  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update of `params` in place.
template <typename Scalar>
void adam_step(AdamState<Scalar>& state, NetworkParams<Scalar>& params,
               const NetworkParams<Scalar>& grads, double learning_rate);

/// lr(e) = initial * decay_rate^e, e counted in optimizer steps.
struct LearningRateSchedule {
  double initial = 1e-3;
  double decay_rate = 1.0;

  double at(long step) const;

  /// Rate that shrinks the learning rate by `total_factor` over `total_steps`.
  static LearningRateSchedule with_total_decay(double initial, double total_factor,
                                               long total_steps);
};

struct TrainReport {
  std::vector<double> losses;  // loss before each step
  double final_loss = 0.0;     // loss after the last step
};

/// Full-batch training: one gradient/Adam step per epoch. Throws
/// DivergenceError carrying the global step index on a non-finite loss.
template <typename Scalar>
TrainReport train(NetworkParams<Scalar>& params, AdamState<Scalar>& state, const TrainingData& data,
                  long epochs, const LearningRateSchedule& schedule);

}  // namespace cas4dl
