#include "cas4dl/neural_net.hpp"

#include <cmath>

#include "cas4dl/random.hpp"

namespace cas4dl {

std::string to_string(Activation activation) {
  switch (activation) {
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::ELU: return "elu";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu" || name == "ReLU") return Activation::ReLU;
  if (name == "tanh") return Activation::Tanh;
  if (name == "elu" || name == "ELU") return Activation::ELU;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

void Architecture::validate() const {
  if (input_dim < 1) throw std::invalid_argument("input dimension must be >= 1");
  if (depth < 0) throw std::invalid_argument("depth must be >= 0");
  if (width < 1) throw std::invalid_argument("width must be >= 1");
  if (output_dim < 1) throw std::invalid_argument("output dimension must be >= 1");
}

template <typename Scalar>
NetworkParams<Scalar> NetworkParams<Scalar>::zeros(const Architecture& arch) {
  arch.validate();
  NetworkParams p;
  p.arch = arch;
  p.weights.push_back(Matrix::Zero(arch.width, arch.input_dim));
  p.biases.push_back(Vector::Zero(arch.width));
  for (int l = 1; l <= arch.depth; ++l) {
    p.weights.push_back(Matrix::Zero(arch.width, arch.width));
    p.biases.push_back(Vector::Zero(arch.width));
  }
  p.weights.push_back(Matrix::Zero(arch.output_dim, arch.width));
  return p;
}

template <typename Scalar>
Eigen::Index NetworkParams<Scalar>::parameter_count() const {
  Eigen::Index count = 0;
  for (const auto& w : weights) count += w.size();
  for (const auto& b : biases) count += b.size();
  return count;
}

template <typename Scalar>
bool NetworkParams<Scalar>::all_finite() const {
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return true;
}

template <typename Scalar>
std::vector<Scalar> NetworkParams<Scalar>::flatten() const {
  std::vector<Scalar> flat;
  flat.reserve(static_cast<std::size_t>(parameter_count()));
  auto push = [&](const auto& a) { flat.insert(flat.end(), a.data(), a.data() + a.size()); };
  for (std::size_t l = 0; l < weights.size(); ++l) {
    push(weights[l]);
    if (l < biases.size()) push(biases[l]);
  }
  return flat;
}

template <typename Scalar>
void NetworkParams<Scalar>::assign_flat(std::span<const Scalar> flat) {
  if (static_cast<Eigen::Index>(flat.size()) != parameter_count())
    throw std::invalid_argument("flat parameter vector has the wrong length");
  std::size_t offset = 0;
  auto pull = [&](auto& a) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), a.size(), a.data());
    offset += static_cast<std::size_t>(a.size());
  };
  for (std::size_t l = 0; l < weights.size(); ++l) {
    pull(weights[l]);
    if (l < biases.size()) pull(biases[l]);
  }
}

template <typename Scalar>
bool NetworkParams<Scalar>::operator==(const NetworkParams& other) const {
  if (!(arch == other.arch) || weights.size() != other.weights.size() ||
      biases.size() != other.biases.size())
    return false;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] != other.weights[i]) return false;
  for (std::size_t i = 0; i < biases.size(); ++i)
    if (biases[i] != other.biases[i]) return false;
  return true;
}

void TrainingData::validate(const Architecture& arch) const {
  if (points.rows() != targets.rows() || points.rows() != weights.size())
    throw std::invalid_argument("training points, targets and weights differ in length");
  if (points.cols() != arch.input_dim) throw std::invalid_argument("training point dimension mismatch");
  if (targets.cols() != arch.output_dim) throw std::invalid_argument("training target dimension mismatch");
  if (points.rows() > 0 && !(weights.minCoeff() > 0.0))
    throw std::invalid_argument("training weights must be positive");
}

template <typename Scalar>
NetworkParams<Scalar> init_params(const Architecture& arch, std::uint64_t seed) {
  auto params = NetworkParams<double>::zeros(arch);
  RandomStream stream(seed);
  auto fill = [&](auto& a) {
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = stream.normal(0.0, 0.1);
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    fill(params.weights[l]);
    if (l < params.biases.size()) fill(params.biases[l]);
  }
  return params.template cast<Scalar>();
}

namespace {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
Mat<Scalar> activate(const Mat<Scalar>& z, Activation activation) {
  switch (activation) {
    case Activation::ReLU: return z.cwiseMax(Scalar(0));
    case Activation::Tanh: return z.array().tanh().matrix();
    case Activation::ELU:
      return z.unaryExpr([](Scalar x) { return x > Scalar(0) ? x : std::expm1(x); });
  }
  return z;
}

template <typename Scalar>
Mat<Scalar> activation_derivative(const Mat<Scalar>& z, const Mat<Scalar>& a, Activation activation) {
  switch (activation) {
    case Activation::ReLU:
      return z.unaryExpr([](Scalar x) { return x > Scalar(0) ? Scalar(1) : Scalar(0); });
    case Activation::Tanh: return (Scalar(1) - a.array().square()).matrix();
    case Activation::ELU:
      return z.unaryExpr([](Scalar x) { return x > Scalar(0) ? Scalar(1) : std::exp(x); });
  }
  return z;
}

/// Pre- and post-activations of every hidden layer, inputs stored column-wise.
template <typename Scalar>
struct Pass {
  Mat<Scalar> input;                      // d x m
  std::vector<Mat<Scalar>> pre;           // N x m each
  std::vector<Mat<Scalar>> post;          // N x m each
  Mat<Scalar> output;                     // J x m
};

template <typename Scalar>
Pass<Scalar> run_forward(const NetworkParams<Scalar>& params, const Eigen::MatrixXd& points,
                         bool keep_pre) {
  if (points.cols() != params.arch.input_dim)
    throw std::invalid_argument("input point dimension mismatch");
  Pass<Scalar> pass;
  pass.input = points.transpose().template cast<Scalar>();
  const Mat<Scalar>* current = &pass.input;
  const int hidden = params.arch.hidden_layers();
  pass.post.reserve(static_cast<std::size_t>(hidden));
  if (keep_pre) pass.pre.reserve(static_cast<std::size_t>(hidden));
  for (int l = 0; l < hidden; ++l) {
    Mat<Scalar> z = params.weights[static_cast<std::size_t>(l)] * (*current);
    z.colwise() += params.biases[static_cast<std::size_t>(l)];
    pass.post.push_back(activate<Scalar>(z, params.arch.activation));
    if (keep_pre) pass.pre.push_back(std::move(z));
    current = &pass.post.back();
  }
  pass.output = params.weights.back() * (*current);
  if (!pass.output.allFinite()) throw DivergenceError("non-finite network output", -1);
  return pass;
}

}  // namespace

template <typename Scalar>
Eigen::MatrixXd forward(const NetworkParams<Scalar>& params, const Eigen::MatrixXd& points) {
  return run_forward(params, points, false).output.transpose().template cast<double>();
}

template <typename Scalar>
Eigen::MatrixXd penultimate_features(const NetworkParams<Scalar>& params,
                                     const Eigen::MatrixXd& points) {
  return run_forward(params, points, false).post.back().transpose().template cast<double>();
}

template <typename Scalar>
double weighted_loss(const NetworkParams<Scalar>& params, const TrainingData& data) {
  data.validate(params.arch);
  const Eigen::Index m = data.size();
  if (m == 0) return 0.0;
  const Mat<Scalar> out = run_forward(params, data.points, false).output;
  const Mat<Scalar> residual = out - data.targets.transpose().template cast<Scalar>();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> per_sample = residual.colwise().squaredNorm();
  const Scalar total = per_sample.dot(data.weights.template cast<Scalar>());
  return static_cast<double>(total) / static_cast<double>(m);
}

template <typename Scalar>
LossAndGradient<Scalar> gradient(const NetworkParams<Scalar>& params, const TrainingData& data) {
  data.validate(params.arch);
  LossAndGradient<Scalar> result{0.0, NetworkParams<Scalar>::zeros(params.arch)};
  const Eigen::Index m = data.size();
  if (m == 0) return result;

  const Pass<Scalar> pass = run_forward(params, data.points, true);
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> w =
      data.weights.transpose().template cast<Scalar>();
  const Mat<Scalar> residual = pass.output - data.targets.transpose().template cast<Scalar>();
  result.loss = static_cast<double>(residual.colwise().squaredNorm().dot(w)) / static_cast<double>(m);

  // d loss / d output, J x m.
  Mat<Scalar> delta =
      (residual.array().rowwise() * w.array()).matrix() * (Scalar(2) / static_cast<Scalar>(m));

  auto& grad = result.gradient;
  const int hidden = params.arch.hidden_layers();
  grad.weights.back().noalias() = delta * pass.post.back().transpose();
  Mat<Scalar> upstream = params.weights.back().transpose() * delta;
  for (int l = hidden - 1; l >= 0; --l) {
    const auto ul = static_cast<std::size_t>(l);
    delta = upstream.cwiseProduct(
        activation_derivative<Scalar>(pass.pre[ul], pass.post[ul], params.arch.activation));
    const Mat<Scalar>& below = l == 0 ? pass.input : pass.post[ul - 1];
    grad.weights[ul].noalias() = delta * below.transpose();
    grad.biases[ul] = delta.rowwise().sum();
    if (l > 0) upstream.noalias() = params.weights[ul].transpose() * delta;
  }
  if (!grad.all_finite()) throw DivergenceError("non-finite gradient", -1);
  return result;
}

template <typename Scalar>
AdamState<Scalar> AdamState<Scalar>::fresh(const Architecture& arch, double beta1, double beta2,
                                           double epsilon) {
  AdamState state;
  state.first_moment = NetworkParams<Scalar>::zeros(arch);
  state.second_moment = NetworkParams<Scalar>::zeros(arch);
  state.beta1 = beta1;
  state.beta2 = beta2;
  state.epsilon = epsilon;
  return state;
}

template <typename Scalar>
void adam_step(AdamState<Scalar>& state, NetworkParams<Scalar>& params,
               const NetworkParams<Scalar>& grads, double learning_rate) {
  if (!(params.arch == grads.arch) || !(params.arch == state.first_moment.arch))
    throw std::invalid_argument("adam_step: shape mismatch");
  if (!grads.all_finite()) throw DivergenceError("non-finite gradient in optimizer step", state.step);

  ++state.step;
  const Scalar b1 = static_cast<Scalar>(state.beta1);
  const Scalar b2 = static_cast<Scalar>(state.beta2);
  const auto t = static_cast<double>(state.step);
  const Scalar correction1 = static_cast<Scalar>(1.0 - std::pow(state.beta1, t));
  const Scalar correction2 = static_cast<Scalar>(1.0 - std::pow(state.beta2, t));
  const Scalar lr = static_cast<Scalar>(learning_rate);
  const Scalar eps = static_cast<Scalar>(state.epsilon);

  auto update = [&](auto& theta, auto& m, auto& v, const auto& g) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
    theta.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < params.weights.size(); ++i)
    update(params.weights[i], state.first_moment.weights[i], state.second_moment.weights[i],
           grads.weights[i]);
  for (std::size_t i = 0; i < params.biases.size(); ++i)
    update(params.biases[i], state.first_moment.biases[i], state.second_moment.biases[i],
           grads.biases[i]);
}

double LearningRateSchedule::at(long step) const {
  return initial * std::pow(decay_rate, static_cast<double>(step));
}

LearningRateSchedule LearningRateSchedule::with_total_decay(double initial, double total_factor,
                                                            long total_steps) {
  if (!(initial > 0.0)) throw std::invalid_argument("initial learning rate must be positive");
  if (!(total_factor > 0.0)) throw std::invalid_argument("learning-rate decay factor must be positive");
  LearningRateSchedule schedule;
  schedule.initial = initial;
  schedule.decay_rate =
      total_steps > 0 ? std::pow(total_factor, 1.0 / static_cast<double>(total_steps)) : 1.0;
  return schedule;
}

template <typename Scalar>
TrainReport train(NetworkParams<Scalar>& params, AdamState<Scalar>& state, const TrainingData& data,
                  long epochs, const LearningRateSchedule& schedule) {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  TrainReport report;
  report.losses.reserve(static_cast<std::size_t>(epochs));
  for (long e = 0; e < epochs; ++e) {
    LossAndGradient<Scalar> lg;
    try {
      lg = gradient(params, data);
    } catch (const DivergenceError& err) {
      throw DivergenceError(err.what(), state.step);
    }
    if (!std::isfinite(lg.loss)) throw DivergenceError("non-finite training loss", state.step);
    report.losses.push_back(lg.loss);
    adam_step(state, params, lg.gradient, schedule.at(state.step));
  }
  try {
    report.final_loss = weighted_loss(params, data);
  } catch (const DivergenceError& err) {
    throw DivergenceError(err.what(), state.step);
  }
  if (!std::isfinite(report.final_loss)) throw DivergenceError("non-finite training loss", state.step);
  return report;
}

#define CAS4DL_INSTANTIATE(Scalar)                                                               \
  template struct NetworkParams<Scalar>;                                                         \
  template struct AdamState<Scalar>;                                                             \
  template NetworkParams<Scalar> init_params<Scalar>(const Architecture&, std::uint64_t);       \
  template Eigen::MatrixXd forward<Scalar>(const NetworkParams<Scalar>&, const Eigen::MatrixXd&); \
  template Eigen::MatrixXd penultimate_features<Scalar>(const NetworkParams<Scalar>&,            \
                                                        const Eigen::MatrixXd&);                 \
  template double weighted_loss<Scalar>(const NetworkParams<Scalar>&, const TrainingData&);      \
  template LossAndGradient<Scalar> gradient<Scalar>(const NetworkParams<Scalar>&,                \
                                                    const TrainingData&);                        \
  template void adam_step<Scalar>(AdamState<Scalar>&, NetworkParams<Scalar>&,                    \
                                  const NetworkParams<Scalar>&, double);                         \
  template TrainReport train<Scalar>(NetworkParams<Scalar>&, AdamState<Scalar>&,                 \
                                     const TrainingData&, long, const LearningRateSchedule&);

CAS4DL_INSTANTIATE(float)
CAS4DL_INSTANTIATE(double)

#undef CAS4DL_INSTANTIATE

}  // namespace cas4dl
