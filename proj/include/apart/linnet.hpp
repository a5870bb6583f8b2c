#pragma once

#include <span>
#include <vector>

#include "apart/rng.hpp"

namespace apart {

// Probabilities entering a log are clamped to [kProbClamp, 1 - kProbClamp].
inline constexpr double kProbClamp = 1e-7;

double clamp_prob(double p);

// Single fully-connected layer y = W x + b.
//
// Weights are stored column-major (all outputs of input i are contiguous) so
// that one-hot inputs read and write a single contiguous column.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(int inputs, int outputs);

  // Uniform in [-1/sqrt(inputs), 1/sqrt(inputs)], zero bias.
  static LinearModel fan_in_uniform(int inputs, int outputs, Rng& rng);

  int inputs() const { return inputs_; }
  int outputs() const { return outputs_; }
  size_t num_weights() const { return weights_.size(); }

  double& weight(int out, int in) { return weights_[index(out, in)]; }
  double weight(int out, int in) const { return weights_[index(out, in)]; }

  std::span<double> weights() { return weights_; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> bias() { return bias_; }
  std::span<const double> bias() const { return bias_; }

  // Contiguous outputs-length slice of W for input `in`.
  std::span<const double> column(int in) const {
    return {weights_.data() + index(0, in), static_cast<size_t>(outputs_)};
  }

  std::vector<double> forward(std::span<const double> x) const;

  // forward() for an input that is 1 at each of `active` and 0 elsewhere.
  void forward_hot(std::span<const int> active, std::span<double> out) const;
  std::vector<double> forward_hot(std::span<const int> active) const;

  // W[o, active...] + b[o] for a single output.
  double output_hot(std::span<const int> active, int o) const;

  bool all_finite() const;

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  size_t index(int out, int in) const {
    return static_cast<size_t>(in) * static_cast<size_t>(outputs_) +
           static_cast<size_t>(out);
  }

  int inputs_ = 0;
  int outputs_ = 0;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

// Parameter gradients with the same layout as LinearModel.
struct Gradients {
  Gradients() = default;
  explicit Gradients(const LinearModel& model)
      : weights(model.num_weights(), 0.0),
        bias(static_cast<size_t>(model.outputs()), 0.0),
        outputs(model.outputs()) {}

  void zero();

  std::vector<double> weights;
  std::vector<double> bias;
  int outputs = 0;
};

// dL/dW = grad_out (x) x, dL/db = grad_out for a single example.
Gradients backward(const LinearModel& model, std::span<const double> x,
                   std::span<const double> grad_out);

// grads += scale * backward(x, grad_out); batch means use scale = 1/B.
void accumulate(Gradients& grads, std::span<const double> x,
                std::span<const double> grad_out, double scale);

// accumulate() for a hot input; touches only the active columns.
void accumulate_hot(Gradients& grads, std::span<const int> active,
                    std::span<const double> grad_out, double scale);

// Single-output variant of accumulate_hot.
void accumulate_hot(Gradients& grads, std::span<const int> active, int out,
                    double grad, double scale);

struct AdamState {
  AdamState() = default;
  AdamState(const LinearModel& model, double learning_rate);

  std::vector<double> m_weights;
  std::vector<double> v_weights;
  std::vector<double> m_bias;
  std::vector<double> v_bias;
  long step = 0;
  double learning_rate = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// Bias-corrected Adam step; increments state.step.
void adam_update(AdamState& state, LinearModel& model, const Gradients& grads);

// p_i = exp(beta x_i) / sum_j exp(beta x_j), max-subtracted.
std::vector<double> softmax_beta(std::span<const double> logits, double beta);

std::vector<double> tanh_vec(std::span<const double> logits);

}  // namespace apart
