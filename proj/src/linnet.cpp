#include "apart/linnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace apart {

double clamp_prob(double p) {
  return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

LinearModel::LinearModel(int inputs, int outputs)
    : inputs_(inputs),
      outputs_(outputs),
      weights_(static_cast<size_t>(inputs) * static_cast<size_t>(outputs),
               0.0),
      bias_(static_cast<size_t>(outputs), 0.0) {
  if (inputs <= 0 || outputs <= 0) {
    throw std::invalid_argument("linear layer dimensions must be positive");
  }
}

LinearModel LinearModel::fan_in_uniform(int inputs, int outputs, Rng& rng) {
  LinearModel model(inputs, outputs);
  const double bound = 1.0 / std::sqrt(static_cast<double>(inputs));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : model.weights_) w = dist(rng);
  return model;
}

std::vector<double> LinearModel::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != inputs_) {
    throw std::invalid_argument("forward: input has length " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(inputs_));
  }
  std::vector<double> out(bias_.begin(), bias_.end());
  for (int i = 0; i < inputs_; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* col = weights_.data() + index(0, i);
    for (int o = 0; o < outputs_; ++o) out[o] += col[o] * xi;
  }
  return out;
}

void LinearModel::forward_hot(std::span<const int> active,
                              std::span<double> out) const {
  if (static_cast<int>(out.size()) != outputs_) {
    throw std::invalid_argument("forward_hot: output buffer size mismatch");
  }
  std::copy(bias_.begin(), bias_.end(), out.begin());
  for (int i : active) {
    if (i < 0 || i >= inputs_) {
      throw std::invalid_argument("forward_hot: active index out of range");
    }
    const double* col = weights_.data() + index(0, i);
    for (int o = 0; o < outputs_; ++o) out[o] += col[o];
  }
}

std::vector<double> LinearModel::forward_hot(std::span<const int> active) const {
  std::vector<double> out(static_cast<size_t>(outputs_));
  forward_hot(active, out);
  return out;
}

double LinearModel::output_hot(std::span<const int> active, int o) const {
  double v = bias_[o];
  for (int i : active) v += weights_[index(o, i)];
  return v;
}

bool LinearModel::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(weights_.begin(), weights_.end(), finite) &&
         std::all_of(bias_.begin(), bias_.end(), finite);
}

void Gradients::zero() {
  std::fill(weights.begin(), weights.end(), 0.0);
  std::fill(bias.begin(), bias.end(), 0.0);
}

Gradients backward(const LinearModel& model, std::span<const double> x,
                   std::span<const double> grad_out) {
  Gradients grads(model);
  accumulate(grads, x, grad_out, 1.0);
  return grads;
}

void accumulate(Gradients& grads, std::span<const double> x,
                std::span<const double> grad_out, double scale) {
  const size_t outputs = static_cast<size_t>(grads.outputs);
  if (grad_out.size() != outputs || x.size() * outputs != grads.weights.size()) {
    throw std::invalid_argument("accumulate: shape mismatch");
  }
  for (size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i] * scale;
    if (xi == 0.0) continue;
    double* col = grads.weights.data() + i * outputs;
    for (size_t o = 0; o < outputs; ++o) col[o] += grad_out[o] * xi;
  }
  for (size_t o = 0; o < outputs; ++o) grads.bias[o] += grad_out[o] * scale;
}

void accumulate_hot(Gradients& grads, std::span<const int> active,
                    std::span<const double> grad_out, double scale) {
  const size_t outputs = static_cast<size_t>(grads.outputs);
  if (grad_out.size() != outputs) {
    throw std::invalid_argument("accumulate_hot: shape mismatch");
  }
  for (int i : active) {
    double* col = grads.weights.data() + static_cast<size_t>(i) * outputs;
    for (size_t o = 0; o < outputs; ++o) col[o] += grad_out[o] * scale;
  }
  for (size_t o = 0; o < outputs; ++o) grads.bias[o] += grad_out[o] * scale;
}

void accumulate_hot(Gradients& grads, std::span<const int> active, int out,
                    double grad, double scale) {
  const size_t outputs = static_cast<size_t>(grads.outputs);
  const double g = grad * scale;
  for (int i : active) {
    grads.weights[static_cast<size_t>(i) * outputs + static_cast<size_t>(out)] +=
        g;
  }
  grads.bias[out] += g;
}

AdamState::AdamState(const LinearModel& model, double learning_rate)
    : m_weights(model.num_weights(), 0.0),
      v_weights(model.num_weights(), 0.0),
      m_bias(static_cast<size_t>(model.outputs()), 0.0),
      v_bias(static_cast<size_t>(model.outputs()), 0.0),
      learning_rate(learning_rate) {}

namespace {

void adam_kernel(std::span<double> params, std::span<double> m,
                 std::span<double> v, std::span<const double> g, double beta1,
                 double beta2, double step_size, double v_correction,
                 double epsilon) {
  const size_t n = params.size();
  double* __restrict p = params.data();
  double* __restrict mp = m.data();
  double* __restrict vp = v.data();
  const double* __restrict gp = g.data();
  const double one_minus_b1 = 1.0 - beta1;
  const double one_minus_b2 = 1.0 - beta2;
  for (size_t i = 0; i < n; ++i) {
    const double gi = gp[i];
    const double mi = beta1 * mp[i] + one_minus_b1 * gi;
    const double vi = beta2 * vp[i] + one_minus_b2 * gi * gi;
    mp[i] = mi;
    vp[i] = vi;
    p[i] -= step_size * mi / (std::sqrt(vi * v_correction) + epsilon);
  }
}

}  // namespace

void adam_update(AdamState& state, LinearModel& model, const Gradients& grads) {
  if (grads.weights.size() != model.num_weights() ||
      state.m_weights.size() != model.num_weights() ||
      grads.bias.size() != static_cast<size_t>(model.outputs())) {
    throw std::invalid_argument("adam_update: shape mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  // step_size * m / (sqrt(v * v_correction) + eps) equals
  // lr * m_hat / (sqrt(v_hat) + eps).
  const double step_size =
      state.learning_rate / (1.0 - std::pow(state.beta1, t));
  const double v_correction = 1.0 / (1.0 - std::pow(state.beta2, t));
  adam_kernel(model.weights(), state.m_weights, state.v_weights, grads.weights,
              state.beta1, state.beta2, step_size, v_correction, state.epsilon);
  adam_kernel(model.bias(), state.m_bias, state.v_bias, grads.bias, state.beta1,
              state.beta2, step_size, v_correction, state.epsilon);
}

std::vector<double> softmax_beta(std::span<const double> logits, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("softmax beta must be > 0");
  if (logits.empty()) return {};
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(beta * (logits[i] - top));
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> tanh_vec(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  std::transform(logits.begin(), logits.end(), out.begin(),
                 [](double x) { return std::tanh(x); });
  return out;
}

}  // namespace apart
