#include "apart/discriminator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace apart {

CodeMatrix::CodeMatrix(int num_classes)
    : num_classes_(num_classes),
      num_pairs_(num_classes * (num_classes - 1) / 2) {
  if (num_classes < 2) {
    throw std::invalid_argument("code matrix needs at least 2 classes, got " +
                                std::to_string(num_classes));
  }
  entries_.assign(static_cast<size_t>(num_classes_) * num_pairs_, 0);
  pairs_.reserve(static_cast<size_t>(num_pairs_));
  for (int i = 0; i < num_classes_; ++i) {
    for (int j = i + 1; j < num_classes_; ++j) {
      const int col = static_cast<int>(pairs_.size());
      pairs_.emplace_back(i, j);
      entries_[static_cast<size_t>(i) * num_pairs_ + col] = 1;
      entries_[static_cast<size_t>(j) * num_pairs_ + col] = -1;
    }
  }
  nonzeros_.reserve(static_cast<size_t>(num_classes_) * (num_classes_ - 1));
  for (int z = 0; z < num_classes_; ++z) {
    for (int other = 0; other < num_classes_; ++other) {
      if (other == z) continue;
      const bool first = z < other;
      nonzeros_.push_back(
          {first ? pair_index(z, other) : pair_index(other, z), first ? 1 : -1});
    }
  }
}

int CodeMatrix::pair_index(int i, int j) const {
  if (!(0 <= i && i < j && j < num_classes_)) {
    throw std::out_of_range("invalid class pair");
  }
  // Columns before block i: sum_{r<i} (K-1-r).
  return i * (2 * num_classes_ - i - 1) / 2 + (j - i - 1);
}

CodeMatrix build_code_matrix(int num_classes) { return CodeMatrix(num_classes); }

std::vector<int> ap_targets(const CodeMatrix& code, int z) {
  if (z < 0 || z >= code.num_classes()) {
    throw std::out_of_range("latent out of range");
  }
  std::vector<int> row(static_cast<size_t>(code.num_pairs()), 0);
  for (const auto& e : code.nonzeros(z)) row[e.column] = e.sign;
  return row;
}

DiscMode parse_disc_mode(std::string_view name) {
  if (name == "ova") return DiscMode::OvA;
  if (name == "ap") return DiscMode::AP;
  throw std::invalid_argument("unknown discriminator mode '" +
                              std::string(name) + "' (expected ova or ap)");
}

std::string_view disc_mode_str(DiscMode mode) {
  return mode == DiscMode::OvA ? "ova" : "ap";
}

DiscOutput make_ova_output(std::vector<double> logits, double beta) {
  DiscOutput out;
  out.mode = DiscMode::OvA;
  out.activated = softmax_beta(logits, beta);
  out.logits = std::move(logits);
  return out;
}

DiscOutput make_ap_output(std::vector<double> logits) {
  DiscOutput out;
  out.mode = DiscMode::AP;
  out.activated = tanh_vec(logits);
  out.logits = std::move(logits);
  return out;
}

namespace {

struct PairTerm {
  double loss;
  double grad;
};

// One BCE term on p = (tanh(o) + 1) / 2 against q in {0, 0.5, 1}.
PairTerm pair_bce(double y_hat, double target) {
  const double p = (y_hat + 1.0) / 2.0;
  const double q = (target + 1.0) / 2.0;
  const double pc = clamp_prob(p);
  double loss = 0.0;
  if (q > 0.0) loss -= q * std::log(pc);
  if (q < 1.0) loss -= (1.0 - q) * std::log(1.0 - pc);
  return {loss, 2.0 * (p - q)};
}

}  // namespace

LossGrad ap_loss_and_grad(const CodeMatrix& code, const DiscOutput& out, int z,
                          bool mask_dont_cares) {
  if (out.mode != DiscMode::AP) {
    throw std::invalid_argument("ap_loss_and_grad needs an AP output");
  }
  const size_t num_pairs = static_cast<size_t>(code.num_pairs());
  if (out.logits.size() != num_pairs || out.activated.size() != num_pairs) {
    throw std::invalid_argument("AP output length does not match code matrix");
  }
  LossGrad result;
  result.grad.assign(num_pairs, 0.0);
  if (mask_dont_cares) {
    const auto row = code.nonzeros(z);
    const double scale = 1.0 / static_cast<double>(row.size());
    for (const auto& e : row) {
      const PairTerm term = pair_bce(out.activated[e.column], e.sign);
      result.loss += term.loss * scale;
      result.grad[e.column] = term.grad * scale;
    }
  } else {
    const std::vector<int> target = ap_targets(code, z);
    const double scale = 1.0 / static_cast<double>(num_pairs);
    for (size_t i = 0; i < num_pairs; ++i) {
      const PairTerm term = pair_bce(out.activated[i], target[i]);
      result.loss += term.loss * scale;
      result.grad[i] = term.grad * scale;
    }
  }
  return result;
}

LossGrad ova_loss_and_grad(const DiscOutput& out, int z, double beta) {
  if (out.mode != DiscMode::OvA) {
    throw std::invalid_argument("ova_loss_and_grad needs an OvA output");
  }
  if (z < 0 || z >= static_cast<int>(out.logits.size())) {
    throw std::out_of_range("latent out of range");
  }
  const std::vector<double> p = softmax_beta(out.logits, beta);
  LossGrad result;
  result.loss = -std::log(clamp_prob(p[z]));
  result.grad.resize(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    result.grad[i] = beta * (p[i] - (static_cast<int>(i) == z ? 1.0 : 0.0));
  }
  return result;
}

std::vector<double> ap_class_scores(const CodeMatrix& code,
                                    std::span<const double> y_hat) {
  if (static_cast<int>(y_hat.size()) != code.num_pairs()) {
    throw std::invalid_argument("ap_class_scores: length mismatch");
  }
  std::vector<double> scores(static_cast<size_t>(code.num_classes()), 0.0);
  for (int col = 0; col < code.num_pairs(); ++col) {
    const auto [i, j] = code.pair(col);
    scores[i] += y_hat[col];
    scores[j] -= y_hat[col];
  }
  return softmax_beta(scores, 1.0);
}

int argmax_first(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

int predict_class(const DiscOutput& out, const CodeMatrix* code) {
  if (out.mode == DiscMode::OvA) return argmax_first(out.activated);
  if (code == nullptr) {
    throw std::invalid_argument("AP prediction needs the code matrix");
  }
  return argmax_first(ap_class_scores(*code, out.activated));
}

Discriminator::Discriminator(DiscMode mode, int num_states, int num_classes,
                             double beta, bool mask_dont_cares, Rng& init_rng)
    : mode_(mode),
      beta_(beta),
      mask_dont_cares_(mask_dont_cares),
      code_(num_classes),
      model_(LinearModel::fan_in_uniform(
          num_states, mode == DiscMode::OvA ? num_classes : code_.num_pairs(),
          init_rng)) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
}

DiscOutput Discriminator::output(int state) const {
  const int hot[1] = {state};
  std::vector<double> logits = model_.forward_hot(hot);
  return mode_ == DiscMode::OvA ? make_ova_output(std::move(logits), beta_)
                                : make_ap_output(std::move(logits));
}

int Discriminator::predict(int state) const {
  return predict_class(output(state), &code_);
}

double Discriminator::ap_min_score(int state, int z) const {
  const std::span<const double> col = model_.column(state);
  const std::span<const double> bias = model_.bias();
  double worst = INFINITY;
  for (const auto& e : code_.nonzeros(z)) {
    const double v = e.sign * (col[e.column] + bias[e.column]);
    if (v < worst) worst = v;
  }
  return std::tanh(worst);
}

double Discriminator::batch_loss_and_grad(std::span<const int> states,
                                          std::span<const int> latents,
                                          Gradients& grads) const {
  if (states.size() != latents.size() || states.empty()) {
    throw std::invalid_argument("batch_loss_and_grad: bad batch shape");
  }
  const double inv_batch = 1.0 / static_cast<double>(states.size());

  // Identical (state, latent) examples contribute identical terms, so each
  // distinct pair is evaluated once and weighted by its multiplicity.
  const int K = num_classes();
  std::vector<int> multiplicity(static_cast<size_t>(num_states()) * K, 0);
  std::vector<int> keys;
  keys.reserve(states.size());
  for (size_t b = 0; b < states.size(); ++b) {
    if (states[b] < 0 || states[b] >= num_states() || latents[b] < 0 ||
        latents[b] >= K) {
      throw std::out_of_range("batch_loss_and_grad: example out of range");
    }
    const int key = states[b] * K + latents[b];
    if (multiplicity[key]++ == 0) keys.push_back(key);
  }

  double total = 0.0;
  if (mode_ == DiscMode::AP && mask_dont_cares_) {
    // Only the K-1 relevant outputs of each example are touched.
    const std::span<const double> bias = model_.bias();
    const double scale = inv_batch / (K - 1);
    for (const int key : keys) {
      const int s = key / K;
      const double weight = multiplicity[key];
      const int hot[1] = {s};
      const std::span<const double> col = model_.column(s);
      for (const auto& e : code_.nonzeros(key % K)) {
        const double y_hat = std::tanh(col[e.column] + bias[e.column]);
        const PairTerm term = pair_bce(y_hat, e.sign);
        total += weight * term.loss;
        accumulate_hot(grads, hot, e.column, term.grad, weight * scale);
      }
    }
    return total * scale;
  }

  // Full outputs are shared by all examples on the same state.
  std::vector<DiscOutput> cache(static_cast<size_t>(num_states()));
  std::vector<bool> cached(static_cast<size_t>(num_states()), false);
  for (const int key : keys) {
    const int s = key / K;
    const double weight = multiplicity[key];
    if (!cached[s]) {
      cache[s] = output(s);
      cached[s] = true;
    }
    const LossGrad lg = mode_ == DiscMode::OvA
                            ? ova_loss_and_grad(cache[s], key % K, beta_)
                            : ap_loss_and_grad(code_, cache[s], key % K,
                                               /*mask_dont_cares=*/false);
    total += weight * lg.loss;
    const int hot[1] = {s};
    accumulate_hot(grads, hot, lg.grad, weight * inv_batch);
  }
  return total * inv_batch;
}

}  // namespace apart
