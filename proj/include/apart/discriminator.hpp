#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "apart/linnet.hpp"

namespace apart {

// K x L all-pairs code matrix over {-1, 0, +1}, L = K(K-1)/2.
//
// Column for the pair (i, j), i < j, holds +1 in row i and -1 in row j. Pairs
// are ordered lexicographically: (0,1), (0,2), ..., (0,K-1), (1,2), ...
class CodeMatrix {
 public:
  struct Entry {
    int column;
    int sign;  // +1 or -1
  };

  explicit CodeMatrix(int num_classes);

  int num_classes() const { return num_classes_; }
  int num_pairs() const { return num_pairs_; }

  int at(int row, int column) const {
    return entries_[static_cast<size_t>(row) * num_pairs_ + column];
  }

  int pair_index(int i, int j) const;
  std::pair<int, int> pair(int column) const { return pairs_[column]; }

  // The K-1 nonzero entries of row z, in increasing column order.
  std::span<const Entry> nonzeros(int z) const {
    return {nonzeros_.data() + static_cast<size_t>(z) * (num_classes_ - 1),
            static_cast<size_t>(num_classes_ - 1)};
  }

 private:
  int num_classes_;
  int num_pairs_;
  std::vector<std::int8_t> entries_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<Entry> nonzeros_;
};

CodeMatrix build_code_matrix(int num_classes);

// Row z of the code matrix (equivalently M^T onehot(z)).
std::vector<int> ap_targets(const CodeMatrix& code, int z);

enum class DiscMode { OvA, AP };

DiscMode parse_disc_mode(std::string_view name);
std::string_view disc_mode_str(DiscMode mode);

struct DiscOutput {
  DiscMode mode = DiscMode::OvA;
  std::vector<double> logits;
  // softmax_beta(logits, beta) for OvA, tanh(logits) for AP.
  std::vector<double> activated;
};

DiscOutput make_ova_output(std::vector<double> logits, double beta);
DiscOutput make_ap_output(std::vector<double> logits);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d logits
};

// Binary cross-entropy over pairs after mapping predictions and targets from
// [-1, 1] to [0, 1]. With `mask_dont_cares` only the K-1 columns involving z
// are averaged; otherwise all L columns are, with target 0.5 on don't-cares.
//
// The loss value uses clamped probabilities. The gradient is that of the
// unclamped loss, 2 (p - q) per column, which coincides with the clamped one
// inside the clamp range and keeps saturated wrong outputs trainable.
LossGrad ap_loss_and_grad(const CodeMatrix& code, const DiscOutput& out, int z,
                          bool mask_dont_cares);

// -log softmax_beta(logits)[z] with gradient beta (p - onehot(z)).
LossGrad ova_loss_and_grad(const DiscOutput& out, int z, double beta);

// softmax(M_c y_hat): per-class scores of an all-pairs output.
std::vector<double> ap_class_scores(const CodeMatrix& code,
                                    std::span<const double> y_hat);

// Argmax class, ties to the lowest index. AP outputs need the code matrix.
int predict_class(const DiscOutput& out, const CodeMatrix* code = nullptr);

// Index of the first maximal element.
int argmax_first(std::span<const double> values);

// Skill discriminator q(z | s) over one-hot free-state observations.
class Discriminator {
 public:
  Discriminator(DiscMode mode, int num_states, int num_classes, double beta,
                bool mask_dont_cares, Rng& init_rng);

  DiscMode mode() const { return mode_; }
  int num_classes() const { return code_.num_classes(); }
  int num_states() const { return model_.inputs(); }
  double beta() const { return beta_; }
  bool mask_dont_cares() const { return mask_dont_cares_; }
  const CodeMatrix& code() const { return code_; }

  LinearModel& model() { return model_; }
  const LinearModel& model() const { return model_; }

  // Full output for the free state with index `state`.
  DiscOutput output(int state) const;

  int predict(int state) const;

  // min over the K-1 pairs of code[z, i] * tanh(o_i). tanh is monotone, so
  // the minimum is taken over signed logits and tanh applied once.
  double ap_min_score(int state, int z) const;

  // Mean loss over the batch; adds the mean gradient into `grads`.
  double batch_loss_and_grad(std::span<const int> states,
                             std::span<const int> latents,
                             Gradients& grads) const;

 private:
  DiscMode mode_;
  double beta_;
  bool mask_dont_cares_;
  CodeMatrix code_;
  LinearModel model_;
};

}  // namespace apart
