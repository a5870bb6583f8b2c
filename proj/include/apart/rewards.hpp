#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "apart/discriminator.hpp"
#include "apart/rng.hpp"

namespace apart {

enum class RewardKind { VIC, DIAYN, TunedVIC, APAverage, APMin, APART };

enum class WeightFn { Quadratic, Linear, Quartic, Exp };

// Which transitions can carry reward: every step, or only t = T.
enum class Placement { AllStates, LastState };

RewardKind parse_reward_kind(std::string_view name);
std::string_view reward_kind_str(RewardKind kind);
WeightFn parse_weight_fn(std::string_view name);
std::string_view weight_fn_str(WeightFn fn);
Placement parse_placement(std::string_view name);
std::string_view placement_str(Placement placement);

// Intrinsic reward configuration.
//
// `ascending` and `dropout` select how the raw reward r is shaped at step t:
//   neither         r
//   ascending only  W(t) r
//   dropout only    r with probability `dropout_only_prob`, else 0
//   both            r with probability W(t), else 0
struct RewardSpec {
  RewardKind kind = RewardKind::APART;
  double beta = 10.0;  // tuned VIC inverse temperature
  WeightFn weight_fn = WeightFn::Quadratic;
  bool ascending = true;
  bool dropout = true;
  double dropout_only_prob = 0.5;
  Placement placement = Placement::AllStates;

  // Defaults for a kind: APART turns on ascending + dropout, VIC and tuned
  // VIC reward the last state only.
  static RewardSpec make(RewardKind kind);

  DiscMode required_mode() const;
};

// log(probs[z]) - log(1/K) with probs[z] clamped.
double reward_diayn(std::span<const double> probs, int z, int num_latents);

// reward_diayn at t = T, 0 before.
double reward_vic(std::span<const double> probs, int z, int num_latents, int t,
                  int horizon);

// softmax_beta(logits, beta)[z]; no log and no prior baseline.
double reward_tuned_vic(std::span<const double> logits, int z, double beta);

// ap_class_scores(code, y_hat)[z].
double reward_ap_average(const CodeMatrix& code, std::span<const double> y_hat,
                         int z);

// Worst pairwise score of z: min over the K-1 nonzero code[z, i] * y_hat[i].
double reward_ap_min(const CodeMatrix& code, std::span<const double> y_hat,
                     int z);

// W(t) for 1 <= t <= T; nondecreasing with W(T) = 1.
double ascending_weight(int t, int horizon, WeightFn fn);

// r with probability W(t), otherwise 0. Not rescaled.
double apply_dropout(double r, int t, int horizon, WeightFn fn, Rng& rng);

// Placement, ascending weight and dropout applied to a raw reward.
double shape_reward(const RewardSpec& spec, double raw, int t, int horizon,
                    Rng& rng);

// Raw (unshaped) reward of one discriminator output.
double raw_reward(const RewardSpec& spec, const CodeMatrix& code,
                  const DiscOutput& out, int z);

// Rewards for a batch of discriminator outputs. Throws ConfigError if an
// output's mode does not match spec.required_mode().
std::vector<double> compute_batch_rewards(const RewardSpec& spec,
                                          const CodeMatrix& code,
                                          std::span<const DiscOutput> outputs,
                                          std::span<const int> latents,
                                          std::span<const int> timesteps,
                                          int horizon, Rng& rng);

// compute_batch_rewards evaluated straight from a discriminator, reading only
// the outputs each reward needs. `states` are free-state indices.
std::vector<double> batch_rewards(const RewardSpec& spec,
                                  const Discriminator& disc,
                                  std::span<const int> states,
                                  std::span<const int> latents,
                                  std::span<const int> timesteps, int horizon,
                                  Rng& rng);

}  // namespace apart
