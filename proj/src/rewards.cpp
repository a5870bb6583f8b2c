#include "apart/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "apart/errors.hpp"

namespace apart {

RewardKind parse_reward_kind(std::string_view name) {
  if (name == "vic") return RewardKind::VIC;
  if (name == "diayn") return RewardKind::DIAYN;
  if (name == "tuned_vic") return RewardKind::TunedVIC;
  if (name == "ap_average") return RewardKind::APAverage;
  if (name == "ap_min") return RewardKind::APMin;
  if (name == "apart") return RewardKind::APART;
  throw ConfigError("unknown reward '" + std::string(name) +
                    "' (expected vic, diayn, tuned_vic, ap_average, ap_min "
                    "or apart)");
}

std::string_view reward_kind_str(RewardKind kind) {
  switch (kind) {
    case RewardKind::VIC: return "vic";
    case RewardKind::DIAYN: return "diayn";
    case RewardKind::TunedVIC: return "tuned_vic";
    case RewardKind::APAverage: return "ap_average";
    case RewardKind::APMin: return "ap_min";
    case RewardKind::APART: return "apart";
  }
  return "?";
}

WeightFn parse_weight_fn(std::string_view name) {
  if (name == "quadratic") return WeightFn::Quadratic;
  if (name == "linear") return WeightFn::Linear;
  if (name == "quartic") return WeightFn::Quartic;
  if (name == "exp") return WeightFn::Exp;
  throw ConfigError("unknown weight function '" + std::string(name) +
                    "' (expected quadratic, linear, quartic or exp)");
}

std::string_view weight_fn_str(WeightFn fn) {
  switch (fn) {
    case WeightFn::Quadratic: return "quadratic";
    case WeightFn::Linear: return "linear";
    case WeightFn::Quartic: return "quartic";
    case WeightFn::Exp: return "exp";
  }
  return "?";
}

Placement parse_placement(std::string_view name) {
  if (name == "all") return Placement::AllStates;
  if (name == "last") return Placement::LastState;
  throw ConfigError("unknown placement '" + std::string(name) +
                    "' (expected all or last)");
}

std::string_view placement_str(Placement placement) {
  return placement == Placement::AllStates ? "all" : "last";
}

RewardSpec RewardSpec::make(RewardKind kind) {
  RewardSpec spec;
  spec.kind = kind;
  spec.ascending = kind == RewardKind::APART;
  spec.dropout = kind == RewardKind::APART;
  spec.placement = (kind == RewardKind::VIC || kind == RewardKind::TunedVIC)
                       ? Placement::LastState
                       : Placement::AllStates;
  return spec;
}

DiscMode RewardSpec::required_mode() const {
  switch (kind) {
    case RewardKind::VIC:
    case RewardKind::DIAYN:
    case RewardKind::TunedVIC:
      return DiscMode::OvA;
    default:
      return DiscMode::AP;
  }
}

double reward_diayn(std::span<const double> probs, int z, int num_latents) {
  return std::log(clamp_prob(probs[z])) +
         std::log(static_cast<double>(num_latents));
}

double reward_vic(std::span<const double> probs, int z, int num_latents, int t,
                  int horizon) {
  return t == horizon ? reward_diayn(probs, z, num_latents) : 0.0;
}

double reward_tuned_vic(std::span<const double> logits, int z, double beta) {
  return softmax_beta(logits, beta)[z];
}

double reward_ap_average(const CodeMatrix& code, std::span<const double> y_hat,
                         int z) {
  return ap_class_scores(code, y_hat)[z];
}

double reward_ap_min(const CodeMatrix& code, std::span<const double> y_hat,
                     int z) {
  double worst = INFINITY;
  for (const auto& e : code.nonzeros(z)) {
    worst = std::min(worst, e.sign * y_hat[e.column]);
  }
  return worst;
}

double ascending_weight(int t, int horizon, WeightFn fn) {
  const double x = static_cast<double>(t) / static_cast<double>(horizon);
  switch (fn) {
    case WeightFn::Quadratic: return x * x;
    case WeightFn::Linear: return x;
    case WeightFn::Quartic: return x * x * x * x;
    case WeightFn::Exp: return std::exp(5.0 * x - 5.0);
  }
  return 1.0;
}

double apply_dropout(double r, int t, int horizon, WeightFn fn, Rng& rng) {
  return uniform01(rng) < ascending_weight(t, horizon, fn) ? r : 0.0;
}

double shape_reward(const RewardSpec& spec, double raw, int t, int horizon,
                    Rng& rng) {
  if (spec.placement == Placement::LastState && t != horizon) return 0.0;
  if (spec.ascending && spec.dropout) {
    return apply_dropout(raw, t, horizon, spec.weight_fn, rng);
  }
  if (spec.ascending) return ascending_weight(t, horizon, spec.weight_fn) * raw;
  if (spec.dropout) {
    return uniform01(rng) < spec.dropout_only_prob ? raw : 0.0;
  }
  return raw;
}

double raw_reward(const RewardSpec& spec, const CodeMatrix& code,
                  const DiscOutput& out, int z) {
  if (out.mode != spec.required_mode()) {
    throw ConfigError("reward '" + std::string(reward_kind_str(spec.kind)) +
                      "' needs a " +
                      std::string(disc_mode_str(spec.required_mode())) +
                      " discriminator");
  }
  switch (spec.kind) {
    case RewardKind::VIC:
    case RewardKind::DIAYN:
      return reward_diayn(out.activated, z,
                          static_cast<int>(out.activated.size()));
    case RewardKind::TunedVIC:
      return reward_tuned_vic(out.logits, z, spec.beta);
    case RewardKind::APAverage:
      return reward_ap_average(code, out.activated, z);
    case RewardKind::APMin:
    case RewardKind::APART:
      return reward_ap_min(code, out.activated, z);
  }
  return 0.0;
}

std::vector<double> compute_batch_rewards(const RewardSpec& spec,
                                          const CodeMatrix& code,
                                          std::span<const DiscOutput> outputs,
                                          std::span<const int> latents,
                                          std::span<const int> timesteps,
                                          int horizon, Rng& rng) {
  if (outputs.size() != latents.size() || outputs.size() != timesteps.size()) {
    throw std::invalid_argument("compute_batch_rewards: batch shape mismatch");
  }
  std::vector<double> rewards(outputs.size());
  for (size_t b = 0; b < outputs.size(); ++b) {
    const double raw = raw_reward(spec, code, outputs[b], latents[b]);
    rewards[b] = shape_reward(spec, raw, timesteps[b], horizon, rng);
  }
  return rewards;
}

std::vector<double> batch_rewards(const RewardSpec& spec,
                                  const Discriminator& disc,
                                  std::span<const int> states,
                                  std::span<const int> latents,
                                  std::span<const int> timesteps, int horizon,
                                  Rng& rng) {
  if (states.size() != latents.size() || states.size() != timesteps.size()) {
    throw std::invalid_argument("batch_rewards: batch shape mismatch");
  }
  if (disc.mode() != spec.required_mode()) {
    throw ConfigError("reward '" + std::string(reward_kind_str(spec.kind)) +
                      "' needs a " +
                      std::string(disc_mode_str(spec.required_mode())) +
                      " discriminator");
  }
  const bool min_reward =
      spec.kind == RewardKind::APMin || spec.kind == RewardKind::APART;
  std::vector<std::optional<DiscOutput>> cache;
  if (!min_reward) cache.resize(static_cast<size_t>(disc.num_states()));

  std::vector<double> rewards(states.size());
  for (size_t b = 0; b < states.size(); ++b) {
    const bool rewarded = spec.placement == Placement::AllStates ||
                          timesteps[b] == horizon;
    double raw = 0.0;
    if (rewarded) {
      if (min_reward) {
        raw = disc.ap_min_score(states[b], latents[b]);
      } else {
        auto& slot = cache[states[b]];
        if (!slot) slot = disc.output(states[b]);
        raw = raw_reward(spec, disc.code(), *slot, latents[b]);
      }
    }
    rewards[b] = shape_reward(spec, raw, timesteps[b], horizon, rng);
  }
  return rewards;
}

}  // namespace apart
