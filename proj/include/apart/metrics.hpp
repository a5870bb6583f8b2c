#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apart/agent.hpp"
#include "apart/discriminator.hpp"
#include "apart/gridworld.hpp"

namespace apart {

struct EvalRecord {
  long env_steps = 0;
  std::uint64_t seed = 0;
  int n_effective = 0;
  double mean_reward = 0.0;
  std::vector<double> disc_accuracy;  // index t-1 for t = 1..T
};

// Final state of every skill z = 0..N_z-1 rolled out for T steps. With
// epsilon = 0 the rollouts are greedy and `rng` is not touched.
std::vector<Cell> skill_final_states(const GridEnv& env, const QPolicy& policy,
                                     int num_latents, double epsilon, Rng& rng);

int count_distinct(const std::vector<Cell>& cells);

// Number of distinct greedy final states over all latents.
int effective_skills(const GridEnv& env, const QPolicy& policy,
                     int num_latents);

// Distinct final states of N_z independent uniform random walks.
int random_walk_skills(const GridEnv& env, int num_latents, Rng& rng);

// Mean of random_walk_skills over `episodes` draws.
double random_walk_baseline(const GridEnv& env, int num_latents, int episodes,
                            Rng& rng);

// For t = 1..T, the fraction of (rollout, z) pairs whose state s_t (s_1 is
// the start) is classified as z. Rollouts act epsilon-greedily.
std::vector<double> disc_accuracy_per_step(const GridEnv& env,
                                           const QPolicy& policy,
                                           const Discriminator& disc,
                                           int num_latents, int rollouts,
                                           double epsilon, Rng& rng);

// `env_steps,seed,n_effective,mean_reward,acc_t1,...,acc_tT`
std::string metrics_csv_header(int horizon);
std::string metrics_csv_row(const EvalRecord& record);

}  // namespace apart
