#include "apart/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace apart {

std::vector<Cell> skill_final_states(const GridEnv& env, const QPolicy& policy,
                                     int num_latents, double epsilon,
                                     Rng& rng) {
  std::vector<Cell> finals(static_cast<size_t>(num_latents));
  for (int z = 0; z < num_latents; ++z) {
    Cell s = env.start();
    for (int t = 1; t <= env.horizon(); ++t) {
      const auto q = policy.q_values(s, z);
      Action a;
      if (epsilon > 0.0 && uniform01(rng) < epsilon) {
        a = static_cast<Action>(uniform_int(rng, kNumActions));
      } else {
        a = greedy_action(q);
      }
      s = env.step(s, a);
    }
    finals[z] = s;
  }
  return finals;
}

int count_distinct(const std::vector<Cell>& cells) {
  std::vector<Cell> sorted = cells;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<int>(std::unique(sorted.begin(), sorted.end()) -
                          sorted.begin());
}

int effective_skills(const GridEnv& env, const QPolicy& policy,
                     int num_latents) {
  Rng unused(0);
  return count_distinct(
      skill_final_states(env, policy, num_latents, /*epsilon=*/0.0, unused));
}

int random_walk_skills(const GridEnv& env, int num_latents, Rng& rng) {
  std::vector<Cell> finals(static_cast<size_t>(num_latents));
  for (auto& s : finals) {
    s = env.start();
    for (int t = 0; t < env.horizon(); ++t) {
      s = env.step(s, static_cast<Action>(uniform_int(rng, kNumActions)));
    }
  }
  return count_distinct(finals);
}

double random_walk_baseline(const GridEnv& env, int num_latents, int episodes,
                            Rng& rng) {
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    total += random_walk_skills(env, num_latents, rng);
  }
  return total / episodes;
}

std::vector<double> disc_accuracy_per_step(const GridEnv& env,
                                           const QPolicy& policy,
                                           const Discriminator& disc,
                                           int num_latents, int rollouts,
                                           double epsilon, Rng& rng) {
  if (rollouts < 1) throw std::invalid_argument("rollouts must be >= 1");
  std::vector<int> prediction(static_cast<size_t>(env.num_free()));
  for (int i = 0; i < env.num_free(); ++i) prediction[i] = disc.predict(i);

  const int horizon = env.horizon();
  std::vector<double> correct(static_cast<size_t>(horizon), 0.0);
  for (int r = 0; r < rollouts; ++r) {
    for (int z = 0; z < num_latents; ++z) {
      Cell s = env.start();
      for (int t = 1; t <= horizon; ++t) {
        if (prediction[env.free_index(s)] == z) correct[t - 1] += 1.0;
        if (t == horizon) break;
        Action a;
        if (epsilon > 0.0 && uniform01(rng) < epsilon) {
          a = static_cast<Action>(uniform_int(rng, kNumActions));
        } else {
          a = greedy_action(policy.q_values(s, z));
        }
        s = env.step(s, a);
      }
    }
  }
  const double total = static_cast<double>(rollouts) * num_latents;
  for (double& c : correct) c /= total;
  return correct;
}

std::string metrics_csv_header(int horizon) {
  std::string header = "env_steps,seed,n_effective,mean_reward";
  for (int t = 1; t <= horizon; ++t) header += ",acc_t" + std::to_string(t);
  return header;
}

std::string metrics_csv_row(const EvalRecord& record) {
  char buf[64];
  std::string row = std::to_string(record.env_steps) + "," +
                    std::to_string(record.seed) + "," +
                    std::to_string(record.n_effective);
  std::snprintf(buf, sizeof(buf), ",%.9g", record.mean_reward);
  row += buf;
  for (double acc : record.disc_accuracy) {
    std::snprintf(buf, sizeof(buf), ",%.6f", acc);
    row += buf;
  }
  return row;
}

}  // namespace apart
