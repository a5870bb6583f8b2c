#include <cmath>
#include <map>
#include <stdexcept>

#include "apart/agent.hpp"
#include "apart/metrics.hpp"
#include "doctest.h"
#include "fd.hpp"

using namespace apart;

namespace {

void zero_policy(QPolicy& policy) {
  for (double& w : policy.model().weights()) w = 0.0;
  for (double& b : policy.model().bias()) b = 0.0;
  policy.sync_target();
}

}  // namespace

TEST_CASE("replay buffer is a FIFO ring") {
  ReplayBuffer buffer(3);
  CHECK(buffer.empty());
  for (int i = 0; i < 5; ++i) buffer.push({0, Action::Stay, 0, i + 1, 0});
  CHECK(buffer.size() == 3);
  CHECK(buffer.by_age(0).t == 3);
  CHECK(buffer.by_age(1).t == 4);
  CHECK(buffer.by_age(2).t == 5);
  CHECK_THROWS_AS(ReplayBuffer(0), std::invalid_argument);

  ReplayBuffer empty(4);
  Rng rng = make_stream(1, "replay");
  CHECK_THROWS_AS(sample_batch(empty, 2, rng), std::logic_error);
}

TEST_CASE("batch sampling is uniform with replacement") {
  ReplayBuffer buffer(10);
  for (int i = 0; i < 4; ++i) buffer.push({0, Action::Stay, 0, i + 1, 0});
  Rng rng = make_stream(2, "replay");
  const std::vector<Transition> batch = sample_batch(buffer, 40000, rng);
  std::map<int, int> counts;
  for (const auto& tr : batch) ++counts[tr.t];
  CHECK(counts.size() == 4);
  for (const auto& [t, n] : counts) CHECK(std::abs(n - 10000) < 500);
}

TEST_CASE("epsilon-greedy action selection") {
  const GridEnv env = make_open_grid(3, 3, 4, 5);
  Rng init = make_stream(3, "init");
  QPolicy policy(env, 2, QPolicyOptions{}, init);
  Rng rng = make_stream(3, "policy");

  const std::vector<double> q = {0, 3, 1, 1, 1};
  CHECK(greedy_action(q) == Action::Left);
  CHECK(greedy_action(std::vector<double>(5, 0.2)) == Action::Stay);

  zero_policy(policy);
  policy.set_epsilon(0.0);
  for (int i = 0; i < 50; ++i) CHECK(select_action(policy, 4, 1, rng) == Action::Stay);

  policy.set_epsilon(1.0);
  std::array<int, kNumActions> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<int>(select_action(policy, 4, 0, rng))];
  double chi2 = 0.0;
  const double expected = draws / 5.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 18.47);  // chi-square, 4 dof, p = 0.001

  const Observation obs = encode_rl_obs(env, 4, 1, 2, ObsEncoding::Outer);
  policy.set_epsilon(0.0);
  policy.model().bias()[3] = 1.0;
  CHECK(select_action(policy, obs, rng) == Action::Up);
  CHECK_THROWS_AS(policy.set_epsilon(1.5), std::invalid_argument);
}

TEST_CASE("rollout collection") {
  const GridEnv env = build_env(EnvName::FourRooms);
  Rng init = make_stream(4, "init");
  QPolicy policy(env, 5, QPolicyOptions{}, init);
  zero_policy(policy);
  policy.set_epsilon(0.0);
  ReplayBuffer buffer(100);
  Rng rng = make_stream(4, "policy");
  CHECK(collect_rollout(env, policy, 3, buffer, rng) == env.start());
  CHECK(buffer.size() == 40);
  for (size_t i = 0; i < buffer.size(); ++i) {
    CHECK(buffer[i].s == env.start());
    CHECK(buffer[i].s_next == env.start());
    CHECK(buffer[i].t == static_cast<int>(i) + 1);
    CHECK(buffer[i].z == 3);
  }
  collect_rollout(env, policy, 3, buffer, rng);
  collect_rollout(env, policy, 3, buffer, rng);
  CHECK(buffer.size() == 100);

  policy.set_epsilon(1.0);
  ReplayBuffer chain(40);
  collect_rollout(env, policy, 0, chain, rng);
  for (size_t i = 0; i < chain.size(); ++i) {
    CHECK(chain[i].s_next == env.step(chain[i].s, chain[i].a));
    if (i > 0) CHECK(chain[i].s == chain[i - 1].s_next);
  }
}

TEST_CASE("random-walk final states concentrate near the center of the empty grid") {
  const GridEnv env = build_env(EnvName::Empty);
  Rng init = make_stream(5, "init");
  QPolicy policy(env, 1, QPolicyOptions{}, init);
  policy.set_epsilon(1.0);
  Rng rng = make_stream(5, "policy");
  std::vector<int> hits(env.num_cells(), 0);
  const int walks = 20000;
  for (int i = 0; i < walks; ++i) {
    ReplayBuffer scratch(40);
    ++hits[collect_rollout(env, policy, 0, scratch, rng)];
  }
  // Monte-Carlo oracle of the same walk written directly on coordinates.
  Rng oracle_rng = make_stream(6, "policy");
  std::vector<int> oracle(env.num_cells(), 0);
  for (int i = 0; i < walks; ++i) {
    int x = 5, y = 5;
    for (int t = 0; t < 40; ++t) {
      switch (uniform_int(oracle_rng, 5)) {
        case 1: x = std::max(0, x - 1); break;
        case 2: x = std::min(9, x + 1); break;
        case 3: y = std::min(9, y + 1); break;
        case 4: y = std::max(0, y - 1); break;
        default: break;
      }
    }
    ++oracle[y * 10 + x];
  }
  auto near_center = [&](const std::vector<int>& h) {
    int n = 0;
    for (Cell c = 0; c < env.num_cells(); ++c) {
      if (std::abs(env.x_of(c) - 5) + std::abs(env.y_of(c) - 5) <= 3) n += h[c];
    }
    return static_cast<double>(n) / walks;
  };
  CHECK(near_center(hits) == doctest::Approx(near_center(oracle)).epsilon(0.05));
  CHECK(near_center(hits) > 25.0 / 100.0);  // 25 of 100 cells lie within distance 3
  CHECK(hits[env.cell_at(5, 5)] > hits[env.cell_at(0, 0)]);
}

TEST_CASE("TD loss gradient matches finite differences") {
  Rng rng = make_stream(7, "test");
  const GridEnv env = make_open_grid(3, 2, 0, 4);
  for (ObsEncoding enc : {ObsEncoding::Outer, ObsEncoding::Concat}) {
    for (int trial = 0; trial < 100; ++trial) {
      Rng init = make_stream(trial, "init");
      QPolicyOptions opts;
      opts.encoding = enc;
      QPolicy policy(env, 3, opts, init);
      for (double& w : policy.target_model().weights()) w = 2.0 * uniform01(rng) - 1.0;
      for (double& b : policy.model().bias()) b = 0.3 * (2.0 * uniform01(rng) - 1.0);
      std::vector<Transition> batch;
      std::vector<double> rewards;
      for (int b = 0; b < 8; ++b) {
        const Cell s = uniform_int(rng, 6);
        const Action a = kAllActions[uniform_int(rng, 5)];
        batch.push_back({s, a, env.step(s, a), 1 + uniform_int(rng, 4), uniform_int(rng, 3)});
        rewards.push_back(2.0 * uniform01(rng) - 1.0);
      }
      Gradients grads(policy.model());
      td_loss(policy, batch, rewards, &grads);
      std::vector<double> params(policy.model().weights().begin(),
                                 policy.model().weights().end());
      params.insert(params.end(), policy.model().bias().begin(),
                    policy.model().bias().end());
      const size_t nw = policy.model().num_weights();
      QPolicy probe = policy;
      const auto numeric = numeric_gradient(params, [&](std::span<const double> p) {
        std::copy(p.begin(), p.begin() + nw, probe.model().weights().begin());
        std::copy(p.begin() + nw, p.end(), probe.model().bias().begin());
        return td_loss(probe, batch, rewards);
      });
      std::vector<double> flat = grads.weights;
      flat.insert(flat.end(), grads.bias.begin(), grads.bias.end());
      CHECK(relative_error(flat, numeric) < 1e-5);
    }
  }
}

TEST_CASE("TD targets") {
  const GridEnv env = make_open_grid(2, 1, 0, 3);
  Rng init = make_stream(8, "init");
  QPolicy policy(env, 1, QPolicyOptions{}, init);

  SUBCASE("zero rewards keep a zero Q fixed") {
    zero_policy(policy);
    std::vector<Transition> batch = {{0, Action::Right, 1, 1, 0}, {1, Action::Stay, 1, 3, 0}};
    const std::vector<double> zeros(2, 0.0);
    for (int i = 0; i < 50; ++i) td_update(policy, batch, zeros);
    for (double w : policy.model().weights()) CHECK(w == 0.0);
  }
  SUBCASE("terminal reward is learned exactly") {
    std::vector<Transition> batch = {{1, Action::Left, 0, 3, 0}};
    const std::vector<double> one = {1.0};
    for (int i = 0; i < 3000; ++i) td_update(policy, batch, one);
    CHECK(policy.q_values(1, 0)[static_cast<int>(Action::Left)] ==
          doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("target network is copied every interval") {
    std::vector<Transition> batch = {{0, Action::Right, 1, 1, 0}};
    const std::vector<double> one = {1.0};
    const LinearModel initial = policy.target_model();
    for (int i = 0; i < 199; ++i) td_update(policy, batch, one);
    CHECK(policy.target_model() == initial);
    td_update(policy, batch, one);
    CHECK(policy.target_model() == policy.model());
  }
}

TEST_CASE("DQN learns shortest paths on a 5x5 grid") {
  const GridEnv env = make_open_grid(5, 5, 0, 12);
  const Cell goal = env.cell_at(4, 3);

  // Value iteration on steps-to-goal.
  std::vector<int> dist(env.num_cells(), 1000);
  dist[goal] = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (Cell s = 0; s < env.num_cells(); ++s) {
      for (Action a : kAllActions) {
        const int d = 1 + dist[env.step(s, a)];
        if (d < dist[s]) {
          dist[s] = d;
          changed = true;
        }
      }
    }
  }
  REQUIRE(dist[env.start()] == 7);

  for (std::uint64_t seed : {1, 2, 3}) {
    Rng init = make_stream(seed, "init");
    QPolicyOptions opts;
    opts.epsilon = 1.0;
    QPolicy policy(env, 1, opts, init);
    ReplayBuffer buffer(5000);
    Rng act = make_stream(seed, "policy");
    Rng replay = make_stream(seed, "replay");
    bool solved = false;
    for (int update = 1; update <= 50000 && !solved; ++update) {
      collect_rollout(env, policy, 0, buffer, act);
      const std::vector<Transition> batch = sample_batch(buffer, 64, replay);
      std::vector<double> rewards;
      for (const auto& tr : batch) rewards.push_back(tr.s_next == goal ? 1.0 : 0.0);
      td_update(policy, batch, rewards);
      if (update % 500 == 0) {
        Cell s = env.start();
        int t = 0;
        while (s != goal && t < env.horizon()) {
          s = env.step(s, greedy_action(policy.q_values(s, 0)));
          ++t;
        }
        solved = s == goal && t == dist[env.start()];
      }
    }
    INFO("seed " << seed);
    CHECK(solved);
    // Every greedy step from the start moves one cell closer to the goal.
    Cell s = env.start();
    while (s != goal) {
      const Cell next = env.step(s, greedy_action(policy.q_values(s, 0)));
      REQUIRE(dist[next] == dist[s] - 1);
      s = next;
    }
  }
}

TEST_CASE("discriminator updates") {
  const GridEnv env = build_env(EnvName::Empty);
  Rng init = make_stream(9, "init");

  SUBCASE("single repeated example overfits") {
    Discriminator disc(DiscMode::AP, env.num_free(), 10, 1.0, true, init);
    AdamState adam(disc.model(), 2e-3);
    const std::vector<Transition> batch(16, Transition{0, Action::Stay, 37, 5, 4});
    double prev = disc_update(disc, adam, env, batch);
    for (int i = 0; i < 100; ++i) {
      const double loss = disc_update(disc, adam, env, batch);
      CHECK(loss < prev);
      prev = loss;
    }
  }
  SUBCASE("separable two-skill data reaches perfect accuracy") {
    for (DiscMode mode : {DiscMode::AP, DiscMode::OvA}) {
      Discriminator disc(mode, env.num_free(), 2, 1.0, true, init);
      AdamState adam(disc.model(), 2e-3);
      std::vector<Transition> batch;
      for (int i = 0; i < 32; ++i) {
        batch.push_back({0, Action::Stay, env.cell_at(2, 2), 1, 0});
        batch.push_back({0, Action::Stay, env.cell_at(7, 7), 1, 1});
      }
      for (int i = 0; i < 500; ++i) disc_update(disc, adam, env, batch);
      CHECK(disc.predict(env.free_index(env.cell_at(2, 2))) == 0);
      CHECK(disc.predict(env.free_index(env.cell_at(7, 7))) == 1);
    }
  }
}

TEST_CASE("VIC rewards only reach the TD target on final steps") {
  const GridEnv env = make_open_grid(4, 4, 5, 6);
  Rng init = make_stream(10, "init");
  QPolicy policy(env, 3, QPolicyOptions{}, init);
  zero_policy(policy);
  Discriminator disc(DiscMode::OvA, env.num_free(), 3, 1.0, true, init);
  for (double& b : disc.model().bias()) b = 1.0;
  disc.model().bias()[0] = 3.0;
  std::vector<Transition> batch;
  for (int t = 1; t <= 6; ++t) batch.push_back({5, Action::Right, 6, t, 0});
  Rng reward_rng = make_stream(10, "dropout");
  dqn_update(policy, disc, RewardSpec::make(RewardKind::VIC), batch, reward_rng);
  // One Adam step from zero moves only the (s, z, a) entry; its sign shows
  // whether any target was nonzero, which only the t = T row can provide.
  const double moved = policy.q_values(5, 0)[static_cast<int>(Action::Right)];
  CHECK(moved > 0.0);
  std::vector<Transition> early(batch.begin(), batch.end() - 1);
  QPolicy fresh = policy;
  zero_policy(fresh);
  fresh.optimizer() = AdamState(fresh.model(), 2e-3);
  dqn_update(fresh, disc, RewardSpec::make(RewardKind::VIC), early, reward_rng);
  CHECK(fresh.q_values(5, 0)[static_cast<int>(Action::Right)] == 0.0);
}
