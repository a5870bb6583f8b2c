#include <cmath>
#include <numeric>
#include <stdexcept>

#include "apart/discriminator.hpp"
#include "apart/rng.hpp"
#include "doctest.h"
#include "fd.hpp"

using namespace apart;

namespace {

std::vector<double> random_logits(size_t n, Rng& rng, double scale = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * (2.0 * uniform01(rng) - 1.0);
  return v;
}

// Direct transcription of the pairwise BCE with the [-1,1] -> [0,1] map.
double reference_ap_loss(const CodeMatrix& code, std::span<const double> logits,
                         int z, bool mask) {
  double total = 0.0;
  int terms = 0;
  for (int i = 0; i < code.num_pairs(); ++i) {
    const int target = code.at(z, i);
    if (mask && target == 0) continue;
    const double p = (std::tanh(logits[i]) + 1.0) / 2.0;
    const double q = (target + 1.0) / 2.0;
    total -= q * std::log(p) + (1.0 - q) * std::log(1.0 - p);
    ++terms;
  }
  return total / terms;
}

}  // namespace

TEST_CASE("K=5 code matrix") {
  const int expected[5][10] = {
      {1, 1, 1, 1, 0, 0, 0, 0, 0, 0},
      {-1, 0, 0, 0, 1, 1, 1, 0, 0, 0},
      {0, -1, 0, 0, -1, 0, 0, 1, 1, 0},
      {0, 0, -1, 0, 0, -1, 0, -1, 0, 1},
      {0, 0, 0, -1, 0, 0, -1, 0, -1, -1},
  };
  const CodeMatrix code = build_code_matrix(5);
  REQUIRE(code.num_pairs() == 10);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 10; ++c) CHECK(code.at(r, c) == expected[r][c]);
  }
  CHECK(ap_targets(code, 0) == std::vector<int>{1, 1, 1, 1, 0, 0, 0, 0, 0, 0});
}

TEST_CASE("small code matrices") {
  const CodeMatrix two = build_code_matrix(2);
  CHECK(two.num_pairs() == 1);
  CHECK(two.at(0, 0) == 1);
  CHECK(two.at(1, 0) == -1);
  CHECK(ap_targets(two, 1) == std::vector<int>{-1});
  CHECK_THROWS_AS(build_code_matrix(1), std::invalid_argument);

  const CodeMatrix hundred = build_code_matrix(100);
  CHECK(hundred.num_pairs() == 4950);
  CHECK(hundred.nonzeros(42).size() == 99);
}

TEST_CASE("code matrix invariants for K = 2..120") {
  for (int K = 2; K <= 120; ++K) {
    const CodeMatrix code(K);
    REQUIRE(code.num_pairs() == K * (K - 1) / 2);
    std::vector<int> row_nonzero(K, 0);
    int col = 0;
    for (int i = 0; i < K; ++i) {
      for (int j = i + 1; j < K; ++j, ++col) {
        int plus = 0, minus = 0;
        for (int r = 0; r < K; ++r) {
          const int v = code.at(r, col);
          plus += v == 1;
          minus += v == -1;
          if (v != 0) ++row_nonzero[r];
          if (v != 0 && r != i && r != j) FAIL("stray entry");
        }
        CHECK(plus == 1);
        CHECK(minus == 1);
        CHECK(code.at(i, col) == 1);
        CHECK(code.at(j, col) == -1);
        CHECK(code.pair_index(i, j) == col);
        CHECK(code.pair(col) == std::pair<int, int>{i, j});
      }
    }
    for (int r = 0; r < K; ++r) {
      CHECK(row_nonzero[r] == K - 1);
      const auto nz = code.nonzeros(r);
      REQUIRE(nz.size() == static_cast<size_t>(K - 1));
      for (size_t k = 0; k < nz.size(); ++k) {
        CHECK(code.at(r, nz[k].column) == nz[k].sign);
        if (k > 0) CHECK(nz[k].column > nz[k - 1].column);
      }
    }
  }
}

TEST_CASE("AP loss values") {
  const CodeMatrix code(6);
  const std::vector<double> zeros(code.num_pairs(), 0.0);
  const DiscOutput out = make_ap_output(zeros);
  for (bool mask : {true, false}) {
    CHECK(ap_loss_and_grad(code, out, 2, mask).loss == doctest::Approx(std::log(2.0)));
  }

  // Saturated correct predictions hit the clamp floor.
  std::vector<double> logits(code.num_pairs(), 0.0);
  for (const auto& e : code.nonzeros(3)) logits[e.column] = 40.0 * e.sign;
  const LossGrad lg = ap_loss_and_grad(code, make_ap_output(logits), 3, true);
  CHECK(lg.loss == doctest::Approx(-std::log(1.0 - kProbClamp)).epsilon(1e-6));
  CHECK(lg.loss < 2e-7);
}

TEST_CASE("AP loss matches the reference formula") {
  Rng rng = make_stream(11, "test");
  for (int trial = 0; trial < 20; ++trial) {
    const CodeMatrix code(6);
    const std::vector<double> logits = random_logits(code.num_pairs(), rng);
    const int z = uniform_int(rng, 6);
    for (bool mask : {true, false}) {
      CHECK(ap_loss_and_grad(code, make_ap_output(logits), z, mask).loss ==
            doctest::Approx(reference_ap_loss(code, logits, z, mask)).epsilon(1e-12));
    }
  }
}

TEST_CASE("AP loss gradient matches finite differences") {
  Rng rng = make_stream(12, "test");
  for (bool mask : {true, false}) {
    for (int trial = 0; trial < 100; ++trial) {
      const CodeMatrix code(6);
      const std::vector<double> logits = random_logits(code.num_pairs(), rng);
      const int z = uniform_int(rng, 6);
      const LossGrad lg = ap_loss_and_grad(code, make_ap_output(logits), z, mask);
      const auto numeric = numeric_gradient(logits, [&](std::span<const double> x) {
        return ap_loss_and_grad(code, make_ap_output({x.begin(), x.end()}), z, mask).loss;
      });
      CHECK(relative_error(lg.grad, numeric) < 1e-5);
    }
  }
}

TEST_CASE("masked AP loss ignores don't-care logits") {
  Rng rng = make_stream(13, "test");
  const CodeMatrix code(7);
  std::vector<double> logits = random_logits(code.num_pairs(), rng);
  const double before = ap_loss_and_grad(code, make_ap_output(logits), 4, true).loss;
  for (int c = 0; c < code.num_pairs(); ++c) {
    if (code.at(4, c) == 0) logits[c] += 3.0 * (2.0 * uniform01(rng) - 1.0);
  }
  CHECK(ap_loss_and_grad(code, make_ap_output(logits), 4, true).loss == before);
}

TEST_CASE("OvA loss") {
  const std::vector<double> uniform(5, 0.3);
  CHECK(ova_loss_and_grad(make_ova_output(uniform, 1.0), 2, 1.0).loss ==
        doctest::Approx(std::log(5.0)));
  const std::vector<double> confident = {0.0, 30.0, 0.0};
  CHECK(ova_loss_and_grad(make_ova_output(confident, 1.0), 1, 1.0).loss < 1e-6);

  Rng rng = make_stream(14, "test");
  for (double beta : {0.1, 1.0, 10.0}) {
    for (int trial = 0; trial < 100; ++trial) {
      const std::vector<double> logits = random_logits(7, rng, 1.0);
      const int z = uniform_int(rng, 7);
      const LossGrad lg = ova_loss_and_grad(make_ova_output(logits, beta), z, beta);
      // Independent oracle: -beta x_z + log sum exp(beta x).
      const auto numeric = numeric_gradient(logits, [&](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += std::exp(beta * v);
        return -beta * x[z] + std::log(s);
      });
      CHECK(relative_error(lg.grad, numeric) < 1e-5);
    }
  }
}

TEST_CASE("class scores and prediction") {
  const CodeMatrix two(2);
  const std::vector<double> one = {1.0};
  const std::vector<double> s = ap_class_scores(two, one);
  CHECK(s[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0))));
  CHECK(s[0] == doctest::Approx(0.8808).epsilon(1e-4));
  CHECK(s[1] == doctest::Approx(0.1192).epsilon(1e-3));

  const CodeMatrix code(9);
  const std::vector<double> zeros(code.num_pairs(), 0.0);
  for (double p : ap_class_scores(code, zeros)) CHECK(p == doctest::Approx(1.0 / 9));

  Rng rng = make_stream(15, "test");
  for (int z = 0; z < 9; ++z) {
    const std::vector<int> row = ap_targets(code, z);
    for (double c : {0.01, 0.5, 1.0}) {
      std::vector<double> y(row.begin(), row.end());
      for (double& v : y) v *= c;
      CHECK(argmax_first(ap_class_scores(code, y)) == z);
    }
    std::vector<double> logits(code.num_pairs());
    for (int i = 0; i < code.num_pairs(); ++i) logits[i] = 20.0 * row[i];
    CHECK(predict_class(make_ap_output(logits), &code) == z);
  }
  const std::vector<double> y = random_logits(code.num_pairs(), rng, 0.9);
  const std::vector<double> p = ap_class_scores(code, y);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
  // Brute-force M_c y softmax.
  std::vector<double> raw(9, 0.0);
  for (int k = 0; k < 9; ++k) {
    for (int i = 0; i < code.num_pairs(); ++i) raw[k] += code.at(k, i) * y[i];
  }
  const std::vector<double> expected = softmax_beta(raw, 1.0);
  for (int k = 0; k < 9; ++k) CHECK(p[k] == doctest::Approx(expected[k]).epsilon(1e-12));

  DiscOutput ova;
  ova.mode = DiscMode::OvA;
  ova.activated = {0.1, 0.7, 0.2};
  ova.logits = {0, 1, 0};
  CHECK(predict_class(ova) == 1);
  CHECK(predict_class(make_ova_output(std::vector<double>(4, 0.0), 1.0)) == 0);
  CHECK(predict_class(make_ap_output(zeros), &code) == 0);
}

TEST_CASE("discriminator batch loss is the mean example loss") {
  Rng init = make_stream(16, "init");
  Rng rng = make_stream(16, "test");
  for (DiscMode mode : {DiscMode::AP, DiscMode::OvA}) {
    for (bool mask : {true, false}) {
      Discriminator disc(mode, 6, 5, mode == DiscMode::OvA ? 2.0 : 1.0, mask, init);
      for (double& b : disc.model().bias()) b = 0.5 * (2.0 * uniform01(rng) - 1.0);
      std::vector<int> states, latents;
      for (int b = 0; b < 12; ++b) {
        states.push_back(uniform_int(rng, 6));
        latents.push_back(uniform_int(rng, 5));
      }
      states.push_back(states[0]);  // repeated example
      latents.push_back(latents[0]);

      Gradients grads(disc.model());
      const double loss = disc.batch_loss_and_grad(states, latents, grads);

      std::vector<double> params(disc.model().weights().begin(),
                                 disc.model().weights().end());
      params.insert(params.end(), disc.model().bias().begin(),
                    disc.model().bias().end());
      const size_t nw = disc.model().num_weights();
      auto mean_loss = [&](std::span<const double> p) {
        LinearModel m = disc.model();
        std::copy(p.begin(), p.begin() + nw, m.weights().begin());
        std::copy(p.begin() + nw, p.end(), m.bias().begin());
        double total = 0.0;
        for (size_t b = 0; b < states.size(); ++b) {
          std::vector<double> x(6, 0.0);
          x[states[b]] = 1.0;
          const std::vector<double> logits = m.forward(x);
          total += mode == DiscMode::AP
                       ? ap_loss_and_grad(disc.code(), make_ap_output(logits),
                                          latents[b], mask).loss
                       : ova_loss_and_grad(make_ova_output(logits, disc.beta()),
                                           latents[b], disc.beta()).loss;
        }
        return total / static_cast<double>(states.size());
      };
      CHECK(loss == doctest::Approx(mean_loss(params)).epsilon(1e-12));
      std::vector<double> flat = grads.weights;
      flat.insert(flat.end(), grads.bias.begin(), grads.bias.end());
      CHECK(relative_error(flat, numeric_gradient(params, mean_loss)) < 1e-5);
    }
  }
}

TEST_CASE("AP min score uses the worst meaningful comparison") {
  Rng init = make_stream(17, "init");
  Discriminator disc(DiscMode::AP, 4, 6, 1.0, true, init);
  for (int s = 0; s < 4; ++s) {
    const DiscOutput out = disc.output(s);
    for (int z = 0; z < 6; ++z) {
      double worst = 1.0;
      for (int c = 0; c < disc.code().num_pairs(); ++c) {
        const int sign = disc.code().at(z, c);
        if (sign != 0) worst = std::min(worst, sign * out.activated[c]);
      }
      CHECK(disc.ap_min_score(s, z) == doctest::Approx(worst).epsilon(1e-12));
    }
    CHECK(disc.predict(s) == predict_class(out, &disc.code()));
  }
}

TEST_CASE("mode parsing") {
  CHECK(parse_disc_mode("ova") == DiscMode::OvA);
  CHECK(parse_disc_mode("ap") == DiscMode::AP);
  CHECK_THROWS_AS(parse_disc_mode("svm"), std::invalid_argument);
}
