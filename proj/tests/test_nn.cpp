#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "wpmec/nn.hpp"
#include "wpmec/rng.hpp"

using namespace wpmec;

namespace {

double loss_of(const Mlp& net, std::span<const double> x,
               std::span<const double> coeff,
               std::span<const std::uint8_t> allowed) {
  const std::vector<double> y = allowed.empty()
                                    ? forward(net, x)
                                    : forward_masked(net, x, allowed);
  double l = 0.0;
  for (size_t i = 0; i < y.size(); ++i) l += coeff[i] * y[i];
  return l;
}

// Central differences against the analytic gradient of sum_i coeff_i * y_i.
double max_grad_rel_err(Mlp& net, std::span<const double> x,
                        std::span<const double> coeff,
                        std::span<const std::uint8_t> allowed) {
  Tape tape;
  if (allowed.empty())
    (void)forward(net, x, &tape);
  else
    (void)forward_masked(net, x, allowed, &tape);
  Grads grads = make_grads(net);
  backward(net, tape, coeff, grads);

  double worst = 0.0;
  auto probe = [&](double& w, double analytic) {
    const double save = w;
    const double h = 1e-6 * std::max(1.0, std::abs(save));
    w = save + h;
    const double up = loss_of(net, x, coeff, allowed);
    w = save - h;
    const double down = loss_of(net, x, coeff, allowed);
    w = save;
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(analytic - numeric) /
                       std::max(1e-12, std::max(std::abs(analytic),
                                                std::abs(numeric)));
    worst = std::max(worst, err);
  };
  for (size_t l = 0; l < net.layers.size(); ++l) {
    for (size_t i = 0; i < net.layers[l].w.size(); ++i)
      probe(net.layers[l].w[i], grads.g[l].w[i]);
    for (size_t i = 0; i < net.layers[l].b.size(); ++i)
      probe(net.layers[l].b[i], grads.g[l].b[i]);
  }
  return worst;
}

}  // namespace

TEST_CASE("network construction fixes shapes and is seed deterministic") {
  Rng a(1, 0), b(1, 0), c(2, 0);
  const Mlp na = make_mlp(5, {8, 6}, 3, Head::Linear, a);
  const Mlp nb = make_mlp(5, {8, 6}, 3, Head::Linear, b);
  const Mlp nc = make_mlp(5, {8, 6}, 3, Head::Linear, c);
  REQUIRE(na.layers.size() == 3);
  CHECK(na.input_size() == 5);
  CHECK(na.output_size() == 3);
  CHECK(na.layers[0].w == nb.layers[0].w);
  CHECK(na.layers[0].w != nc.layers[0].w);
}

TEST_CASE("gradients match central differences on every head") {
  Rng rng(42, 0);
  std::vector<double> x = {0.3, -0.7, 0.1, 0.9};
  const std::vector<double> coeff = {0.7, -1.3, 0.4};
  const std::vector<std::uint8_t> none;

  SUBCASE("linear") {
    Mlp net = make_mlp(4, {8, 8}, 3, Head::Linear, rng);
    CHECK(max_grad_rel_err(net, x, coeff, none) < 1e-4);
  }
  SUBCASE("tanh box") {
    Mlp net = make_mlp(4, {8, 8}, 3, Head::TanhBox, rng);
    set_tanh_bounds(net, {0.0, -1.0, 2.0}, {0.4, 1.0, 5.0});
    CHECK(max_grad_rel_err(net, x, coeff, none) < 1e-4);
  }
  SUBCASE("softmax") {
    Mlp net = make_mlp(4, {8, 8}, 3, Head::Softmax, rng);
    CHECK(max_grad_rel_err(net, x, coeff, none) < 1e-4);
  }
  SUBCASE("masked softmax") {
    Mlp net = make_mlp(4, {8, 8}, 3, Head::Softmax, rng);
    const std::vector<std::uint8_t> allowed = {1, 0, 1};
    CHECK(max_grad_rel_err(net, x, coeff, allowed) < 1e-4);
  }
}

TEST_CASE("input gradient matches central differences") {
  Rng rng(7, 0);
  Mlp net = make_mlp(3, {6}, 2, Head::Linear, rng);
  std::vector<double> x = {0.2, -0.4, 0.8};
  const std::vector<double> coeff = {1.0, -0.5};

  Tape tape;
  (void)forward(net, x, &tape);
  Grads grads = make_grads(net);
  backward(net, tape, coeff, grads);
  REQUIRE(grads.input.size() == 3);
  for (int i = 0; i < 3; ++i) {
    const double save = x[i];
    const double h = 1e-6;
    x[i] = save + h;
    const double up = loss_of(net, x, coeff, {});
    x[i] = save - h;
    const double down = loss_of(net, x, coeff, {});
    x[i] = save;
    const double numeric = (up - down) / (2.0 * h);
    CHECK(grads.input[i] == doctest::Approx(numeric).epsilon(1e-5));
  }
}

TEST_CASE("softmax probabilities are a distribution, mask pins exact zeros") {
  Rng rng(3, 0);
  Mlp net = make_mlp(4, {8}, 5, Head::Softmax, rng);
  const std::vector<double> x = {0.5, 0.1, -0.2, 0.3};
  const auto p = forward(net, x);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  for (double v : p) CHECK(v > 0.0);

  const std::vector<std::uint8_t> allowed = {1, 0, 1, 0, 1};
  const auto q = forward_masked(net, x, allowed);
  CHECK(q[1] == 0.0);
  CHECK(q[3] == 0.0);
  CHECK(q[0] + q[2] + q[4] == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<std::uint8_t> closed = {0, 0, 0, 0, 0};
  CHECK_THROWS_AS((void)forward_masked(net, x, closed), std::invalid_argument);

  Mlp lin = make_mlp(4, {8}, 5, Head::Linear, rng);
  CHECK_THROWS_AS((void)forward_masked(lin, x, allowed),
                  std::invalid_argument);
}

TEST_CASE("log-softmax losses can skip the head Jacobian") {
  Rng rng(11, 0);
  Mlp net = make_mlp(3, {6}, 4, Head::Softmax, rng);
  const std::vector<double> x = {0.4, -0.1, 0.6};
  const int action = 2;

  Tape tape;
  const auto p = forward(net, x, &tape);
  // d(-log p_a)/d(logit_j) = p_j - 1[j == a].
  std::vector<double> upstream(p);
  upstream[action] -= 1.0;
  Grads via_logits = make_grads(net);
  backward_logits(net, tape, upstream, via_logits);

  // Same loss through the probability head: d(-log p_a)/d(p_j) = -1/p_a
  // on j == a, zero elsewhere.
  std::vector<double> through_head(p.size(), 0.0);
  through_head[action] = -1.0 / p[action];
  Grads via_head = make_grads(net);
  backward(net, tape, through_head, via_head);

  for (size_t l = 0; l < net.layers.size(); ++l) {
    for (size_t i = 0; i < net.layers[l].w.size(); ++i)
      CHECK(via_logits.g[l].w[i] ==
            doctest::Approx(via_head.g[l].w[i]).epsilon(1e-9));
    for (size_t i = 0; i < net.layers[l].b.size(); ++i)
      CHECK(via_logits.g[l].b[i] ==
            doctest::Approx(via_head.g[l].b[i]).epsilon(1e-9));
  }
}

TEST_CASE("tanh box outputs stay inside their boxes") {
  Rng rng(19, 0);
  Mlp net = make_mlp(2, {16, 16}, 3, Head::TanhBox, rng);
  set_tanh_bounds(net, {0.0, -2.0, 1.0}, {0.4, 2.0, 1.0});
  Rng probe(23, 0);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x = {probe.uniform(-5.0, 5.0),
                                   probe.uniform(-5.0, 5.0)};
    const auto y = forward(net, x);
    CHECK(y[0] >= 0.0);
    CHECK(y[0] <= 0.4);
    CHECK(y[1] >= -2.0);
    CHECK(y[1] <= 2.0);
    CHECK(y[2] == 1.0);
  }
  CHECK_THROWS_AS(set_tanh_bounds(net, {0.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("sgd and adam move weights against the gradient") {
  Rng rng(29, 0);
  Mlp net = make_mlp(2, {4}, 1, Head::Linear, rng);
  const std::vector<double> x = {0.5, -0.5};
  const std::vector<double> coeff = {1.0};

  Tape tape;
  (void)forward(net, x, &tape);
  Grads grads = make_grads(net);
  backward(net, tape, coeff, grads);

  Mlp by_sgd = net;
  sgd_step(by_sgd, grads, 0.1);
  for (size_t l = 0; l < net.layers.size(); ++l)
    for (size_t i = 0; i < net.layers[l].w.size(); ++i)
      CHECK(by_sgd.layers[l].w[i] ==
            net.layers[l].w[i] - 0.1 * grads.g[l].w[i]);

  // First Adam step: the bias-corrected ratio collapses to lr * sign(g).
  Mlp by_adam = net;
  Adam opt = make_adam(by_adam, 0.01);
  adam_step(by_adam, grads, opt);
  CHECK(opt.t == 1);
  for (size_t l = 0; l < net.layers.size(); ++l)
    for (size_t i = 0; i < net.layers[l].w.size(); ++i) {
      const double g = grads.g[l].w[i];
      if (g == 0.0) {
        CHECK(by_adam.layers[l].w[i] == net.layers[l].w[i]);
        continue;
      }
      const double expect =
          net.layers[l].w[i] - 0.01 * g / (std::abs(g) + 1e-8);
      CHECK(by_adam.layers[l].w[i] == doctest::Approx(expect).epsilon(1e-6));
    }

  // Zero gradients leave Adam parameters exactly in place.
  Grads zero = make_grads(net);
  Mlp frozen = net;
  Adam opt2 = make_adam(frozen, 0.01);
  adam_step(frozen, zero, opt2);
  for (size_t l = 0; l < net.layers.size(); ++l) {
    CHECK(frozen.layers[l].w == net.layers[l].w);
    CHECK(frozen.layers[l].b == net.layers[l].b);
  }
}

TEST_CASE("soft update blends elementwise and copies at mix 1") {
  Rng rng(31, 0);
  Mlp src = make_mlp(3, {5}, 2, Head::Linear, rng);
  Mlp tgt = make_mlp(3, {5}, 2, Head::Linear, rng);
  const Mlp before = tgt;
  const double mix = 1e-4;
  soft_update(tgt, src, mix);
  for (size_t l = 0; l < tgt.layers.size(); ++l) {
    for (size_t i = 0; i < tgt.layers[l].w.size(); ++i)
      CHECK(tgt.layers[l].w[i] ==
            mix * src.layers[l].w[i] + (1.0 - mix) * before.layers[l].w[i]);
    for (size_t i = 0; i < tgt.layers[l].b.size(); ++i)
      CHECK(tgt.layers[l].b[i] ==
            mix * src.layers[l].b[i] + (1.0 - mix) * before.layers[l].b[i]);
  }
  soft_update(tgt, src, 1.0);
  for (size_t l = 0; l < tgt.layers.size(); ++l) {
    CHECK(tgt.layers[l].w == src.layers[l].w);
    CHECK(tgt.layers[l].b == src.layers[l].b);
  }

  Mlp other = make_mlp(4, {5}, 2, Head::Linear, rng);
  CHECK_THROWS_AS(soft_update(tgt, other, 0.5), std::invalid_argument);
}

TEST_CASE("mlp json round trip is exact") {
  Rng rng(37, 0);
  Mlp net = make_mlp(4, {6, 5}, 3, Head::TanhBox, rng);
  set_tanh_bounds(net, {0.0, 0.0, 0.0}, {1.0, 2.0, 3.0});
  const Mlp back = mlp_from_json(mlp_to_json(net));
  REQUIRE(back.layers.size() == net.layers.size());
  CHECK(back.head == net.head);
  CHECK(back.lo == net.lo);
  CHECK(back.hi == net.hi);
  for (size_t l = 0; l < net.layers.size(); ++l) {
    CHECK(back.layers[l].w == net.layers[l].w);
    CHECK(back.layers[l].b == net.layers[l].b);
  }
  const std::vector<double> x = {0.1, 0.2, 0.3, 0.4};
  CHECK(forward(back, x) == forward(net, x));
}

TEST_CASE("adam json round trip preserves the step count and moments") {
  Rng rng(41, 0);
  Mlp net = make_mlp(3, {4}, 2, Head::Linear, rng);
  Adam opt = make_adam(net, 0.02);
  const std::vector<double> x = {0.3, 0.2, -0.1};
  const std::vector<double> coeff = {1.0, -1.0};
  for (int i = 0; i < 3; ++i) {
    Tape tape;
    (void)forward(net, x, &tape);
    Grads grads = make_grads(net);
    backward(net, tape, coeff, grads);
    adam_step(net, grads, opt);
  }
  const Adam back = adam_from_json(adam_to_json(opt), net);
  CHECK(back.t == opt.t);
  CHECK(back.lr == opt.lr);
  for (size_t l = 0; l < opt.m.size(); ++l) {
    CHECK(back.m[l].w == opt.m[l].w);
    CHECK(back.v[l].w == opt.v[l].w);
  }

  // The restored optimizer continues bit-identically.
  Mlp n1 = net;
  Adam o1 = opt;
  Mlp n2 = net;
  Adam o2 = back;
  Tape tape;
  (void)forward(n1, x, &tape);
  Grads grads = make_grads(n1);
  backward(n1, tape, coeff, grads);
  adam_step(n1, grads, o1);
  adam_step(n2, grads, o2);
  for (size_t l = 0; l < n1.layers.size(); ++l)
    CHECK(n1.layers[l].w == n2.layers[l].w);
}

TEST_CASE("gradient checks still pass after many optimizer steps") {
  Rng rng(43, 0);
  Mlp net = make_mlp(4, {8, 8}, 3, Head::TanhBox, rng);
  set_tanh_bounds(net, {-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0});
  Adam opt = make_adam(net, 1e-3);
  Rng data(47, 0);
  for (int it = 0; it < 100; ++it) {
    std::vector<double> x(4);
    for (double& v : x) v = data.uniform(-1.0, 1.0);
    Tape tape;
    const auto y = forward(net, x, &tape);
    std::vector<double> upstream(y.size());
    for (size_t i = 0; i < y.size(); ++i)
      upstream[i] = y[i] - (i == 0 ? 0.5 : -0.5);
    Grads grads = make_grads(net);
    backward(net, tape, upstream, grads);
    adam_step(net, grads, opt);
  }
  const std::vector<double> x = {0.3, -0.2, 0.8, -0.9};
  const std::vector<double> coeff = {1.0, 0.5, -0.7};
  CHECK(max_grad_rel_err(net, x, coeff, {}) < 1e-4);
}
