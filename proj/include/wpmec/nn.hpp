#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wpmec/rng.hpp"

namespace wpmec {

enum class Head { Linear, TanhBox, Softmax };

struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out
};

// Dense ReLU network with a typed output head. TanhBox squashes each output
// into its [lo, hi] box, which is how action bounds are enforced.
struct Mlp {
  std::vector<Layer> layers;
  Head head = Head::Linear;
  std::vector<double> lo;  // TanhBox bounds, sized like the output
  std::vector<double> hi;

  int input_size() const { return layers.front().in; }
  int output_size() const { return layers.back().out; }
};

Mlp make_mlp(int in, const std::vector<int>& hidden, int out, Head head,
             Rng& rng);
void set_tanh_bounds(Mlp& net, std::vector<double> lo, std::vector<double> hi);

// Forward activations cached for one backward pass.
struct Tape {
  std::vector<std::vector<double>> act;  // act[0] = input, then per layer
  std::vector<std::vector<double>> pre;  // pre-activation per layer
  std::vector<double> out;               // head output
  std::vector<std::uint8_t> mask;        // softmax mask, empty = all allowed
};

std::vector<double> forward(const Mlp& net, std::span<const double> x,
                            Tape* tape = nullptr);

// Softmax head with excluded entries pinned to probability exactly 0.
// At least one entry must stay allowed.
std::vector<double> forward_masked(const Mlp& net, std::span<const double> x,
                                   std::span<const std::uint8_t> allowed,
                                   Tape* tape = nullptr);

struct Grads {
  std::vector<Layer> g;       // same shapes as the network
  std::vector<double> input;  // gradient w.r.t. the input vector
};

Grads make_grads(const Mlp& net);
void zero_grads(Grads& grads);

// Accumulates gradients of a scalar loss given dL/d(head output).
void backward(const Mlp& net, const Tape& tape,
              std::span<const double> upstream, Grads& grads);

// Accumulates gradients given dL/d(logits), skipping the head Jacobian.
// This is the natural entry point for log-softmax losses.
void backward_logits(const Mlp& net, const Tape& tape,
                     std::span<const double> upstream, Grads& grads);

// Plain descent step; callers doing ascent negate their upstream.
void sgd_step(Mlp& net, const Grads& grads, double lr);

struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long t = 0;
  std::vector<Layer> m;
  std::vector<Layer> v;
};

Adam make_adam(const Mlp& net, double lr);
void adam_step(Mlp& net, const Grads& grads, Adam& opt);

// target <- mix * src + (1 - mix) * target, elementwise.
void soft_update(Mlp& target, const Mlp& src, double mix);

// JSON checkpoint payloads (shapes, weights, optimizer moments).
std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const std::string& text);
std::string adam_to_json(const Adam& opt);
Adam adam_from_json(const std::string& text, const Mlp& net);

}  // namespace wpmec
