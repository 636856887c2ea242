#include "wpmec/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace wpmec {

namespace {

void check_head_shapes(const Mlp& net) {
  if (net.layers.empty()) throw std::invalid_argument("mlp: no layers");
  for (std::size_t l = 1; l < net.layers.size(); ++l)
    if (net.layers[l].in != net.layers[l - 1].out)
      throw std::invalid_argument("mlp: layer shape mismatch");
  if (net.head == Head::TanhBox &&
      (net.lo.size() != static_cast<std::size_t>(net.output_size()) ||
       net.hi.size() != net.lo.size()))
    throw std::invalid_argument("mlp: tanh bounds missing");
}

std::vector<double> apply_head(const Mlp& net, std::vector<double> z,
                               std::span<const std::uint8_t> allowed) {
  switch (net.head) {
    case Head::Linear:
      return z;
    case Head::TanhBox:
      for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = net.lo[i] +
               (net.hi[i] - net.lo[i]) * 0.5 * (std::tanh(z[i]) + 1.0);
      return z;
    case Head::Softmax: {
      double zmax = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < z.size(); ++i)
        if (allowed.empty() || allowed[i]) zmax = std::max(zmax, z[i]);
      if (zmax == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("mlp: softmax with everything masked");
      double sum = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = (allowed.empty() || allowed[i]) ? std::exp(z[i] - zmax) : 0.0;
        sum += z[i];
      }
      for (double& p : z) p /= sum;
      return z;
    }
  }
  return z;
}

}  // namespace

Mlp make_mlp(int in, const std::vector<int>& hidden, int out, Head head,
             Rng& rng) {
  if (in <= 0 || out <= 0) throw std::invalid_argument("make_mlp: bad sizes");
  Mlp net;
  net.head = head;
  std::vector<int> sizes;
  sizes.push_back(in);
  for (int h : hidden) {
    if (h <= 0) throw std::invalid_argument("make_mlp: bad hidden size");
    sizes.push_back(h);
  }
  sizes.push_back(out);
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    Layer layer;
    layer.in = sizes[l - 1];
    layer.out = sizes[l];
    layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.b.assign(layer.out, 0.0);
    const double limit = std::sqrt(6.0 / (layer.in + layer.out));
    for (double& w : layer.w) w = rng.uniform(-limit, limit);
    net.layers.push_back(std::move(layer));
  }
  if (head == Head::TanhBox) {
    net.lo.assign(out, -1.0);
    net.hi.assign(out, 1.0);
  }
  return net;
}

void set_tanh_bounds(Mlp& net, std::vector<double> lo, std::vector<double> hi) {
  if (net.head != Head::TanhBox)
    throw std::invalid_argument("set_tanh_bounds: head is not tanh");
  if (lo.size() != static_cast<std::size_t>(net.output_size()) ||
      hi.size() != lo.size())
    throw std::invalid_argument("set_tanh_bounds: size mismatch");
  // lo == hi pins that output dimension to the constant lo (zero gradient).
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] <= hi[i]))
      throw std::invalid_argument("set_tanh_bounds: lo must be <= hi");
  net.lo = std::move(lo);
  net.hi = std::move(hi);
}

std::vector<double> forward_masked(const Mlp& net, std::span<const double> x,
                                   std::span<const std::uint8_t> allowed,
                                   Tape* tape) {
  check_head_shapes(net);
  if (x.size() != static_cast<std::size_t>(net.input_size()))
    throw std::invalid_argument("forward: input size mismatch");
  if (!allowed.empty()) {
    if (net.head != Head::Softmax)
      throw std::invalid_argument("forward: mask requires softmax head");
    if (allowed.size() != static_cast<std::size_t>(net.output_size()))
      throw std::invalid_argument("forward: mask size mismatch");
  }
  std::vector<double> a(x.begin(), x.end());
  if (tape != nullptr) {
    tape->act.clear();
    tape->pre.clear();
    tape->act.push_back(a);
    tape->mask.assign(allowed.begin(), allowed.end());
  }
  const std::size_t last = net.layers.size() - 1;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& ly = net.layers[l];
    std::vector<double> z(ly.out);
    for (int o = 0; o < ly.out; ++o) {
      double s = ly.b[o];
      const double* row = &ly.w[static_cast<std::size_t>(o) * ly.in];
      for (int i = 0; i < ly.in; ++i) s += row[i] * a[i];
      z[o] = s;
    }
    if (tape != nullptr) tape->pre.push_back(z);
    if (l != last)
      for (double& v : z) v = std::max(v, 0.0);
    a = std::move(z);
    if (tape != nullptr) tape->act.push_back(a);
  }
  std::vector<double> out = apply_head(net, std::move(a), allowed);
  if (tape != nullptr) tape->out = out;
  return out;
}

std::vector<double> forward(const Mlp& net, std::span<const double> x,
                            Tape* tape) {
  return forward_masked(net, x, {}, tape);
}

Grads make_grads(const Mlp& net) {
  Grads g;
  for (const Layer& ly : net.layers) {
    Layer z;
    z.in = ly.in;
    z.out = ly.out;
    z.w.assign(ly.w.size(), 0.0);
    z.b.assign(ly.b.size(), 0.0);
    g.g.push_back(std::move(z));
  }
  g.input.assign(net.input_size(), 0.0);
  return g;
}

void zero_grads(Grads& grads) {
  for (Layer& ly : grads.g) {
    std::fill(ly.w.begin(), ly.w.end(), 0.0);
    std::fill(ly.b.begin(), ly.b.end(), 0.0);
  }
  std::fill(grads.input.begin(), grads.input.end(), 0.0);
}

namespace {

void backprop(const Mlp& net, const Tape& tape, std::vector<double> delta,
              Grads& grads) {
  if (tape.act.size() != net.layers.size() + 1 ||
      tape.pre.size() != net.layers.size())
    throw std::invalid_argument("backward: tape does not match network");
  if (grads.g.size() != net.layers.size())
    throw std::invalid_argument("backward: grads shape mismatch");
  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const Layer& ly = net.layers[l];
    Layer& gl = grads.g[l];
    const std::vector<double>& below = tape.act[l];
    for (int o = 0; o < ly.out; ++o) {
      gl.b[o] += delta[o];
      double* grow = &gl.w[static_cast<std::size_t>(o) * ly.in];
      for (int i = 0; i < ly.in; ++i) grow[i] += delta[o] * below[i];
    }
    std::vector<double> prev(ly.in, 0.0);
    for (int o = 0; o < ly.out; ++o) {
      const double* row = &ly.w[static_cast<std::size_t>(o) * ly.in];
      for (int i = 0; i < ly.in; ++i) prev[i] += row[i] * delta[o];
    }
    if (l > 0) {
      const std::vector<double>& pre_below = tape.pre[l - 1];
      for (int i = 0; i < ly.in; ++i)
        if (pre_below[i] <= 0.0) prev[i] = 0.0;
    }
    delta = std::move(prev);
  }
  for (std::size_t i = 0; i < delta.size(); ++i) grads.input[i] += delta[i];
}

}  // namespace

void backward(const Mlp& net, const Tape& tape,
              std::span<const double> upstream, Grads& grads) {
  if (upstream.size() != static_cast<std::size_t>(net.output_size()))
    throw std::invalid_argument("backward: upstream size mismatch");
  const std::vector<double>& z = tape.pre.back();
  std::vector<double> delta(z.size());
  switch (net.head) {
    case Head::Linear:
      delta.assign(upstream.begin(), upstream.end());
      break;
    case Head::TanhBox:
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double th = std::tanh(z[i]);
        delta[i] = upstream[i] * (net.hi[i] - net.lo[i]) * 0.5 *
                   (1.0 - th * th);
      }
      break;
    case Head::Softmax: {
      const std::vector<double>& p = tape.out;
      double dot = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) dot += upstream[i] * p[i];
      for (std::size_t i = 0; i < p.size(); ++i)
        delta[i] = p[i] * (upstream[i] - dot);
      break;
    }
  }
  backprop(net, tape, std::move(delta), grads);
}

void backward_logits(const Mlp& net, const Tape& tape,
                     std::span<const double> upstream, Grads& grads) {
  if (upstream.size() != static_cast<std::size_t>(net.output_size()))
    throw std::invalid_argument("backward: upstream size mismatch");
  backprop(net, tape, std::vector<double>(upstream.begin(), upstream.end()),
           grads);
}

namespace {

void check_finite(const Grads& grads) {
  for (const Layer& ly : grads.g) {
    for (double v : ly.w)
      if (!std::isfinite(v))
        throw std::runtime_error("optimizer: non-finite gradient");
    for (double v : ly.b)
      if (!std::isfinite(v))
        throw std::runtime_error("optimizer: non-finite gradient");
  }
}

}  // namespace

void sgd_step(Mlp& net, const Grads& grads, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: lr must be > 0");
  check_finite(grads);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& ly = net.layers[l];
    const Layer& gl = grads.g[l];
    for (std::size_t i = 0; i < ly.w.size(); ++i) ly.w[i] -= lr * gl.w[i];
    for (std::size_t i = 0; i < ly.b.size(); ++i) ly.b[i] -= lr * gl.b[i];
  }
}

Adam make_adam(const Mlp& net, double lr) {
  Adam opt;
  opt.lr = lr;
  for (const Layer& ly : net.layers) {
    Layer z;
    z.in = ly.in;
    z.out = ly.out;
    z.w.assign(ly.w.size(), 0.0);
    z.b.assign(ly.b.size(), 0.0);
    opt.m.push_back(z);
    opt.v.push_back(std::move(z));
  }
  return opt;
}

void adam_step(Mlp& net, const Grads& grads, Adam& opt) {
  if (!(opt.lr > 0.0)) throw std::invalid_argument("adam_step: lr must be > 0");
  check_finite(grads);
  ++opt.t;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.t));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.t));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& ly = net.layers[l];
    const Layer& gl = grads.g[l];
    Layer& m = opt.m[l];
    Layer& v = opt.v[l];
    for (std::size_t i = 0; i < ly.w.size(); ++i) {
      m.w[i] = opt.beta1 * m.w[i] + (1.0 - opt.beta1) * gl.w[i];
      v.w[i] = opt.beta2 * v.w[i] + (1.0 - opt.beta2) * gl.w[i] * gl.w[i];
      ly.w[i] -= opt.lr * (m.w[i] / c1) / (std::sqrt(v.w[i] / c2) + opt.eps);
    }
    for (std::size_t i = 0; i < ly.b.size(); ++i) {
      m.b[i] = opt.beta1 * m.b[i] + (1.0 - opt.beta1) * gl.b[i];
      v.b[i] = opt.beta2 * v.b[i] + (1.0 - opt.beta2) * gl.b[i] * gl.b[i];
      ly.b[i] -= opt.lr * (m.b[i] / c1) / (std::sqrt(v.b[i] / c2) + opt.eps);
    }
  }
}

void soft_update(Mlp& target, const Mlp& src, double mix) {
  if (target.layers.size() != src.layers.size())
    throw std::invalid_argument("soft_update: architecture mismatch");
  for (std::size_t l = 0; l < src.layers.size(); ++l) {
    Layer& t = target.layers[l];
    const Layer& s = src.layers[l];
    if (t.w.size() != s.w.size() || t.b.size() != s.b.size())
      throw std::invalid_argument("soft_update: layer shape mismatch");
    for (std::size_t i = 0; i < t.w.size(); ++i)
      t.w[i] = mix * s.w[i] + (1.0 - mix) * t.w[i];
    for (std::size_t i = 0; i < t.b.size(); ++i)
      t.b[i] = mix * s.b[i] + (1.0 - mix) * t.b[i];
  }
}

namespace {

nlohmann::json layer_to_json(const Layer& ly) {
  return {{"in", ly.in}, {"out", ly.out}, {"w", ly.w}, {"b", ly.b}};
}

Layer layer_from_json(const nlohmann::json& j) {
  Layer ly;
  ly.in = j.at("in").get<int>();
  ly.out = j.at("out").get<int>();
  ly.w = j.at("w").get<std::vector<double>>();
  ly.b = j.at("b").get<std::vector<double>>();
  if (ly.w.size() != static_cast<std::size_t>(ly.in) * ly.out ||
      ly.b.size() != static_cast<std::size_t>(ly.out))
    throw std::invalid_argument("checkpoint: layer shape mismatch");
  return ly;
}

}  // namespace

std::string mlp_to_json(const Mlp& net) {
  nlohmann::json j;
  switch (net.head) {
    case Head::Linear: j["head"] = "linear"; break;
    case Head::TanhBox: j["head"] = "tanh-box"; break;
    case Head::Softmax: j["head"] = "softmax"; break;
  }
  j["layers"] = nlohmann::json::array();
  for (const Layer& ly : net.layers) j["layers"].push_back(layer_to_json(ly));
  if (net.head == Head::TanhBox) {
    j["lo"] = net.lo;
    j["hi"] = net.hi;
  }
  return j.dump();
}

Mlp mlp_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Mlp net;
  const std::string head = j.at("head").get<std::string>();
  if (head == "linear") net.head = Head::Linear;
  else if (head == "tanh-box") net.head = Head::TanhBox;
  else if (head == "softmax") net.head = Head::Softmax;
  else throw std::invalid_argument("checkpoint: unknown head " + head);
  for (const auto& lj : j.at("layers"))
    net.layers.push_back(layer_from_json(lj));
  if (net.head == Head::TanhBox) {
    net.lo = j.at("lo").get<std::vector<double>>();
    net.hi = j.at("hi").get<std::vector<double>>();
  }
  check_head_shapes(net);
  return net;
}

std::string adam_to_json(const Adam& opt) {
  nlohmann::json j;
  j["lr"] = opt.lr;
  j["beta1"] = opt.beta1;
  j["beta2"] = opt.beta2;
  j["eps"] = opt.eps;
  j["t"] = opt.t;
  j["m"] = nlohmann::json::array();
  j["v"] = nlohmann::json::array();
  for (const Layer& ly : opt.m) j["m"].push_back(layer_to_json(ly));
  for (const Layer& ly : opt.v) j["v"].push_back(layer_to_json(ly));
  return j.dump();
}

Adam adam_from_json(const std::string& text, const Mlp& net) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Adam opt;
  opt.lr = j.at("lr").get<double>();
  opt.beta1 = j.at("beta1").get<double>();
  opt.beta2 = j.at("beta2").get<double>();
  opt.eps = j.at("eps").get<double>();
  opt.t = j.at("t").get<long long>();
  for (const auto& lj : j.at("m")) opt.m.push_back(layer_from_json(lj));
  for (const auto& lj : j.at("v")) opt.v.push_back(layer_from_json(lj));
  if (opt.m.size() != net.layers.size() || opt.v.size() != net.layers.size())
    throw std::invalid_argument("checkpoint: moments do not match network");
  return opt;
}

}  // namespace wpmec
