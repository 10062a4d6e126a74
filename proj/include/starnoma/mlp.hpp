// Small dense networks with tanh hidden layers, explicit reverse-mode
// gradients, and an Adam optimizer. Everything is plain double vectors; no
// graph machinery beyond the per-forward activation tape.
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "starnoma/rng.hpp"

namespace starnoma {

struct Mlp {
  std::vector<int> sizes;                 // input, hidden..., output
  std::vector<std::vector<double>> w;     // layer i: sizes[i+1] x sizes[i], row-major
  std::vector<std::vector<double>> b;

  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }
  int layer_count() const { return static_cast<int>(sizes.size()) - 1; }

  // Glorot-uniform weights, zero biases.
  static Mlp create(std::vector<int> layer_sizes, Rng& rng) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("Mlp: need input and output sizes");
    Mlp net;
    net.sizes = std::move(layer_sizes);
    for (int i = 0; i + 1 < static_cast<int>(net.sizes.size()); ++i) {
      const int fan_in = net.sizes[i];
      const int fan_out = net.sizes[i + 1];
      const double r = std::sqrt(6.0 / (fan_in + fan_out));
      std::vector<double> wi(static_cast<size_t>(fan_out) * fan_in);
      for (double& x : wi) x = rng.uniform(-r, r);
      net.w.push_back(std::move(wi));
      net.b.emplace_back(fan_out, 0.0);
    }
    return net;
  }

  void scale_output_layer(double factor) {
    for (double& x : w.back()) x *= factor;
  }

  std::vector<double> forward(std::span<const double> input) const {
    if (static_cast<int>(input.size()) != input_size())
      throw std::invalid_argument("Mlp::forward: input length mismatch");
    std::vector<double> cur(input.begin(), input.end());
    for (int i = 0; i < layer_count(); ++i) {
      std::vector<double> next(sizes[i + 1]);
      affine(i, cur, next);
      if (i + 1 < layer_count())
        for (double& x : next) x = std::tanh(x);
      cur = std::move(next);
    }
    return cur;
  }

  void affine(int layer, const std::vector<double>& in, std::vector<double>& out) const {
    const int rows = sizes[layer + 1];
    const int cols = sizes[layer];
    const double* wp = w[layer].data();
    for (int r = 0; r < rows; ++r) {
      double acc = b[layer][r];
      const double* row = wp + static_cast<size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) acc += row[c] * in[c];
      out[r] = acc;
    }
  }
};

// Post-activation values per layer; act[0] is the input, act[L] the output.
struct MlpTape {
  std::vector<std::vector<double>> act;
};

inline const std::vector<double>& forward(const Mlp& net, std::span<const double> input,
                                          MlpTape& tape) {
  if (static_cast<int>(input.size()) != net.input_size())
    throw std::invalid_argument("forward: input length mismatch");
  tape.act.assign(net.layer_count() + 1, {});
  tape.act[0].assign(input.begin(), input.end());
  for (int i = 0; i < net.layer_count(); ++i) {
    tape.act[i + 1].resize(net.sizes[i + 1]);
    net.affine(i, tape.act[i], tape.act[i + 1]);
    if (i + 1 < net.layer_count())
      for (double& x : tape.act[i + 1]) x = std::tanh(x);
  }
  return tape.act.back();
}

struct MlpGrad {
  std::vector<std::vector<double>> w, b;

  static MlpGrad zeros_like(const Mlp& net) {
    MlpGrad g;
    for (int i = 0; i < net.layer_count(); ++i) {
      g.w.emplace_back(net.w[i].size(), 0.0);
      g.b.emplace_back(net.b[i].size(), 0.0);
    }
    return g;
  }

  void scale(double s) {
    for (auto& v : w)
      for (double& x : v) x *= s;
    for (auto& v : b)
      for (double& x : v) x *= s;
  }
};

// Accumulates dLoss/dparams into `accum` given dLoss/doutput; optionally
// returns dLoss/dinput. Uses post-activation values for the tanh derivative.
inline void backward(const Mlp& net, const MlpTape& tape, std::span<const double> d_output,
                     MlpGrad& accum, std::vector<double>* d_input = nullptr) {
  if (static_cast<int>(d_output.size()) != net.output_size())
    throw std::invalid_argument("backward: output gradient length mismatch");
  std::vector<double> delta(d_output.begin(), d_output.end());
  for (int i = net.layer_count() - 1; i >= 0; --i) {
    const int rows = net.sizes[i + 1];
    const int cols = net.sizes[i];
    if (i + 1 < net.layer_count()) {
      const auto& post = tape.act[i + 1];
      for (int r = 0; r < rows; ++r) delta[r] *= 1.0 - post[r] * post[r];
    }
    const auto& in = tape.act[i];
    double* gw = accum.w[i].data();
    for (int r = 0; r < rows; ++r) {
      accum.b[i][r] += delta[r];
      double* grow = gw + static_cast<size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) grow[c] += delta[r] * in[c];
    }
    if (i > 0 || d_input != nullptr) {
      std::vector<double> prev(cols, 0.0);
      const double* wp = net.w[i].data();
      for (int r = 0; r < rows; ++r) {
        const double* row = wp + static_cast<size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) prev[c] += row[c] * delta[r];
      }
      if (i == 0 && d_input != nullptr) *d_input = prev;
      delta = std::move(prev);
    }
  }
}

inline std::vector<std::vector<double>*> parameter_refs(Mlp& net) {
  std::vector<std::vector<double>*> refs;
  for (size_t i = 0; i < net.w.size(); ++i) {
    refs.push_back(&net.w[i]);
    refs.push_back(&net.b[i]);
  }
  return refs;
}

inline std::vector<const std::vector<double>*> gradient_refs(const MlpGrad& g) {
  std::vector<const std::vector<double>*> refs;
  for (size_t i = 0; i < g.w.size(); ++i) {
    refs.push_back(&g.w[i]);
    refs.push_back(&g.b[i]);
  }
  return refs;
}

class Adam {
 public:
  Adam() = default;

  explicit Adam(const std::vector<std::vector<double>*>& params) {
    for (const auto* p : params) {
      m_.emplace_back(p->size(), 0.0);
      v_.emplace_back(p->size(), 0.0);
    }
  }

  void step(double lr, const std::vector<std::vector<double>*>& params,
            const std::vector<const std::vector<double>*>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
      throw std::invalid_argument("Adam::step: parameter list mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
      auto& p = *params[i];
      const auto& g = *grads[i];
      for (size_t j = 0; j < p.size(); ++j) {
        m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g[j];
        v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g[j] * g[j];
        const double mhat = m_[i][j] / bc1;
        const double vhat = v_[i][j] / bc2;
        p[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

 private:
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace starnoma
