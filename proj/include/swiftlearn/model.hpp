#pragma once

// Minimal differentiable models: a linear softmax classifier and a
// one-hidden-layer MLP with hand-written forward/backward, cross-entropy
// loss, and plain SGD. Double precision throughout; no framework.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swiftlearn/core.hpp"
#include "swiftlearn/data.hpp"
#include "swiftlearn/metric.hpp"
#include "swiftlearn/scheduler.hpp"

namespace swiftlearn {

enum class Activation { Identity, ReLU, Tanh };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "?";
}

struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out
  Activation act = Activation::Identity;
};

/// Stack of dense layers; consecutive dimensions chain and the final
/// activation is Identity, so the output is raw logits.
struct DenseModel {
  std::vector<Layer> layers;

  std::size_t input_dim() const { return layers.front().in; }
  std::size_t output_dim() const { return layers.back().out; }
};

inline DenseModel make_linear(std::size_t in, std::size_t out) {
  DenseModel m;
  m.layers.push_back(Layer{in, out, std::vector<double>(out * in, 0.0),
                           std::vector<double>(out, 0.0), Activation::Identity});
  return m;
}

inline DenseModel make_mlp(std::size_t in, std::size_t hidden, std::size_t out,
                           Activation hidden_act = Activation::ReLU) {
  DenseModel m;
  m.layers.push_back(Layer{in, hidden, std::vector<double>(hidden * in, 0.0),
                           std::vector<double>(hidden, 0.0), hidden_act});
  m.layers.push_back(Layer{hidden, out, std::vector<double>(out * hidden, 0.0),
                           std::vector<double>(out, 0.0), Activation::Identity});
  return m;
}

/// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] from the given
/// stream; biases zero.
inline void init_weights(DenseModel& m, Rng& rng) {
  for (Layer& layer : m.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (double& w : layer.w) w = bound * (2.0 * uniform_unit(rng) - 1.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
}

/// FNV-1a over the raw bytes of all parameters, in layer order. Two models
/// hash equal iff their parameters are bit-identical.
inline std::uint64_t param_hash(const DenseModel& m) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::vector<double>& values) {
    for (double v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      for (int byte = 0; byte < 8; ++byte) {
        h ^= static_cast<unsigned char>(bits >> (8 * byte));
        h *= 1099511628211ull;
      }
    }
  };
  for (const Layer& layer : m.layers) {
    mix(layer.w);
    mix(layer.b);
  }
  return h;
}

namespace detail {

inline double apply_act(Activation a, double z) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Tanh: return std::tanh(z);
  }
  return z;
}

// Derivative expressed through the activation value (cheap for tanh).
inline double act_grad(Activation a, double z, double value) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: return 1.0 - value * value;
  }
  return 1.0;
}

}  // namespace detail

/// Deterministic affine + activation composition; returns unnormalized
/// logits. Pure.
inline std::vector<double> forward(const DenseModel& m,
                                   std::span<const double> x) {
  if (m.layers.empty()) throw std::invalid_argument("forward: empty model");
  if (x.size() != m.input_dim())
    throw std::invalid_argument("forward: input has dimension " +
                                std::to_string(x.size()) + ", model expects " +
                                std::to_string(m.input_dim()));
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> z;
  for (const Layer& layer : m.layers) {
    if (a.size() != layer.in)
      throw std::invalid_argument("forward: layer dimensions do not chain");
    z.assign(layer.out, 0.0);
    for (std::size_t j = 0; j < layer.out; ++j) {
      double acc = layer.b[j];
      const double* wrow = layer.w.data() + j * layer.in;
      for (std::size_t k = 0; k < layer.in; ++k) acc += wrow[k] * a[k];
      z[j] = detail::apply_act(layer.act, acc);
    }
    a.swap(z);
  }
  return a;
}

/// Parameter-shaped gradient accumulator.
struct Gradients {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  explicit Gradients(const DenseModel& m) {
    w.reserve(m.layers.size());
    b.reserve(m.layers.size());
    for (const Layer& layer : m.layers) {
      w.emplace_back(layer.w.size(), 0.0);
      b.emplace_back(layer.b.size(), 0.0);
    }
  }
};

struct BatchResult {
  double loss = 0.0;           // mean cross-entropy over the batch
  Gradients grad;              // d(mean loss)/d(params)
  std::vector<double> logits;  // batch x output_dim, row-major
};

/// Mean softmax cross-entropy and its gradients by backpropagation over one
/// mini-batch of dataset rows.
inline BatchResult loss_and_grad(const DenseModel& m, const Dataset& data,
                                 std::span<const SampleId> batch) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  const std::size_t n_classes = m.output_dim();
  const std::size_t n_layers = m.layers.size();

  BatchResult result{0.0, Gradients(m), {}};
  result.logits.reserve(batch.size() * n_classes);

  // Per-sample forward keeps pre-activations and activations for backprop.
  std::vector<std::vector<double>> pre(n_layers);
  std::vector<std::vector<double>> act(n_layers + 1);
  std::vector<double> delta, delta_prev, probs;

  for (SampleId id : batch) {
    if (id >= data.n)
      throw std::out_of_range("loss_and_grad: sample id " + std::to_string(id) +
                              " out of range [0, " + std::to_string(data.n) + ")");
    const int label = data.labels[id];
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes)
      throw std::invalid_argument(
          "loss_and_grad: label " + std::to_string(label) + " of sample " +
          std::to_string(id) + " outside [0, " + std::to_string(n_classes) + ")");

    const auto x = data.row(id);
    act[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < n_layers; ++l) {
      const Layer& layer = m.layers[l];
      if (act[l].size() != layer.in)
        throw std::invalid_argument("loss_and_grad: layer dimensions do not chain");
      pre[l].assign(layer.out, 0.0);
      act[l + 1].assign(layer.out, 0.0);
      for (std::size_t j = 0; j < layer.out; ++j) {
        double acc = layer.b[j];
        const double* wrow = layer.w.data() + j * layer.in;
        for (std::size_t k = 0; k < layer.in; ++k) acc += wrow[k] * act[l][k];
        pre[l][j] = acc;
        act[l + 1][j] = detail::apply_act(layer.act, acc);
      }
    }

    const std::vector<double>& logits = act[n_layers];
    result.logits.insert(result.logits.end(), logits.begin(), logits.end());

    // Stable softmax cross-entropy.
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum_exp = 0.0;
    probs.assign(n_classes, 0.0);
    for (std::size_t j = 0; j < n_classes; ++j) {
      probs[j] = std::exp(logits[j] - max_logit);
      sum_exp += probs[j];
    }
    const double lse = max_logit + std::log(sum_exp);
    result.loss += lse - logits[static_cast<std::size_t>(label)];
    for (double& p : probs) p /= sum_exp;

    // delta = dL/d(pre-activation of the output layer); final act is Identity.
    delta = probs;
    delta[static_cast<std::size_t>(label)] -= 1.0;

    for (std::size_t l = n_layers; l-- > 0;) {
      const Layer& layer = m.layers[l];
      std::vector<double>& gw = result.grad.w[l];
      std::vector<double>& gb = result.grad.b[l];
      for (std::size_t j = 0; j < layer.out; ++j) {
        const double dj = delta[j];
        double* gwrow = gw.data() + j * layer.in;
        for (std::size_t k = 0; k < layer.in; ++k) gwrow[k] += dj * act[l][k];
        gb[j] += dj;
      }
      if (l == 0) break;
      const Layer& below = m.layers[l - 1];
      delta_prev.assign(layer.in, 0.0);
      for (std::size_t j = 0; j < layer.out; ++j) {
        const double dj = delta[j];
        const double* wrow = layer.w.data() + j * layer.in;
        for (std::size_t k = 0; k < layer.in; ++k)
          delta_prev[k] += wrow[k] * dj;
      }
      for (std::size_t k = 0; k < layer.in; ++k)
        delta_prev[k] *=
            detail::act_grad(below.act, pre[l - 1][k], act[l][k]);
      delta.swap(delta_prev);
    }
  }

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  result.loss *= inv_b;
  for (auto& g : result.grad.w)
    for (double& v : g) v *= inv_b;
  for (auto& g : result.grad.b)
    for (double& v : g) v *= inv_b;
  return result;
}

struct SgdConfig {
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  bool shuffle = true;
};

inline std::optional<std::string> sgd_config_error(const SgdConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    return "learning_rate must be finite and > 0, got " +
           std::to_string(cfg.learning_rate);
  if (cfg.batch_size == 0) return "batch_size must be >= 1, got 0";
  return std::nullopt;
}

/// One pass of mini-batch SGD over `ids`.
///
/// The ids are sorted, then shuffled with the supplied stream, so the visit
/// order depends only on (id set, stream), not on the order the caller
/// produced the ids in. Each trained sample's logits from its training
/// forward pass are recorded into `store` (when given), and the ledger is
/// charged |ids| forward and |ids| backward passes. Returns the epoch mean
/// loss.
inline double train_epoch(DenseModel& m, const Dataset& data,
                          std::span<const SampleId> ids, const SgdConfig& sgd,
                          Rng& shuffle_rng, LogitStore* store,
                          StepLedger& ledger, std::int64_t epoch) {
  if (ids.empty()) throw std::invalid_argument("train_epoch: empty id set");
  if (sgd.batch_size == 0) throw std::invalid_argument("train_epoch: batch_size must be >= 1");

  std::vector<SampleId> order(ids.begin(), ids.end());
  std::sort(order.begin(), order.end());
  if (sgd.shuffle) shuffle_in_place(order, shuffle_rng);

  const std::size_t n_classes = m.output_dim();
  double loss_sum = 0.0;
  for (std::size_t begin = 0; begin < order.size(); begin += sgd.batch_size) {
    const std::size_t end = std::min(begin + sgd.batch_size, order.size());
    const std::span<const SampleId> batch(order.data() + begin, end - begin);
    BatchResult r = loss_and_grad(m, data, batch);

    if (store) {
      for (std::size_t i = 0; i < batch.size(); ++i)
        store->record(batch[i],
                      {r.logits.data() + i * n_classes, n_classes}, epoch);
    }

    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      Layer& layer = m.layers[l];
      const std::vector<double>& gw = r.grad.w[l];
      const std::vector<double>& gb = r.grad.b[l];
      for (std::size_t i = 0; i < layer.w.size(); ++i)
        layer.w[i] -= sgd.learning_rate * gw[i];
      for (std::size_t i = 0; i < layer.b.size(); ++i)
        layer.b[i] -= sgd.learning_rate * gb[i];
    }
    loss_sum += r.loss * static_cast<double>(batch.size());
  }

  ledger.train_forwards += order.size();
  ledger.train_backwards += order.size();
  return loss_sum / static_cast<double>(order.size());
}

/// Forward-only pass recording each sample's logits at the current
/// parameters (the uniform snapshot used by metric re-evaluation). The
/// caller charges the pass to the appropriate ledger counter.
inline void record_snapshot(const DenseModel& m, const Dataset& data,
                            std::span<const SampleId> ids, LogitStore& store,
                            std::int64_t epoch) {
  for (SampleId id : ids) store.record(id, forward(m, data.row(id)), epoch);
}

/// Fraction of samples whose argmax logit equals the label. Never mutates
/// parameters.
inline double evaluate(const DenseModel& m, const Dataset& data,
                       std::span<const SampleId> ids) {
  if (ids.empty()) throw std::invalid_argument("evaluate: empty id set");
  std::size_t correct = 0;
  for (SampleId id : ids) {
    const std::vector<double> logits = forward(m, data.row(id));
    const std::size_t pred = static_cast<std::size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (static_cast<int>(pred) == data.labels[id]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ids.size());
}

// ---------------------------------------------------------------------------
// Checkpoints: plain text, hex floats for exact round-trips. Layout: a magic
// line, the layer count, then per layer a "layer <in> <out> <activation>"
// header followed by <out> weight rows and one bias row.

inline void save_model(const DenseModel& m, std::ostream& out) {
  out << "swiftlearn-model 1\n";
  out << m.layers.size() << '\n';
  char buf[48];
  for (const Layer& layer : m.layers) {
    out << "layer " << layer.in << ' ' << layer.out << ' '
        << to_string(layer.act) << '\n';
    for (std::size_t j = 0; j < layer.out; ++j) {
      for (std::size_t k = 0; k < layer.in; ++k) {
        std::snprintf(buf, sizeof(buf), "%a", layer.w[j * layer.in + k]);
        out << buf << (k + 1 == layer.in ? '\n' : ' ');
      }
    }
    for (std::size_t j = 0; j < layer.out; ++j) {
      std::snprintf(buf, sizeof(buf), "%a", layer.b[j]);
      out << buf << (j + 1 == layer.out ? '\n' : ' ');
    }
  }
}

inline void save_model(const DenseModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open '" + path + "'");
  save_model(m, out);
  if (!out) throw std::runtime_error("save_model: write failed for '" + path + "'");
}

inline DenseModel load_model(std::istream& in) {
  std::string magic, word;
  int version = 0;
  in >> magic >> version;
  if (magic != "swiftlearn-model" || version != 1)
    throw std::runtime_error("load_model: unrecognized checkpoint header");
  std::size_t n_layers = 0;
  in >> n_layers;
  DenseModel m;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Layer layer;
    std::string act;
    in >> word >> layer.in >> layer.out >> act;
    if (word != "layer" || !in)
      throw std::runtime_error("load_model: malformed layer header");
    if (act == "identity") layer.act = Activation::Identity;
    else if (act == "relu") layer.act = Activation::ReLU;
    else if (act == "tanh") layer.act = Activation::Tanh;
    else throw std::runtime_error("load_model: unknown activation '" + act + "'");
    layer.w.resize(layer.in * layer.out);
    layer.b.resize(layer.out);
    // istream double extraction does not accept hex floats; go through strtod.
    auto read_value = [&in](double& v) {
      std::string token;
      if (!(in >> token))
        throw std::runtime_error("load_model: truncated checkpoint");
      char* end = nullptr;
      v = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0')
        throw std::runtime_error("load_model: bad parameter value '" + token + "'");
    };
    for (double& v : layer.w) read_value(v);
    for (double& v : layer.b) read_value(v);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

inline DenseModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open '" + path + "'");
  return load_model(in);
}

}  // namespace swiftlearn
