#include "antijam/qnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "antijam/errors.hpp"
#include "antijam/rng.hpp"

namespace antijam::qnet {

namespace {

DenseLayer make_layer(std::size_t out, std::size_t in) {
  return DenseLayer{out, in, std::vector<double>(out * in, 0.0), std::vector<double>(out, 0.0)};
}

std::vector<DenseLayer> layer_shapes(const NetArch& arch) {
  std::vector<DenseLayer> layers;
  layers.push_back(make_layer(arch.hidden_dims[0], arch.input_dim));
  layers.push_back(make_layer(arch.hidden_dims[1], arch.hidden_dims[0]));
  if (arch.head == Head::Standard) {
    layers.push_back(make_layer(arch.output_dim, arch.hidden_dims[1]));
  } else {
    layers.push_back(make_layer(1, arch.hidden_dims[1]));
    layers.push_back(make_layer(arch.output_dim, arch.hidden_dims[1]));
  }
  return layers;
}

void affine(const DenseLayer& layer, std::span<const double> x, std::span<double> z) {
  for (std::size_t r = 0; r < layer.out; ++r) {
    const double* row = &layer.weights[r * layer.in];
    double acc = layer.bias[r];
    for (std::size_t c = 0; c < layer.in; ++c) acc += row[c] * x[c];
    z[r] = acc;
  }
}

struct Cache {
  std::vector<double> z1, h1, z2, h2;
  std::vector<double> q;
};

void forward_cached(const QParams& params, std::span<const double> state, Cache& cache) {
  const NetArch& arch = params.arch;
  if (state.size() != arch.input_dim) {
    throw UsageError("state length " + std::to_string(state.size()) + " != input_dim " +
                     std::to_string(arch.input_dim));
  }
  cache.z1.resize(arch.hidden_dims[0]);
  cache.h1.resize(arch.hidden_dims[0]);
  cache.z2.resize(arch.hidden_dims[1]);
  cache.h2.resize(arch.hidden_dims[1]);
  cache.q.resize(arch.output_dim);

  affine(params.layers[0], state, cache.z1);
  for (std::size_t i = 0; i < cache.z1.size(); ++i) cache.h1[i] = std::max(0.0, cache.z1[i]);
  affine(params.layers[1], cache.h1, cache.z2);
  for (std::size_t i = 0; i < cache.z2.size(); ++i) cache.h2[i] = std::max(0.0, cache.z2[i]);

  if (arch.head == Head::Standard) {
    affine(params.layers[2], cache.h2, cache.q);
    return;
  }
  double value = 0.0;
  affine(params.layers[2], cache.h2, std::span<double>(&value, 1));
  affine(params.layers[3], cache.h2, cache.q);
  double mean_adv = 0.0;
  for (double a : cache.q) mean_adv += a;
  mean_adv /= static_cast<double>(cache.q.size());
  for (double& a : cache.q) a = value + a - mean_adv;
}

// grad_out: dL/dz of this layer; accumulates dW, db and writes dL/dx into grad_in
// when given.
void backprop_layer(const DenseLayer& layer, std::span<const double> x,
                    std::span<const double> grad_out, DenseLayer& grad,
                    std::span<double> grad_in) {
  for (std::size_t r = 0; r < layer.out; ++r) {
    const double g = grad_out[r];
    if (g == 0.0) continue;
    grad.bias[r] += g;
    double* grow = &grad.weights[r * layer.in];
    for (std::size_t c = 0; c < layer.in; ++c) grow[c] += g * x[c];
  }
  if (grad_in.empty()) return;
  std::fill(grad_in.begin(), grad_in.end(), 0.0);
  for (std::size_t r = 0; r < layer.out; ++r) {
    const double g = grad_out[r];
    if (g == 0.0) continue;
    const double* row = &layer.weights[r * layer.in];
    for (std::size_t c = 0; c < layer.in; ++c) grad_in[c] += g * row[c];
  }
}

void check_same_shape(const QParams& a, const QParams& b) {
  if (a.arch != b.arch || a.layers.size() != b.layers.size()) {
    throw UsageError("parameter/gradient shape mismatch");
  }
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].out != b.layers[i].out || a.layers[i].in != b.layers[i].in ||
        a.layers[i].weights.size() != b.layers[i].weights.size() ||
        a.layers[i].bias.size() != b.layers[i].bias.size()) {
      throw UsageError("parameter/gradient shape mismatch");
    }
  }
}

// The container is little-endian; values are written in host order.
static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw std::runtime_error("model container truncated");
  }
  return value;
}

}  // namespace

void NetArch::validate() const {
  if (input_dim == 0 || output_dim == 0 || hidden_dims[0] == 0 || hidden_dims[1] == 0) {
    throw std::invalid_argument("network dimensions must be positive");
  }
  if (head != Head::Standard && head != Head::Dueling) throw std::invalid_argument("unknown head");
}

std::size_t QParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<std::span<double>> QParams::tensors() {
  std::vector<std::span<double>> out;
  for (auto& l : layers) {
    out.emplace_back(l.weights);
    out.emplace_back(l.bias);
  }
  return out;
}

std::vector<std::span<const double>> QParams::tensors() const {
  std::vector<std::span<const double>> out;
  for (const auto& l : layers) {
    out.emplace_back(l.weights);
    out.emplace_back(l.bias);
  }
  return out;
}

GradBundle zeros_like(const QParams& params) { return GradBundle{params.arch, layer_shapes(params.arch)}; }

QParams init_params(const NetArch& arch, std::uint64_t seed) {
  arch.validate();
  QParams params{arch, layer_shapes(arch)};
  Rng rng(seed);
  for (auto& layer : params.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in));
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
  }
  return params;
}

std::vector<double> forward(const QParams& params, std::span<const double> state) {
  Cache cache;
  forward_cached(params, state, cache);
  return std::move(cache.q);
}

TdLossResult td_loss(const QParams& params, std::span<const std::vector<double>> states,
                     std::span<const std::size_t> actions, std::span<const double> targets,
                     std::span<const double> weights) {
  const std::size_t k = states.size();
  if (k == 0) throw UsageError("td_loss on an empty batch");
  if (actions.size() != k || targets.size() != k || weights.size() != k) {
    throw UsageError("td_loss batch arrays differ in length");
  }
  const NetArch& arch = params.arch;
  const bool dueling = arch.head == Head::Dueling;

  TdLossResult result;
  result.grads = zeros_like(params);
  result.residuals.resize(k);

  Cache cache;
  std::vector<double> dq(arch.output_dim);
  std::vector<double> dh2(arch.hidden_dims[1]), dz2(arch.hidden_dims[1]);
  std::vector<double> dh1(arch.hidden_dims[0]), dz1(arch.hidden_dims[0]);
  std::vector<double> dh2_extra(arch.hidden_dims[1]);
  const double inv_k = 1.0 / static_cast<double>(k);

  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t a = actions[i];
    if (a >= arch.output_dim) throw UsageError("action index out of range in td_loss");
    forward_cached(params, states[i], cache);
    const double residual = targets[i] - cache.q[a];
    result.residuals[i] = residual;
    result.loss += weights[i] * residual * residual * inv_k;

    // dL/dq_a = -2 w (y - q) / K; zero for every other action.
    const double g = -2.0 * weights[i] * residual * inv_k;
    if (g == 0.0) continue;
    std::fill(dq.begin(), dq.end(), 0.0);
    dq[a] = g;

    if (!dueling) {
      backprop_layer(params.layers[2], cache.h2, dq, result.grads.layers[2], dh2);
    } else {
      // q_j = V + A_j - mean(A): dV = sum_j dq_j, dA_j = dq_j - mean(dq).
      const double dv = g;
      const double mean_dq = g / static_cast<double>(arch.output_dim);
      for (double& d : dq) d -= mean_dq;
      backprop_layer(params.layers[2], cache.h2, std::span<const double>(&dv, 1),
                     result.grads.layers[2], dh2);
      backprop_layer(params.layers[3], cache.h2, dq, result.grads.layers[3], dh2_extra);
      for (std::size_t j = 0; j < dh2.size(); ++j) dh2[j] += dh2_extra[j];
    }
    for (std::size_t j = 0; j < dz2.size(); ++j) dz2[j] = cache.z2[j] > 0.0 ? dh2[j] : 0.0;
    backprop_layer(params.layers[1], cache.h1, dz2, result.grads.layers[1], dh1);
    for (std::size_t j = 0; j < dz1.size(); ++j) dz1[j] = cache.z1[j] > 0.0 ? dh1[j] : 0.0;
    backprop_layer(params.layers[0], states[i], dz1, result.grads.layers[0], {});
  }
  return result;
}

void sgd_step(QParams& params, const GradBundle& grads, double eta) {
  if (!(eta > 0.0)) throw UsageError("learning rate must be > 0");
  check_same_shape(params, grads);
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    auto& p = params.layers[i];
    const auto& g = grads.layers[i];
    for (std::size_t j = 0; j < p.weights.size(); ++j) p.weights[j] -= eta * g.weights[j];
    for (std::size_t j = 0; j < p.bias.size(); ++j) p.bias[j] -= eta * g.bias[j];
  }
}

std::vector<double> normalize_powers(std::span<const double> powers_dbm) {
  std::vector<double> out(powers_dbm.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp((powers_dbm[i] + 100.0) / 100.0, 0.0, 1.3);
  }
  return out;
}

void write_params(std::ostream& out, const QParams& params) {
  out.write(kContainerMagic.data(), kContainerMagic.size());
  put<std::uint8_t>(out, kContainerVersion);
  const NetArch& arch = params.arch;
  put<std::uint8_t>(out, static_cast<std::uint8_t>(arch.head));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(arch.input_dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(arch.hidden_dims[0]));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(arch.hidden_dims[1]));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(arch.output_dim));
  for (const auto& layer : params.layers) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.out));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.in));
    for (double w : layer.weights) put<double>(out, w);
    for (double b : layer.bias) put<double>(out, b);
  }
}

QParams read_params(std::istream& in, const std::optional<NetArch>& expected) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size())) throw std::runtime_error("model container truncated");
  if (magic != kContainerMagic) throw std::runtime_error("not a Q-network container (bad magic)");
  const auto version = get<std::uint8_t>(in);
  if (version != kContainerVersion) {
    throw std::runtime_error("unsupported container version " + std::to_string(version));
  }
  NetArch arch;
  const auto head = get<std::uint8_t>(in);
  if (head > 1) throw std::runtime_error("unknown network head in container");
  arch.head = static_cast<Head>(head);
  arch.input_dim = get<std::uint32_t>(in);
  arch.hidden_dims[0] = get<std::uint32_t>(in);
  arch.hidden_dims[1] = get<std::uint32_t>(in);
  arch.output_dim = get<std::uint32_t>(in);
  try {
    arch.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("invalid arch in container: ") + e.what());
  }
  if (expected && *expected != arch) {
    throw std::runtime_error(std::string("architecture mismatch: container holds ") +
                             (arch.head == Head::Dueling ? "dueling" : "standard") + " " +
                             std::to_string(arch.input_dim) + "-" +
                             std::to_string(arch.hidden_dims[0]) + "-" +
                             std::to_string(arch.hidden_dims[1]) + "-" +
                             std::to_string(arch.output_dim));
  }
  QParams params{arch, layer_shapes(arch)};
  for (auto& layer : params.layers) {
    const auto rows = get<std::uint32_t>(in);
    const auto cols = get<std::uint32_t>(in);
    if (rows != layer.out || cols != layer.in) {
      throw std::runtime_error("layer shape in container disagrees with its arch descriptor");
    }
    for (double& w : layer.weights) w = get<double>(in);
    for (double& b : layer.bias) b = get<double>(in);
  }
  for (const auto t : params.tensors()) {
    for (double v : t) {
      if (!std::isfinite(v)) throw std::runtime_error("non-finite parameter in container");
    }
  }
  return params;
}

}  // namespace antijam::qnet
