#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace antijam::qnet {

enum class Head : std::uint8_t { Standard = 0, Dueling = 1 };

struct NetArch {
  std::size_t input_dim = 8;
  std::array<std::size_t, 2> hidden_dims{64, 64};
  std::size_t output_dim = 8;
  Head head = Head::Standard;

  void validate() const;
  bool operator==(const NetArch&) const = default;
};

// Fully connected layer, weights stored row-major as [out][in].
struct DenseLayer {
  std::size_t out = 0;
  std::size_t in = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t row, std::size_t col) { return weights[row * in + col]; }
  double w(std::size_t row, std::size_t col) const { return weights[row * in + col]; }
  bool operator==(const DenseLayer&) const = default;
};

// Layer order: Standard = {hidden1, hidden2, output};
// Dueling = {hidden1, hidden2, value (1 unit), advantage (output_dim units)}.
struct QParams {
  NetArch arch;
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
  // Every weight and bias array, in declared layer order (weights before bias).
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;
  bool operator==(const QParams&) const = default;
};

// Gradients share the parameter layout.
using GradBundle = QParams;

GradBundle zeros_like(const QParams& params);

// Weights ~ Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)), biases zero.
QParams init_params(const NetArch& arch, std::uint64_t seed);

std::vector<double> forward(const QParams& params, std::span<const double> state);

struct TdLossResult {
  double loss = 0.0;
  GradBundle grads;
  // y_i - Q(s_i, a_i) per sample, evaluated before any update.
  std::vector<double> residuals;
};

// loss = (1/K) sum_i w_i (y_i - Q(s_i, a_i))^2 with analytic gradients.
TdLossResult td_loss(const QParams& params, std::span<const std::vector<double>> states,
                     std::span<const std::size_t> actions, std::span<const double> targets,
                     std::span<const double> weights);

// p <- p - eta * g, in place.
void sgd_step(QParams& params, const GradBundle& grads, double eta);

// Maps received power in dBm onto the network's input scale: (p + 100) / 100,
// clamped to [0, 1.3].
std::vector<double> normalize_powers(std::span<const double> powers_dbm);

// Binary container: 8-byte magic "AJQNET\0\0", version byte, arch descriptor,
// then every layer as (u32 out, u32 in, weights f64[out*in], bias f64[out]).
// Integers and doubles little-endian.
inline constexpr std::array<char, 8> kContainerMagic{'A', 'J', 'Q', 'N', 'E', 'T', '\0', '\0'};
inline constexpr std::uint8_t kContainerVersion = 1;

void write_params(std::ostream& out, const QParams& params);
// Throws std::runtime_error on bad magic, version, truncation or an arch that
// differs from `expected` when one is given.
QParams read_params(std::istream& in, const std::optional<NetArch>& expected = std::nullopt);

}  // namespace antijam::qnet
