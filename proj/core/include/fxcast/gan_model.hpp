#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fxcast/autodiff.hpp"
#include "fxcast/rng.hpp"

namespace fxcast::gan {

/// Condition features per day: volume, open, high, low, close.
inline constexpr std::size_t kFeatureCount = 5;
/// Generated candidate: next-day open, high, low, close.
inline constexpr std::size_t kOutputDim = 4;

struct GeneratorConfig {
  /// Rows of the (pipeline-space) condition matrix.
  std::size_t condition_window = 5;
  std::size_t feature_count = kFeatureCount;
  std::size_t noise_dim = 8;
  std::size_t lstm_hidden = 32;
  std::size_t output_dim = kOutputDim;

  void validate() const;
  bool operator==(const GeneratorConfig&) const = default;
};

struct ConvLayerConfig {
  std::size_t out_channels = 16;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 0;

  bool operator==(const ConvLayerConfig&) const = default;
};

struct DiscriminatorConfig {
  std::vector<ConvLayerConfig> conv_layers = {{16, 3, 1, 0}, {32, 3, 1, 0}};
  double dropout_rate = 0.3;

  void validate() const;
  bool operator==(const DiscriminatorConfig&) const = default;
};

struct GanConfig {
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;

  void validate() const;
  /// Time steps the discriminator convolves over: the condition plus the
  /// candidate day.
  std::size_t discriminator_steps() const { return generator.condition_window + 1; }
  /// Flattened width entering the discriminator head; throws config if the
  /// conv stack shrinks the sequence below one step.
  std::size_t discriminator_head_inputs() const;

  bool operator==(const GanConfig&) const = default;
};

enum class GeneratorLossMode { saturating, non_saturating };

// ---------------------------------------------------------------------------
// LSTM cell
// ---------------------------------------------------------------------------

/// Gate blocks in `weight` columns and `bias` are ordered i, f, g, o.
struct LstmParams {
  ad::Tensor weight;  // [input + hidden, 4 * hidden]
  ad::Tensor bias;    // [4 * hidden]

  std::size_t hidden() const { return bias.size() / 4; }
  std::size_t input() const { return weight.shape()[0] - hidden(); }
};

struct LstmState {
  ad::Tensor h;  // [B, hidden]
  ad::Tensor c;  // [B, hidden]
};

/// i, f, o = sigmoid(.), g = tanh(.), c' = f*c + i*g, h' = o*tanh(c').
LstmState lstm_cell(const ad::Tensor& x, const LstmState& state, const LstmParams& params);

// ---------------------------------------------------------------------------
// Conditional GAN
// ---------------------------------------------------------------------------

struct NamedParameter {
  std::string name;
  ad::Tensor tensor;
};

/// LSTM generator and dropout-regularised conv discriminator.
///
/// Condition tensors are [B, condition_window, feature_count], time-major.
/// The generator runs the LSTM over the window, concatenates its last hidden
/// state with the noise vector and projects to the four outputs. The
/// discriminator appends the candidate as one more time step (volume channel
/// zero, since candidates carry no volume) and convolves over time.
class GanModel {
 public:
  GanModel(GanConfig config, std::uint64_t seed);

  // Parameters are shared tensor handles; copying would alias them.
  GanModel(const GanModel&) = delete;
  GanModel& operator=(const GanModel&) = delete;
  GanModel(GanModel&&) = default;
  GanModel& operator=(GanModel&&) = default;

  const GanConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t epoch() const noexcept { return epoch_; }
  void set_epoch(std::uint64_t epoch) noexcept { epoch_ = epoch; }

  std::vector<ad::Tensor>& generator_parameters() noexcept { return theta_g_; }
  std::vector<ad::Tensor>& discriminator_parameters() noexcept { return theta_d_; }
  const std::vector<ad::Tensor>& generator_parameters() const noexcept { return theta_g_; }
  const std::vector<ad::Tensor>& discriminator_parameters() const noexcept { return theta_d_; }

  /// Generator parameters first, then discriminator, in a fixed order.
  std::vector<NamedParameter> named_parameters() const;
  std::size_t parameter_count() const;
  static std::size_t parameter_count(const GanConfig& config);

  /// [B, window, features] x [B, noise] -> [B, 4].
  ad::Tensor generate(const ad::Tensor& condition, const ad::Tensor& noise) const;

  /// [B, window, features] x [B, 4] -> [B, 1] probabilities in (0, 1).
  /// `rng` is consumed only in training mode.
  ad::Tensor discriminate(const ad::Tensor& condition, const ad::Tensor& candidate,
                          bool training, Rng& rng) const;

  /// Single-sample conveniences; `condition` is window x features row-major.
  std::array<double, kOutputDim> generate(std::span<const double> condition,
                                          std::span<const double> noise) const;
  double discriminate(std::span<const double> condition, std::span<const double> candidate,
                      bool training, Rng& rng) const;

  /// Deep copy of every parameter.
  GanModel clone() const;

 private:
  void check_condition(const ad::Tensor& condition) const;

  GanConfig config_;
  std::uint64_t seed_ = 0;
  std::uint64_t epoch_ = 0;

  LstmParams lstm_;
  ad::Tensor proj_weight_;  // [hidden + noise, 4]
  ad::Tensor proj_bias_;    // [4]
  std::vector<ad::Tensor> conv_weights_;
  std::vector<ad::Tensor> conv_biases_;
  ad::Tensor head_weight_;  // [flat, 1]
  ad::Tensor head_bias_;    // [1]

  std::vector<ad::Tensor> theta_g_;
  std::vector<ad::Tensor> theta_d_;
};

// ---------------------------------------------------------------------------
// Value function and losses
// ---------------------------------------------------------------------------

/// mean(log d_real) + mean(log(1 - d_fake)).
double gan_value(std::span<const double> d_real, std::span<const double> d_fake);

/// -V(D, G).
ad::Tensor discriminator_loss(const ad::Tensor& d_real, const ad::Tensor& d_fake);

/// Saturating: mean(log(1 - d_fake)). Non-saturating: -mean(log d_fake).
ad::Tensor generator_loss(const ad::Tensor& d_fake,
                          GeneratorLossMode mode = GeneratorLossMode::saturating);

}  // namespace fxcast::gan
