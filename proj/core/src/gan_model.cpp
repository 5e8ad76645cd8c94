#include "fxcast/gan_model.hpp"

#include <cmath>

#include "fxcast/error.hpp"

namespace fxcast::gan {

using ad::Shape;
using ad::Tensor;

void GeneratorConfig::validate() const {
  if (condition_window == 0 || noise_dim == 0 || lstm_hidden == 0) {
    throw Error(ErrorKind::config, "generator: condition_window, noise_dim and lstm_hidden must be positive");
  }
  if (feature_count != kFeatureCount) {
    throw Error(ErrorKind::config, "generator.feature_count must be " + std::to_string(kFeatureCount));
  }
  if (output_dim != kOutputDim) {
    throw Error(ErrorKind::config, "generator.output_dim must be " + std::to_string(kOutputDim));
  }
}

void DiscriminatorConfig::validate() const {
  if (conv_layers.empty()) {
    throw Error(ErrorKind::config, "discriminator.conv_layers needs at least one layer");
  }
  for (std::size_t i = 0; i < conv_layers.size(); ++i) {
    const auto& layer = conv_layers[i];
    if (layer.out_channels == 0 || layer.kernel == 0 || layer.stride == 0) {
      throw Error(ErrorKind::config, "discriminator.conv_layers[" + std::to_string(i) +
                                         "]: channels, kernel and stride must be positive");
    }
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorKind::config, "discriminator.dropout_rate must lie in [0, 1)");
  }
}

void GanConfig::validate() const {
  generator.validate();
  discriminator.validate();
  discriminator_head_inputs();
}

std::size_t GanConfig::discriminator_head_inputs() const {
  std::size_t length = discriminator_steps();
  std::size_t channels = generator.feature_count;
  for (std::size_t i = 0; i < discriminator.conv_layers.size(); ++i) {
    const auto& layer = discriminator.conv_layers[i];
    if (length + 2 * layer.padding < layer.kernel) {
      throw Error(ErrorKind::config, "discriminator.conv_layers[" + std::to_string(i) +
                                         "]: kernel " + std::to_string(layer.kernel) +
                                         " exceeds sequence length " + std::to_string(length));
    }
    length = (length + 2 * layer.padding - layer.kernel) / layer.stride + 1;
    channels = layer.out_channels;
  }
  return length * channels;
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

LstmState lstm_cell(const Tensor& x, const LstmState& state, const LstmParams& params) {
  const std::size_t hidden = params.hidden();
  if (params.bias.size() != 4 * hidden || params.weight.rank() != 2 ||
      params.weight.shape()[1] != 4 * hidden || params.weight.shape()[0] < hidden) {
    throw Error(ErrorKind::shape, "lstm_cell: weight " + ad::shape_string(params.weight.shape()) +
                                      " and bias " + ad::shape_string(params.bias.shape()) +
                                      " do not conform");
  }
  const std::size_t input = params.input();
  if (x.rank() != 2 || x.shape()[1] != input || state.h.shape() != Shape{x.shape()[0], hidden} ||
      state.c.shape() != state.h.shape()) {
    throw Error(ErrorKind::shape, "lstm_cell: input " + ad::shape_string(x.shape()) + ", h " +
                                      ad::shape_string(state.h.shape()) + ", c " +
                                      ad::shape_string(state.c.shape()) + " for input size " +
                                      std::to_string(input) + " and hidden size " +
                                      std::to_string(hidden));
  }
  Tensor z = ad::add(ad::matmul(ad::concat({x, state.h}, 1), params.weight), params.bias);
  Tensor i = ad::sigmoid(ad::slice(z, 1, 0, hidden));
  Tensor f = ad::sigmoid(ad::slice(z, 1, hidden, 2 * hidden));
  Tensor g = ad::tanh(ad::slice(z, 1, 2 * hidden, 3 * hidden));
  Tensor o = ad::sigmoid(ad::slice(z, 1, 3 * hidden, 4 * hidden));
  Tensor c = ad::add(ad::mul(f, state.c), ad::mul(i, g));
  Tensor h = ad::mul(o, ad::tanh(c));
  return {h, c};
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

namespace {

struct ParamSpec {
  std::string name;
  Shape shape;
  std::size_t fan_in;
  bool generator;
};

std::vector<ParamSpec> parameter_specs(const GanConfig& config) {
  const auto& g = config.generator;
  const std::size_t lstm_in = g.feature_count + g.lstm_hidden;
  const std::size_t proj_in = g.lstm_hidden + g.noise_dim;
  std::vector<ParamSpec> specs = {
      {"generator.lstm.weight", {lstm_in, 4 * g.lstm_hidden}, lstm_in, true},
      {"generator.lstm.bias", {4 * g.lstm_hidden}, lstm_in, true},
      {"generator.proj.weight", {proj_in, g.output_dim}, proj_in, true},
      {"generator.proj.bias", {g.output_dim}, proj_in, true},
  };
  std::size_t channels = g.feature_count;
  for (std::size_t i = 0; i < config.discriminator.conv_layers.size(); ++i) {
    const auto& layer = config.discriminator.conv_layers[i];
    const std::size_t fan_in = layer.kernel * channels;
    const std::string prefix = "discriminator.conv" + std::to_string(i);
    specs.push_back({prefix + ".weight", {layer.kernel, channels, layer.out_channels}, fan_in, false});
    specs.push_back({prefix + ".bias", {layer.out_channels}, fan_in, false});
    channels = layer.out_channels;
  }
  const std::size_t flat = config.discriminator_head_inputs();
  specs.push_back({"discriminator.head.weight", {flat, 1}, flat, false});
  specs.push_back({"discriminator.head.bias", {1}, flat, false});
  return specs;
}

}  // namespace

GanModel::GanModel(GanConfig config, std::uint64_t seed) : config_(std::move(config)), seed_(seed) {
  config_.validate();
  Rng rng(seed);
  std::vector<Tensor> tensors;
  for (const auto& spec : parameter_specs(config_)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
    Tensor t = Tensor::zeros(spec.shape, true);
    for (double& v : t.mutable_values()) v = rng.uniform(-bound, bound);
    (spec.generator ? theta_g_ : theta_d_).push_back(t);
  }
  lstm_ = {theta_g_[0], theta_g_[1]};
  proj_weight_ = theta_g_[2];
  proj_bias_ = theta_g_[3];
  const std::size_t layers = config_.discriminator.conv_layers.size();
  for (std::size_t i = 0; i < layers; ++i) {
    conv_weights_.push_back(theta_d_[2 * i]);
    conv_biases_.push_back(theta_d_[2 * i + 1]);
  }
  head_weight_ = theta_d_[2 * layers];
  head_bias_ = theta_d_[2 * layers + 1];
}

std::vector<NamedParameter> GanModel::named_parameters() const {
  auto specs = parameter_specs(config_);
  std::vector<NamedParameter> out;
  std::size_t gi = 0, di = 0;
  for (const auto& spec : specs) {
    out.push_back({spec.name, spec.generator ? theta_g_[gi++] : theta_d_[di++]});
  }
  return out;
}

std::size_t GanModel::parameter_count() const { return parameter_count(config_); }

std::size_t GanModel::parameter_count(const GanConfig& config) {
  config.validate();
  std::size_t total = 0;
  for (const auto& spec : parameter_specs(config)) total += ad::shape_size(spec.shape);
  return total;
}

void GanModel::check_condition(const Tensor& condition) const {
  const auto& g = config_.generator;
  if (condition.rank() != 3 || condition.shape()[1] != g.condition_window ||
      condition.shape()[2] != g.feature_count) {
    throw Error(ErrorKind::shape, "condition shape " + ad::shape_string(condition.shape()) +
                                      " does not match [B," + std::to_string(g.condition_window) +
                                      "," + std::to_string(g.feature_count) + "]");
  }
}

Tensor GanModel::generate(const Tensor& condition, const Tensor& noise) const {
  check_condition(condition);
  const auto& g = config_.generator;
  const std::size_t batch = condition.shape()[0];
  if (noise.shape() != Shape{batch, g.noise_dim}) {
    throw Error(ErrorKind::shape, "noise shape " + ad::shape_string(noise.shape()) +
                                      " does not match [" + std::to_string(batch) + "," +
                                      std::to_string(g.noise_dim) + "]");
  }
  LstmState state{Tensor::zeros({batch, g.lstm_hidden}), Tensor::zeros({batch, g.lstm_hidden})};
  for (std::size_t t = 0; t < g.condition_window; ++t) {
    Tensor x = ad::reshape(ad::slice(condition, 1, t, t + 1), {batch, g.feature_count});
    state = lstm_cell(x, state, lstm_);
  }
  Tensor head = ad::concat({state.h, noise}, 1);
  return ad::add(ad::matmul(head, proj_weight_), proj_bias_);
}

Tensor GanModel::discriminate(const Tensor& condition, const Tensor& candidate, bool training,
                              Rng& rng) const {
  check_condition(condition);
  const auto& g = config_.generator;
  const std::size_t batch = condition.shape()[0];
  if (candidate.shape() != Shape{batch, g.output_dim}) {
    throw Error(ErrorKind::shape, "candidate shape " + ad::shape_string(candidate.shape()) +
                                      " does not match [" + std::to_string(batch) + "," +
                                      std::to_string(g.output_dim) + "]");
  }
  Tensor day = ad::reshape(ad::concat({Tensor::zeros({batch, 1}), candidate}, 1),
                           {batch, 1, g.feature_count});
  Tensor x = ad::concat({condition, day}, 1);
  const auto& layers = config_.discriminator.conv_layers;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = ad::relu(ad::conv1d(x, conv_weights_[i], conv_biases_[i], layers[i].stride,
                            layers[i].padding));
    x = ad::dropout(x, config_.discriminator.dropout_rate, rng, training);
  }
  Tensor flat = ad::reshape(x, {batch, x.size() / batch});
  return ad::sigmoid(ad::add(ad::matmul(flat, head_weight_), head_bias_));
}

std::array<double, kOutputDim> GanModel::generate(std::span<const double> condition,
                                                  std::span<const double> noise) const {
  const auto& g = config_.generator;
  ad::NoGradScope no_grad;
  Tensor out = generate(
      Tensor::from({1, g.condition_window, g.feature_count}, {condition.begin(), condition.end()}),
      Tensor::from({1, g.noise_dim}, {noise.begin(), noise.end()}));
  std::array<double, kOutputDim> result{};
  for (std::size_t i = 0; i < kOutputDim; ++i) result[i] = out.at(i);
  return result;
}

double GanModel::discriminate(std::span<const double> condition, std::span<const double> candidate,
                              bool training, Rng& rng) const {
  const auto& g = config_.generator;
  ad::NoGradScope no_grad;
  return discriminate(
             Tensor::from({1, g.condition_window, g.feature_count},
                          {condition.begin(), condition.end()}),
             Tensor::from({1, g.output_dim}, {candidate.begin(), candidate.end()}), training, rng)
      .item();
}

GanModel GanModel::clone() const {
  GanModel copy(config_, seed_);
  copy.epoch_ = epoch_;
  auto copy_all = [](std::vector<Tensor>& to, const std::vector<Tensor>& from) {
    for (std::size_t i = 0; i < to.size(); ++i) {
      auto src = from[i].values();
      std::copy(src.begin(), src.end(), to[i].mutable_values().begin());
    }
  };
  copy_all(copy.theta_g_, theta_g_);
  copy_all(copy.theta_d_, theta_d_);
  return copy;
}

// ---------------------------------------------------------------------------
// Value function and losses
// ---------------------------------------------------------------------------

namespace {

void check_probabilities(std::span<const double> values, std::string_view what) {
  if (values.empty()) throw Error(ErrorKind::empty_data, std::string(what) + " is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0 && values[i] < 1.0)) {
      throw Error(ErrorKind::domain, std::string(what) + "[" + std::to_string(i) + "] = " +
                                         std::to_string(values[i]) + " outside (0, 1)");
    }
  }
}

Tensor one_minus(const Tensor& x) { return ad::add_scalar(ad::neg(x), 1.0); }

}  // namespace

double gan_value(std::span<const double> d_real, std::span<const double> d_fake) {
  check_probabilities(d_real, "d_real");
  check_probabilities(d_fake, "d_fake");
  double real = 0.0, fake = 0.0;
  for (double d : d_real) real += std::log(d);
  for (double d : d_fake) fake += std::log1p(-d);
  return real / static_cast<double>(d_real.size()) + fake / static_cast<double>(d_fake.size());
}

Tensor discriminator_loss(const Tensor& d_real, const Tensor& d_fake) {
  check_probabilities(d_real.values(), "d_real");
  check_probabilities(d_fake.values(), "d_fake");
  return ad::neg(ad::add(ad::mean(ad::log(d_real)), ad::mean(ad::log(one_minus(d_fake)))));
}

Tensor generator_loss(const Tensor& d_fake, GeneratorLossMode mode) {
  check_probabilities(d_fake.values(), "d_fake");
  if (mode == GeneratorLossMode::saturating) return ad::mean(ad::log(one_minus(d_fake)));
  return ad::neg(ad::mean(ad::log(d_fake)));
}

}  // namespace fxcast::gan
