#include <functional>

#include "app.hpp"
#include "fxcast/autodiff.hpp"

namespace fxcast::app {

namespace {

using ad::Tensor;

Tensor normal(ad::Shape shape, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.mutable_values()) v = rng.normal();
  return t;
}

Tensor uniform(ad::Shape shape, Rng& rng, double lo, double hi) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.mutable_values()) v = rng.uniform(lo, hi);
  return t;
}

// Weighted sum so every output coordinate gets a distinct upstream gradient.
Tensor reduce(const Tensor& y, const Tensor& weights) {
  return ad::sum(ad::mul(y, ad::reshape(weights, y.shape())));
}

}  // namespace

std::vector<GradCheckResult> gradcheck_suite(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCheckResult> results;

  const Tensor a = normal({3, 4}, rng), b = normal({4, 5}, rng), c = normal({3, 4}, rng);
  const Tensor row = normal({4}, rng);
  const Tensor positive = uniform({3, 4}, rng, 0.3, 3.0);
  const Tensor prob = uniform({3, 4}, rng, 0.05, 0.95);
  const Tensor target = uniform({3, 4}, rng, 0.0, 1.0);
  const Tensor seq = normal({2, 7, 3}, rng), kernel = normal({3, 3, 4}, rng), bias = normal({4}, rng);
  Tensor kinked = normal({3, 4}, rng);
  for (double& v : kinked.mutable_values()) v += v >= 0 ? 0.1 : -0.1;

  auto w = [&](std::size_t n) { return normal({n}, rng); };
  const Tensor w8 = w(8), w12 = w(12), w15 = w(15), w24 = w(24);
  const Tensor w_conv = w(2 * 5 * 4), w_conv2 = w(2 * 4 * 4);

  auto check = [&](std::string name, std::function<Tensor(const Tensor&)> f, const Tensor& x) {
    results.push_back({std::move(name), ad::grad_check(f, x.detach())});
  };

  check("matmul/a", [&](const Tensor& x) { return reduce(ad::matmul(x, b), w15); }, a);
  check("matmul/b", [&](const Tensor& x) { return reduce(ad::matmul(a, x), w15); }, b);
  check("add", [&](const Tensor& x) { return reduce(ad::add(x, c), w12); }, a);
  check("add/broadcast", [&](const Tensor& x) { return reduce(ad::add(c, x), w12); }, row);
  check("sub", [&](const Tensor& x) { return reduce(ad::sub(c, x), w12); }, a);
  check("sub/broadcast", [&](const Tensor& x) { return reduce(ad::sub(c, x), w12); }, row);
  check("mul", [&](const Tensor& x) { return reduce(ad::mul(x, c), w12); }, a);
  check("mul/broadcast", [&](const Tensor& x) { return reduce(ad::mul(c, x), w12); }, row);
  check("add_scalar", [&](const Tensor& x) { return reduce(ad::add_scalar(x, 0.7), w12); }, a);
  check("mul_scalar", [&](const Tensor& x) { return reduce(ad::mul_scalar(x, -2.5), w12); }, a);
  check("sigmoid", [&](const Tensor& x) { return reduce(ad::sigmoid(x), w12); }, a);
  check("tanh", [&](const Tensor& x) { return reduce(ad::tanh(x), w12); }, a);
  check("relu", [&](const Tensor& x) { return reduce(ad::relu(x), w12); }, kinked);
  check("log", [&](const Tensor& x) { return reduce(ad::log(x), w12); }, positive);
  check("exp", [&](const Tensor& x) { return reduce(ad::exp(x), w12); }, a);
  check("neg", [&](const Tensor& x) { return reduce(ad::neg(x), w12); }, a);
  check("concat/axis0", [&](const Tensor& x) { return reduce(ad::concat({c, x}, 0), w24); }, a);
  check("concat/axis1", [&](const Tensor& x) { return reduce(ad::concat({x, c}, 1), w24); }, a);
  check("slice", [&](const Tensor& x) { return reduce(ad::slice(x, 0, 1, 3), w8); }, a);
  check("reshape", [&](const Tensor& x) { return reduce(ad::reshape(x, {4, 3}), w12); }, a);
  check("conv1d/input", [&](const Tensor& x) { return reduce(ad::conv1d(x, kernel, bias), w_conv); }, seq);
  check("conv1d/weight",
        [&](const Tensor& x) { return reduce(ad::conv1d(seq, x, bias, 2, 1), w_conv2); }, kernel);
  check("conv1d/bias", [&](const Tensor& x) { return reduce(ad::conv1d(seq, kernel, x), w_conv); }, bias);
  check("dropout/train", [&](const Tensor& x) {
    Rng mask(seed + 1);
    return reduce(ad::dropout(x, 0.4, mask, true), w12);
  }, a);
  check("dropout/eval", [&](const Tensor& x) {
    Rng mask(seed + 1);
    return reduce(ad::dropout(x, 0.4, mask, false), w12);
  }, a);
  check("sum", [&](const Tensor& x) { return ad::mul(ad::sum(x), ad::sum(ad::tanh(x))); }, a);
  check("mean", [&](const Tensor& x) { return ad::mul(ad::mean(x), ad::mean(ad::exp(x))); }, a);
  check("binary_cross_entropy",
        [&](const Tensor& x) { return ad::binary_cross_entropy(x, target); }, prob);

  // Both networks end to end, dropout off so the objective is deterministic.
  gan::GanConfig config;
  config.generator.condition_window = 4;
  config.generator.noise_dim = 3;
  config.generator.lstm_hidden = 6;
  config.discriminator.conv_layers = {{5, 2, 1, 0}, {4, 2, 1, 1}};
  gan::GanModel model(config, seed);
  const Tensor condition = normal({3, 4, 5}, rng), noise = normal({3, 3}, rng), real = normal({3, 4}, rng);
  Rng unused(0);
  const Tensor out_weights = normal({3, 4}, rng);
  results.push_back({"generator/output", ad::grad_check(
                                             [&] {
                                               return reduce(model.generate(condition, noise),
                                                             out_weights);
                                             },
                                             model.generator_parameters())});
  results.push_back({"generator/through-discriminator", ad::grad_check(
                                                 [&] {
                                                   return gan::generator_loss(model.discriminate(
                                                       condition, model.generate(condition, noise),
                                                       false, unused));
                                                 },
                                                 model.generator_parameters())});
  results.push_back({"discriminator/parameters",
                     ad::grad_check(
                         [&] {
                           return gan::discriminator_loss(
                               model.discriminate(condition, real, false, unused),
                               model.discriminate(condition, model.generate(condition, noise), false,
                                                  unused));
                         },
                         model.discriminator_parameters())});
  check("generator/condition",
        [&](const Tensor& x) { return reduce(model.generate(x, noise), w12); }, condition);
  check("discriminator/candidate",
        [&](const Tensor& x) { return ad::sum(model.discriminate(condition, x, false, unused)); }, real);
  return results;
}

}  // namespace fxcast::app
