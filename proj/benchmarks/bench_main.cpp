#include <benchmark/benchmark.h>

#include "fxcast/arima.hpp"
#include "fxcast/autodiff.hpp"
#include "fxcast/gan_model.hpp"
#include "fxcast/optim.hpp"
#include "fxcast/training.hpp"

using namespace fxcast;
using ad::Tensor;

namespace {

Tensor normal(ad::Shape shape, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.mutable_values()) v = rng.normal();
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = normal({n, n}, rng), b = normal({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ad::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_Generate(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  gan::GanModel model(gan::GanConfig{}, 1);
  Rng rng(2);
  const Tensor condition = normal({batch, 5, 5}, rng), noise = normal({batch, 8}, rng);
  ad::NoGradScope no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(model.generate(condition, noise));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_Generate)->Arg(1)->Arg(64);

void BM_Discriminate(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  gan::GanModel model(gan::GanConfig{}, 1);
  Rng rng(3);
  const Tensor condition = normal({batch, 5, 5}, rng), candidate = normal({batch, 4}, rng);
  ad::NoGradScope no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(model.discriminate(condition, candidate, true, rng));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_Discriminate)->Arg(1)->Arg(64);

void BM_GeneratorStep(benchmark::State& state) {
  gan::GanModel model(gan::GanConfig{}, 1);
  Rng rng(4);
  const Tensor condition = normal({64, 5, 5}, rng), noise = normal({64, 8}, rng);
  for (auto _ : state) {
    ad::Graph graph;
    Tensor loss = gan::generator_loss(model.discriminate(condition, model.generate(condition, noise), true, rng));
    graph.backward(loss);
    ad::clear_grads(model.generator_parameters());
    ad::clear_grads(model.discriminator_parameters());
  }
}
BENCHMARK(BM_GeneratorStep)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  market::SyntheticConfig sc;
  const auto series = market::synthetic_series(sc, 0);
  const auto pipeline = preprocess::FittedPipeline::fit(preprocess::frame_from_series(series),
                                                        preprocess::default_recipe());
  const auto set = training::make_training_set(series, pipeline, 6);
  gan::GanModel model(gan::GanConfig{}, 0);
  training::TrainConfig tc;
  tc.epochs = 1;
  for (auto _ : state) training::train(model, set, tc);
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_ArimaFit(benchmark::State& state) {
  Rng rng(5);
  std::vector<double> y;
  double prev = 0.0;
  for (int t = 0; t < 500; ++t) y.push_back(prev = 0.7 * prev + rng.normal());
  const auto q = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(arima::arima_fit(y, 1, q));
}
BENCHMARK(BM_ArimaFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
