#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fxcast/error.hpp"
#include "fxcast/fixtures.hpp"
#include "fxcast/forecasting.hpp"
#include "fxcast/training.hpp"

using namespace fxcast;
using namespace fxcast::forecasting;

namespace {

preprocess::FittedPipeline pipeline_for(const market::OhlcvSeries& s, std::string_view recipe) {
  return preprocess::FittedPipeline::fit(preprocess::frame_from_series(s),
                                         preprocess::parse_recipe(recipe));
}

/// Emits the condition's last close (pipeline space) for all four outputs.
class EchoLastClose final : public OneStepModel {
 public:
  explicit EchoLastClose(std::size_t rows) : rows_(rows) {}
  std::size_t condition_rows() const override { return rows_; }
  std::size_t noise_dim() const override { return 2; }
  std::array<double, 4> predict(std::span<const double> condition,
                                std::span<const double>) const override {
    const double last = condition[(rows_ - 1) * 5 + 4];
    return {last, last, last, last};
  }

 private:
  std::size_t rows_;
};

/// Adds the noise to a constant so the sampling policies have something to average.
class NoisyConstant final : public OneStepModel {
 public:
  std::size_t condition_rows() const override { return 5; }
  std::size_t noise_dim() const override { return 1; }
  std::array<double, 4> predict(std::span<const double>, std::span<const double> z) const override {
    const double v = std::log(111.0) + 0.001 * z[0];
    return {v, v, v, v};
  }
};

}  // namespace

TEST(Repair, Examples) {
  EXPECT_EQ(repair_ohlc(111.70, 112.20, 111.30, 111.90), (OhlcRow{111.70, 112.20, 111.30, 111.90}));
  EXPECT_EQ(repair_ohlc(2, 1, 3, 2), (OhlcRow{2, 2, 2, 2}));
  EXPECT_EQ(repair_ohlc(1, 1, 1, 1), (OhlcRow{1, 1, 1, 1}));
  try {
    repair_ohlc(1, NAN, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
  }
}

TEST(Repair, IdempotentAndKeepsOpenClose) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double o = rng.uniform(100, 120), h = rng.uniform(100, 120), l = rng.uniform(100, 120),
                 c = rng.uniform(100, 120);
    const auto once = repair_ohlc(o, h, l, c);
    EXPECT_EQ(once.open, o);
    EXPECT_EQ(once.close, c);
    EXPECT_GE(once.high, std::max(o, c));
    EXPECT_LE(once.low, std::min(o, c));
    EXPECT_EQ(repair_ohlc(once.open, once.high, once.low, once.close), once);
  }
}

TEST(Forecast, EchoStubGivesFlatLastClose) {
  const auto condition = fixtures::condition_series();
  const auto pipe = pipeline_for(condition, "log");
  const auto result = forecast(EchoLastClose(5), pipe, condition, 5);
  ASSERT_EQ(result.size(), 5u);
  for (const auto& row : result.predicted) {
    EXPECT_NEAR(row.open, 111.70, 1e-9);
    EXPECT_NEAR(row.high, 111.70, 1e-9);
    EXPECT_NEAR(row.low, 111.70, 1e-9);
    EXPECT_NEAR(row.close, 111.70, 1e-9);
  }
  EXPECT_EQ(format_date(result.dates.front()), "2023-04-06");
  EXPECT_EQ(format_date(result.dates.back()), "2023-04-10");
}

TEST(Forecast, GanHorizonFiveAndDeterministic) {
  auto condition = fixtures::condition_series();
  const auto pipe = pipeline_for(condition, "interpolate,log,difference:1,zscore");
  gan::GanConfig config;
  config.generator.condition_window = 4;
  gan::GanModel model(config, 11);
  GanForecaster g(model);
  const auto a = forecast(g, pipe, condition, 5);
  const auto b = forecast(g, pipe, condition, 5);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a.predicted, b.predicted);
  for (const auto& row : a.predicted) {
    EXPECT_GT(row.low, 0.0);
    EXPECT_GE(row.high, std::max(row.open, row.close));
    EXPECT_LE(row.low, std::min(row.open, row.close));
  }
  const auto f1 = forecast(g, pipe, condition, 1, FixedSeed{3});
  const auto f2 = forecast(g, pipe, condition, 1, FixedSeed{3});
  EXPECT_EQ(f1.predicted, f2.predicted);
  for (std::size_t h = 1; h <= 7; ++h) EXPECT_EQ(forecast(g, pipe, condition, h).size(), h);
}

TEST(Forecast, WindowMismatchIsConfigError) {
  const auto condition = fixtures::condition_series();
  const auto pipe = pipeline_for(condition, "interpolate,log,difference:1,zscore");
  gan::GanModel model(gan::GanConfig{}, 1);  // expects 5 rows, pipeline leaves 4
  try {
    forecast(GanForecaster(model), pipe, condition, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
  EXPECT_THROW(forecast(EchoLastClose(5), pipeline_for(condition, "log"), condition, 0), Error);
}

TEST(Forecast, SampleMeanConvergesOnStub) {
  const auto condition = fixtures::condition_series();
  const auto pipe = pipeline_for(condition, "log");
  const NoisyConstant model;
  const auto a = forecast(model, pipe, condition, 3, SampleMean{1024, 7});
  const auto b = forecast(model, pipe, condition, 3, SampleMean{2048, 7});
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_LT(std::abs(a.predicted[t].close - b.predicted[t].close), 1e-3);
    EXPECT_NEAR(a.predicted[t].close, 111.0, 1e-3);
  }
}

TEST(Forecast, SampleMeanConvergesOnTrainedModel) {
  market::SyntheticConfig sc;
  sc.bars = 60;
  const auto series = market::synthetic_series(sc, 2);
  const auto pipe = preprocess::FittedPipeline::fit(preprocess::frame_from_series(series),
                                                    preprocess::default_recipe());
  const auto set = training::make_training_set(series, pipe, 6);
  gan::GanModel model(gan::GanConfig{}, 3);
  training::TrainConfig tc;
  tc.epochs = 5;
  training::train(model, set, tc);

  std::vector<market::OhlcvBar> tail(series.bars().end() - 6, series.bars().end());
  const market::OhlcvSeries condition("USDJPY", tail);
  GanForecaster g(model);
  const auto a = forecast(g, pipe, condition, 5, SampleMean{1024, 9});
  const auto b = forecast(g, pipe, condition, 5, SampleMean{2048, 9});
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_LT(std::abs(a.predicted[t].open - b.predicted[t].open), 1e-3);
    EXPECT_LT(std::abs(a.predicted[t].high - b.predicted[t].high), 1e-3);
    EXPECT_LT(std::abs(a.predicted[t].low - b.predicted[t].low), 1e-3);
    EXPECT_LT(std::abs(a.predicted[t].close - b.predicted[t].close), 1e-3);
  }
}

TEST(Policy, Describe) {
  EXPECT_EQ(describe(ZeroNoise{}), "zero-noise");
  EXPECT_EQ(describe(FixedSeed{4}), "fixed-seed:4");
  EXPECT_EQ(describe(SampleMean{16, 2}), "sample-mean:16:2");
}

TEST(Csv, RoundTripAtTwoDecimals) {
  ForecastResult r;
  r.dates = {*parse_date("2023-04-06"), *parse_date("2023-04-07")};
  r.predicted = {{111.7, 112.2, 111.3, 111.9}, {111.904, 112.4, 111.5, 112.1}};
  std::ostringstream out;
  write_forecast_csv(r, out);
  EXPECT_EQ(out.str(),
            "date,pred_open,pred_high,pred_low,pred_close\n"
            "2023-04-06,111.70,112.20,111.30,111.90\n"
            "2023-04-07,111.90,112.40,111.50,112.10\n");
  std::istringstream in(out.str());
  const auto back = parse_forecast_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.predicted[1].open, 111.90);
  std::istringstream bad("date,pred_open,pred_high,pred_low,pred_close\n2023-04-06,1,2\n");
  EXPECT_THROW(parse_forecast_csv(bad), Error);
}
