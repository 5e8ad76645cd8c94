#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fxcast/error.hpp"
#include "fxcast/fixtures.hpp"
#include "fxcast/preprocess.hpp"
#include "fxcast/rng.hpp"

using namespace fxcast;
using namespace fxcast::preprocess;

namespace {

constexpr auto kMissing = std::nullopt;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no fxcast::Error thrown";
  return ErrorKind::io;
}

std::vector<double> closes() {
  return fixtures::condition_series().values(market::Field::close);
}

void expect_relative(std::span<const double> got, std::span<const double> want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_LE(std::abs(got[i] - want[i]), tol * std::max(1.0, std::abs(want[i]))) << "at " << i;
  }
}

}  // namespace

TEST(Interpolate, Examples) {
  std::vector<std::optional<double>> mid{1.0, kMissing, 3.0};
  EXPECT_EQ(interpolate_missing(mid), (std::vector<double>{1.0, 2.0, 3.0}));
  std::vector<std::optional<double>> edges{kMissing, 5.0, kMissing};
  EXPECT_EQ(interpolate_missing(edges), (std::vector<double>{5.0, 5.0, 5.0}));

  // Two-gap oracle: x1, x2 on the line through (0, 1) and (3, 4).
  std::vector<std::optional<double>> two{1.0, kMissing, kMissing, 4.0};
  const double slope = (4.0 - 1.0) / 3.0;
  auto out = interpolate_missing(two);
  EXPECT_DOUBLE_EQ(out[1], 1.0 + slope);
  EXPECT_DOUBLE_EQ(out[2], 1.0 + 2 * slope);
}

TEST(Interpolate, AllMissingIsEmptyData) {
  std::vector<std::optional<double>> none{kMissing, kMissing};
  EXPECT_EQ(kind_of([&] { interpolate_missing(none); }), ErrorKind::empty_data);
}

TEST(Interpolate, PresentValuesUntouched) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::optional<double>> xs(20);
    for (auto& x : xs) {
      if (rng.uniform() < 0.6) x = rng.normal();
    }
    xs[rng.below(20)] = 1.5;
    auto out = interpolate_missing(xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i]) EXPECT_EQ(out[i], *xs[i]);
      EXPECT_TRUE(std::isfinite(out[i]));
    }
  }
}

TEST(ZScore, Examples) {
  std::vector<double> x{1, 2, 3};
  auto scale = fit_zscore(x);
  EXPECT_DOUBLE_EQ(scale.mean, 2.0);
  EXPECT_NEAR(scale.std, std::sqrt(2.0 / 3.0), 1e-15);
  auto z = apply_zscore(scale, x);
  EXPECT_NEAR(z[0], -1.224745, 1e-6);
  EXPECT_NEAR(z[1], 0.0, 1e-15);
  EXPECT_NEAR(z[2], 1.224745, 1e-6);

  auto again = apply_zscore(fit_zscore(z), z);
  expect_relative(again, z, 1e-12);
  expect_relative(invert_zscore(scale, z), x, 1e-12);
}

TEST(ZScore, ObservedClosesAgainstHandOracle) {
  const auto c = closes();
  // Spreadsheet-style: mean 110.68, population variance by direct sum.
  const double mean = (109.90 + 110.10 + 110.20 + 111.50 + 111.70) / 5.0;
  EXPECT_NEAR(mean, 110.68, 1e-12);
  double var = 0.0;
  for (double v : {109.90, 110.10, 110.20, 111.50, 111.70}) var += (v - mean) * (v - mean);
  const double sigma = std::sqrt(var / 5.0);
  auto scale = fit_zscore(c);
  EXPECT_NEAR(scale.mean, mean, 1e-12);
  EXPECT_NEAR(scale.std, sigma, 1e-12);
  auto z = apply_zscore(scale, c);
  EXPECT_NEAR(z[0], (109.90 - mean) / sigma, 1e-12);
}

TEST(ZScore, OutputMoments) {
  Rng rng(11);
  std::vector<double> x(300);
  for (double& v : x) v = 50 + 7 * rng.normal();
  auto z = apply_zscore(fit_zscore(x), x);
  double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  EXPECT_LT(std::abs(mean), 1e-10);
  EXPECT_LT(std::abs(std::sqrt(ss / z.size()) - 1.0), 1e-10);
}

TEST(ZScore, ConstantIsDegenerate) {
  std::vector<double> x{4, 4, 4};
  EXPECT_EQ(kind_of([&] { fit_zscore(x); }), ErrorKind::degenerate_scale);
  std::vector<double> one{4};
  EXPECT_EQ(kind_of([&] { fit_zscore(one); }), ErrorKind::insufficient_data);
}

TEST(LogTransform, Examples) {
  EXPECT_EQ(log_transform(std::vector<double>{1.0})[0], 0.0);
  EXPECT_NEAR(log_transform(std::vector<double>{std::exp(1.0)})[0], 1.0, 1e-15);
  EXPECT_NEAR(log_transform(std::vector<double>{680.0})[0], 6.522093, 5e-7);
  std::vector<double> x{0.5, 3.0, 111.7};
  expect_relative(exp_transform(log_transform(x)), x, 1e-12);
  try {
    log_transform(std::vector<double>{1.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos);
  }
}

TEST(Difference, Examples) {
  auto a = difference(std::vector<double>{1, 2, 4}, 1);
  EXPECT_EQ(a.values, (std::vector<double>{1, 2}));
  EXPECT_EQ(a.seeds, (std::vector<double>{1}));
  auto flat = difference(std::vector<double>{3, 3, 3, 3}, 1);
  for (double v : flat.values) EXPECT_EQ(v, 0.0);
  auto b = difference(std::vector<double>{1, 2, 4, 8}, 2);
  EXPECT_EQ(b.values, (std::vector<double>{1, 2}));
  EXPECT_EQ(b.seeds, (std::vector<double>{1, 2}));
  EXPECT_EQ(undifference(b.seeds, b.values), (std::vector<double>{1, 2, 4, 8}));
  EXPECT_EQ(kind_of([] { difference(std::vector<double>{1, 2}, 2); }),
            ErrorKind::insufficient_data);
}

TEST(Difference, HigherOrderRoundTrip) {
  Rng rng(5);
  for (int d = 1; d <= 4; ++d) {
    std::vector<double> x(15);
    for (double& v : x) v = rng.uniform(-10, 10);
    auto r = difference(x, d);
    EXPECT_EQ(r.values.size(), x.size() - d);
    expect_relative(undifference(r.seeds, r.values), x, 1e-12);
  }
}

TEST(Deseasonalize, Examples) {
  auto alt = deseasonalize(std::vector<double>{1, 3, 1, 3}, 2);
  EXPECT_NEAR(alt.indices[0], -1.0, 1e-12);
  EXPECT_NEAR(alt.indices[1], 1.0, 1e-12);
  for (double v : alt.adjusted) EXPECT_NEAR(v, 2.0, 1e-12);

  std::vector<double> ramp(12);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.3 * i;
  auto flat = deseasonalize(ramp, 3);
  for (double idx : flat.indices) EXPECT_NEAR(idx, 0.0, 1e-12);
  expect_relative(flat.adjusted, ramp, 1e-8);

  std::vector<double> bumpy(16);
  for (std::size_t i = 0; i < bumpy.size(); ++i) bumpy[i] = 0.3 * i + (i % 2 ? 0.5 : -0.5);
  auto seasonal = deseasonalize(bumpy, 2);
  EXPECT_NEAR(seasonal.indices[0], -0.5, 1e-12);
  EXPECT_NEAR(seasonal.indices[1], 0.5, 1e-12);

  EXPECT_EQ(kind_of([] { deseasonalize(std::vector<double>{1, 2, 3}, 2); }),
            ErrorKind::insufficient_data);
}

TEST(Deseasonalize, IndicesSumToZero) {
  Rng rng(8);
  for (int period : {2, 3, 5, 7}) {
    std::vector<double> x(40);
    for (double& v : x) v = rng.normal();
    auto r = deseasonalize(x, period);
    EXPECT_NEAR(std::accumulate(r.indices.begin(), r.indices.end(), 0.0), 0.0, 1e-10);
  }
}

TEST(Recipe, ParseAndFormat) {
  auto recipe = parse_recipe("interpolate,log,difference:1,zscore");
  EXPECT_EQ(recipe, default_recipe());
  EXPECT_EQ(format_recipe(recipe), "interpolate,log,difference:1,zscore");
  EXPECT_EQ(parse_recipe("difference")[0].parameter, 1);
  EXPECT_EQ(kind_of([] { parse_recipe("boxcox"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_recipe("deseasonalize"); }), ErrorKind::config);
  EXPECT_TRUE(parse_recipe("").empty());
}

TEST(Pipeline, LogDiffZscoreOnObservedCloses) {
  Frame frame{{"close"}, {closes()}};
  auto pipeline = FittedPipeline::fit(frame, parse_recipe("log,difference:1,zscore"));
  auto out = pipeline.transform(frame);
  ASSERT_EQ(out.rows(), 4u);
  expect_relative(pipeline.inverse(out).columns[0], closes(), 1e-9);
  EXPECT_EQ(pipeline.rows_consumed(), 1u);
}

TEST(Pipeline, EmptyRecipeIsIdentity) {
  Frame frame{{"close"}, {closes()}};
  auto pipeline = FittedPipeline::fit(frame, {});
  EXPECT_EQ(pipeline.transform(frame).columns, frame.columns);
  EXPECT_EQ(pipeline.inverse(frame).columns, frame.columns);
}

TEST(Pipeline, StepErrorsCarryStepIndex) {
  Frame frame{{"flat"}, {{2.0, 2.0, 2.0}}};
  try {
    FittedPipeline::fit(frame, parse_recipe("log,zscore"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_scale);
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, InterpolatesRawFrames) {
  auto actual = fixtures::forecast_actuals();
  auto raw = frame_from_series(actual);
  EXPECT_EQ(kind_of([&] { FittedPipeline::fit(raw, parse_recipe("log")); }),
            ErrorKind::empty_data);
  raw.columns[0] = {700.0, kMissing, 720.0, kMissing, 700.0};
  auto pipeline = FittedPipeline::fit(raw, default_recipe());
  auto out = pipeline.transform(raw);
  EXPECT_EQ(out.rows(), 4u);
}

TEST(Pipeline, InvertNextMatchesDirectInverse) {
  Frame frame{{"close"}, {closes()}};
  auto pipeline = FittedPipeline::fit(frame, default_recipe());
  const auto c = closes();
  const auto transformed = pipeline.transform_column(0, c);
  // Value for the last day from the first four days plus its transformed step.
  const double restored = pipeline.invert_next(0, std::span(c).first(4), transformed.back());
  EXPECT_NEAR(restored, c.back(), 1e-12);
}

TEST(Pipeline, SubWindowInverseWithAnchors) {
  auto series = market::synthetic_series({}, 4);
  Frame frame;
  for (auto f : market::kAllFields) {
    frame.names.emplace_back(market::field_name(f));
    frame.columns.push_back(series.values(f));
  }
  auto pipeline = FittedPipeline::fit(frame, parse_recipe("log,difference:1,deseasonalize:5,zscore"));
  Frame window;
  window.names = frame.names;
  for (auto& col : frame.columns) window.columns.emplace_back(col.begin() + 37, col.begin() + 60);
  auto t = pipeline.transform(window, 37);
  auto back = pipeline.inverse(t, pipeline.anchors(window, 37), 37);
  for (std::size_t c = 0; c < window.columns.size(); ++c) {
    expect_relative(back.columns[c], window.columns[c], 1e-9);
  }
  // Sub-window values equal the matching slice of the full transform.
  auto full = pipeline.transform(frame);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    EXPECT_NEAR(t.columns[4][r], full.columns[4][37 + r], 1e-9);
  }
}

TEST(Pipeline, JsonRoundTripIsExact) {
  auto series = market::synthetic_series({}, 6);
  auto raw = frame_from_series(series);
  auto pipeline = FittedPipeline::fit(
      raw, parse_recipe("interpolate,log,deseasonalize:4,difference:2,zscore"));
  auto back = FittedPipeline::from_json(pipeline.to_json());
  EXPECT_EQ(back.to_json(), pipeline.to_json());
  EXPECT_EQ(back.recipe(), pipeline.recipe());
  auto a = pipeline.transform(raw);
  auto b = back.transform(raw);
  EXPECT_EQ(a.columns, b.columns);
  EXPECT_EQ(kind_of([] { FittedPipeline::from_json("{\"format\":\"other\"}"); }),
            ErrorKind::parse);
}

TEST(Pipeline, RandomRoundTrips) {
  Rng rng(2024);
  const std::vector<std::string> pool = {"log", "zscore", "difference:1", "difference:2",
                                         "deseasonalize:3", "deseasonalize:4"};
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> x(30 + rng.below(40));
    double level = rng.uniform(1, 200);
    for (double& v : x) {
      level *= std::exp(0.05 * rng.normal());
      v = level;
    }
    // log first keeps later steps on a positive-input-free domain.
    std::string recipe = rng.uniform() < 0.5 ? "log" : "zscore";
    const auto extra = 1 + rng.below(3);
    for (std::size_t k = 0; k < extra; ++k) recipe += "," + pool[1 + rng.below(pool.size() - 1)];
    Frame frame{{"x"}, {x}};
    auto pipeline = FittedPipeline::fit(frame, parse_recipe(recipe));
    expect_relative(pipeline.inverse(pipeline.transform(frame)).columns[0], x, 1e-9);
  }
}
