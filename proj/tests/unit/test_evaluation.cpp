#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fxcast/error.hpp"
#include "fxcast/evaluation.hpp"
#include "fxcast/fixtures.hpp"

using namespace fxcast;
using namespace fxcast::evaluation;

namespace {

forecasting::ForecastResult reference_forecast() {
  forecasting::ForecastResult r;
  for (const auto& d : fixtures::kForecastDays) {
    r.dates.push_back(*parse_date(d.date));
    r.predicted.push_back({d.pred_open, d.pred_high, d.pred_low, d.pred_close});
  }
  return r;
}

}  // namespace

TEST(Rmse, Examples) {
  const std::vector<double> pred{111.70, 111.90, 112.10, 112.30, 112.50};
  const std::vector<double> act{111.68, 111.88, 112.08, 112.28, 112.48};
  EXPECT_EQ(market::round_half_away(rmse(act, pred), 2), 0.02);
  EXPECT_EQ(rmse(act, act), 0.0);
  const std::vector<double> a{1, 2}, b{1, 4};
  EXPECT_NEAR(rmse(a, b), 1.414214, 5e-7);
  EXPECT_DOUBLE_EQ(mse(a, b), 2.0);
}

TEST(Rmse, Errors) {
  const std::vector<double> a{1, 2}, b{1}, none;
  try {
    rmse(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::pairing);
  }
  try {
    rmse(none, none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_data);
  }
}

TEST(Rmse, Properties) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    std::vector<double> x(n), y(n), xs(n), ys(n);
    const double k = rng.uniform(-100, 100);
    double max_abs = 0.0, mean_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-5, 5);
      y[i] = rng.uniform(-5, 5);
      xs[i] = x[i] + k;
      ys[i] = y[i] + k;
      max_abs = std::max(max_abs, std::abs(x[i] - y[i]));
      mean_diff += (x[i] - y[i]) / static_cast<double>(n);
    }
    const double r = rmse(x, y);
    EXPECT_EQ(r, rmse(y, x));
    EXPECT_NEAR(rmse(xs, ys), r, 1e-9);
    EXPECT_LE(r, max_abs * (1 + 1e-12));
    EXPECT_GE(r * (1 + 1e-12), std::abs(mean_diff));
  }
}

TEST(Report, ReferenceForecast) {
  const auto report = accuracy_report(reference_forecast(), fixtures::forecast_actuals());
  EXPECT_EQ(report.n, 5u);
  EXPECT_EQ(report.rows.size(), 5u);
  for (const auto& f : report.fields) {
    EXPECT_EQ(market::round_half_away(f.rmse, 2), 0.02);
    EXPECT_DOUBLE_EQ(f.rmse, std::sqrt(f.mse));
  }
  const auto text = format_report(report);
  EXPECT_NE(text.find("open 0.02, high 0.02, low 0.02, close 0.02"), std::string::npos);

  std::ostringstream csv;
  write_report_csv(report, csv);
  const auto s = csv.str();
  EXPECT_EQ(s.substr(0, s.find('\n')),
            "date,pred_open,actual_open,pred_high,actual_high,pred_low,actual_low,pred_close,"
            "actual_close");
  EXPECT_NE(s.find("2023-04-06,111.70,111.68,112.20,112.22,111.30,111.32,111.90,111.88"),
            std::string::npos);
  EXPECT_NE(s.find("rmse,"), std::string::npos);
}

TEST(Report, PerfectAndSingleDay) {
  auto f = reference_forecast();
  const auto actual = fixtures::forecast_actuals();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& b = actual[i];
    f.predicted[i] = {*b.open, *b.high, *b.low, *b.close};
  }
  for (const auto& field : accuracy_report(f, actual).fields) EXPECT_EQ(field.rmse, 0.0);

  forecasting::ForecastResult one;
  one.dates = {actual[0].date};
  one.predicted = {{*actual[0].open + 0.02, *actual[0].high + 0.02, *actual[0].low + 0.02,
                    *actual[0].close + 0.02}};
  const auto r = accuracy_report(one, actual);
  EXPECT_EQ(r.n, 1u);
  for (const auto& field : r.fields) EXPECT_NEAR(field.rmse, 0.02, 1e-9);
}

TEST(Report, MissingDatesAreListed) {
  auto f = reference_forecast();
  f.dates.push_back(*parse_date("2023-04-11"));
  f.predicted.push_back({1, 1, 1, 1});
  try {
    accuracy_report(f, fixtures::forecast_actuals());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::alignment);
    EXPECT_NE(std::string(e.what()).find("2023-04-11"), std::string::npos);
  }
}
