#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fxcast/forecasting.hpp"
#include "fxcast/market_data.hpp"

namespace fxcast::evaluation {

/// sqrt(mean((actual - predicted)^2)).
double rmse(std::span<const double> actual, std::span<const double> predicted);
double mse(std::span<const double> actual, std::span<const double> predicted);

struct FieldAccuracy {
  double mse = 0.0;
  double rmse = 0.0;
};

struct AccuracyRow {
  Date date{};
  forecasting::OhlcRow predicted;
  forecasting::OhlcRow actual;
};

struct AccuracyReport {
  /// open, high, low, close.
  std::array<FieldAccuracy, 4> fields{};
  std::size_t n = 0;
  std::vector<AccuracyRow> rows;
};

/// Pairs forecast days with actual bars by exact date; every forecast date
/// must be present in `actual`.
AccuracyReport accuracy_report(const forecasting::ForecastResult& forecast,
                               const market::OhlcvSeries& actual);

/// date, predicted/actual per field, then an RMSE footer row.
void write_report_csv(const AccuracyReport& report, std::ostream& out);
void write_report_csv(const AccuracyReport& report, const std::filesystem::path& path);

std::string format_report(const AccuracyReport& report);

}  // namespace fxcast::evaluation
