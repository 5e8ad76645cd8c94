#pragma once

#include <array>
#include <string_view>

#include "fxcast/market_data.hpp"

// Published USD/JPY desk figures for 2023-04-01 .. 2023-04-10, kept in code so
// tests and the CLI can cross-check the bundled CSV fixtures.
namespace fxcast::fixtures {

struct DeskDay {
  std::string_view date;
  double volume_musd;
  double open, high, low, close;
  double printed_change_percent;
};

inline constexpr std::array<DeskDay, 5> kConditionDays = {{
    {"2023-04-01", 680, 109.50, 110.20, 109.30, 109.90, 0.3},
    {"2023-04-02", 702, 109.90, 110.50, 109.40, 110.10, 3.2},
    {"2023-04-03", 689, 110.10, 110.60, 109.80, 110.20, -1.9},
    // Printed as 1.4%; the volumes give +7.4%.
    {"2023-04-04", 740, 111.20, 111.80, 110.90, 111.50, 1.4},
    {"2023-04-05", 755, 111.50, 112.00, 111.10, 111.70, 2.0},
}};

struct ForecastDay {
  std::string_view date;
  double pred_open, actual_open;
  double pred_high, actual_high;
  double pred_low, actual_low;
  double pred_close, actual_close;
};

inline constexpr std::array<ForecastDay, 5> kForecastDays = {{
    {"2023-04-06", 111.70, 111.68, 112.20, 112.22, 111.30, 111.32, 111.90, 111.88},
    {"2023-04-07", 111.90, 111.88, 112.40, 112.38, 111.50, 111.52, 112.10, 112.08},
    {"2023-04-08", 112.10, 112.08, 112.60, 112.58, 111.70, 111.72, 112.30, 112.28},
    {"2023-04-09", 112.30, 112.28, 112.80, 112.82, 111.90, 111.92, 112.50, 112.48},
    {"2023-04-10", 112.50, 112.48, 113.00, 113.02, 112.10, 112.12, 112.70, 112.68},
}};

inline constexpr double kPrintedRmse = 0.02;

struct TradeDay {
  std::string_view date;
  std::string_view side;
  double notional_musd;
  double daily_return_musd;
  double cumulative_return_musd;
};

inline constexpr std::array<TradeDay, 5> kTradeDays = {{
    {"2023-04-06", "Buy", 100, 0.2, 0.2},
    {"2023-04-07", "Buy", 100, 0.2, 0.4},
    {"2023-04-08", "Buy", 100, 0.2, 0.6},
    {"2023-04-09", "Buy", 100, 0.2, 0.8},
    {"2023-04-10", "Buy", 100, 0.2, 1.0},
}};

market::OhlcvSeries condition_series();
std::array<double, 5> printed_change_percents();

/// Forecast-period actuals as a series with missing volume.
market::OhlcvSeries forecast_actuals();

}  // namespace fxcast::fixtures
