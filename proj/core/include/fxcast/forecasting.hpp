#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fxcast/calendar.hpp"
#include "fxcast/gan_model.hpp"
#include "fxcast/market_data.hpp"
#include "fxcast/preprocess.hpp"

namespace fxcast::forecasting {

struct OhlcRow {
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;

  bool operator==(const OhlcRow&) const = default;
};

/// z = 0 at every step.
struct ZeroNoise {};
/// One noise draw per step from a seeded stream.
struct FixedSeed {
  std::uint64_t seed = 0;
};
/// Each forecast day is the mean of `samples` noise draws (antithetic pairs)
/// given the window so far; the mean day then rolls into the window.
struct SampleMean {
  std::size_t samples = 1024;
  std::uint64_t seed = 0;
};

using ZPolicy = std::variant<ZeroNoise, FixedSeed, SampleMean>;

std::string describe(const ZPolicy& policy);

struct ForecastResult {
  std::vector<Date> dates;
  std::vector<OhlcRow> predicted;
  ZPolicy z_policy;

  std::size_t size() const { return dates.size(); }
  std::vector<double> closes() const;
};

/// Anything that maps a pipeline-space condition window and a noise vector
/// to the next day's pipeline-space O/H/L/C.
class OneStepModel {
 public:
  virtual ~OneStepModel() = default;
  virtual std::size_t condition_rows() const = 0;
  virtual std::size_t noise_dim() const = 0;
  virtual std::array<double, 4> predict(std::span<const double> condition,
                                        std::span<const double> noise) const = 0;
};

class GanForecaster final : public OneStepModel {
 public:
  explicit GanForecaster(const gan::GanModel& model) : model_(model) {}

  std::size_t condition_rows() const override {
    return model_.config().generator.condition_window;
  }
  std::size_t noise_dim() const override { return model_.config().generator.noise_dim; }
  std::array<double, 4> predict(std::span<const double> condition,
                                std::span<const double> noise) const override {
    return model_.generate(condition, noise);
  }

 private:
  const gan::GanModel& model_;
};

/// h' = max(h, o, c), l' = min(l, o, c); open and close untouched.
OhlcRow repair_ohlc(double open, double high, double low, double close);

/// Recursive multi-day forecast. `condition` must hold exactly
/// condition_rows + pipeline.rows_consumed() complete days; each predicted
/// day (with volume carried forward) rolls into the window for the next.
ForecastResult forecast(const OneStepModel& model, const preprocess::FittedPipeline& pipeline,
                        const market::OhlcvSeries& condition, std::size_t horizon,
                        const ZPolicy& z_policy = ZeroNoise{});

inline constexpr std::string_view kForecastCsvHeader =
    "date,pred_open,pred_high,pred_low,pred_close";

/// Two-decimal prices.
void write_forecast_csv(const ForecastResult& result, std::ostream& out);
void write_forecast_csv(const ForecastResult& result, const std::filesystem::path& path);
ForecastResult read_forecast_csv(const std::filesystem::path& path);
ForecastResult parse_forecast_csv(std::istream& in, std::string_view source = "<stream>");

}  // namespace fxcast::forecasting
