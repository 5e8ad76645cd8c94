#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fxcast/calendar.hpp"

namespace fxcast::market {

enum class Field { volume, open, high, low, close };

inline constexpr std::array<Field, 5> kAllFields = {Field::volume, Field::open, Field::high,
                                                    Field::low, Field::close};
inline constexpr std::array<Field, 4> kPriceFields = {Field::open, Field::high, Field::low,
                                                      Field::close};

std::string_view field_name(Field field);

/// One trading day. Volume is in millions of USD, prices in JPY per USD.
/// A cell left empty in the source CSV is carried as nullopt until an
/// explicit interpolation step fills it.
struct OhlcvBar {
  Date date{};
  std::optional<double> volume;
  std::optional<double> open;
  std::optional<double> high;
  std::optional<double> low;
  std::optional<double> close;
  /// Day-over-day volume change as a fraction; absent on the first bar or
  /// when either volume is missing.
  std::optional<double> volume_change_rate;

  std::optional<double> get(Field field) const;
  void set(Field field, std::optional<double> value);
  /// Throws empty_data when the cell is missing.
  double value(Field field) const;
  bool complete() const;
};

class OhlcvSeries {
 public:
  OhlcvSeries() = default;
  /// Validates date ordering and recomputes volume change rates.
  OhlcvSeries(std::string symbol, std::vector<OhlcvBar> bars);

  const std::string& symbol() const noexcept { return symbol_; }
  const std::vector<OhlcvBar>& bars() const noexcept { return bars_; }
  std::size_t size() const noexcept { return bars_.size(); }
  bool empty() const noexcept { return bars_.empty(); }
  const OhlcvBar& operator[](std::size_t i) const { return bars_[i]; }
  const OhlcvBar& front() const { return bars_.front(); }
  const OhlcvBar& back() const { return bars_.back(); }

  std::vector<std::optional<double>> column(Field field) const;
  /// Dense column; throws empty_data if any cell is missing.
  std::vector<double> values(Field field) const;
  std::vector<Date> dates() const;
  bool complete() const;

  /// Non-fatal validation findings (OHLC inconsistencies in lenient mode).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void add_warning(std::string warning) { warnings_.push_back(std::move(warning)); }

 private:
  std::string symbol_ = "USDJPY";
  std::vector<OhlcvBar> bars_;
  std::vector<std::string> warnings_;
};

inline constexpr std::string_view kCsvHeader = "date,volume_musd,open,high,low,close";

struct LoadOptions {
  /// Promote OHLC consistency warnings to domain errors.
  bool strict = false;
  std::string symbol = "USDJPY";
};

OhlcvSeries load_csv(const std::filesystem::path& path, const LoadOptions& options = {});
OhlcvSeries parse_csv(std::istream& in, const LoadOptions& options = {},
                      std::string_view source = "<stream>");

/// Numbers are written in shortest round-trip form, so load_csv(write_csv(s))
/// reproduces every value bit-for-bit.
void write_csv(const OhlcvSeries& series, std::ostream& out);
void write_csv(const OhlcvSeries& series, const std::filesystem::path& path);

/// Element i is (volume[i+1] - volume[i]) / volume[i].
std::vector<double> volume_change_rates(const OhlcvSeries& series);

/// Rounds half away from zero at the given number of decimals.
double round_half_away(double value, int decimals);

/// Fraction to percent at one decimal, e.g. 0.032353 -> 3.2.
double rate_to_percent(double rate);

/// Inclusive date range; throws empty_window when no bar falls inside.
OhlcvSeries slice_window(const OhlcvSeries& series, const Date& start, const Date& end);

enum class RateCheckStatus { consistent, inconsistent, unverifiable };

struct RateCheck {
  Date date{};
  std::optional<double> recomputed_percent;
  double printed_percent = 0.0;
  RateCheckStatus status = RateCheckStatus::unverifiable;
};

/// Compares published one-decimal change rates against the ones recomputed
/// from the volumes. The first bar has no predecessor and is unverifiable.
std::vector<RateCheck> check_change_rates(const OhlcvSeries& series,
                                          std::span<const double> printed_percent);

/// Geometric Brownian motion with a sinusoidal drift term, used to augment
/// the short desk sample for training.
struct SyntheticConfig {
  std::size_t bars = 200;
  double start_price = 110.0;
  double drift = 0.0;               // per day
  double volatility = 0.006;        // per-day log-return std
  double seasonal_amplitude = 0.002;  // per-day drift swing
  double seasonal_period = 20.0;    // days
  double base_volume = 700.0;
  double volume_volatility = 0.05;
  Date start_date = Date{std::chrono::year{2023}, std::chrono::month{1}, std::chrono::day{1}};
};

OhlcvSeries synthetic_series(const SyntheticConfig& config, std::uint64_t seed);

}  // namespace fxcast::market
