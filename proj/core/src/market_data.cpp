#include "fxcast/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fxcast/error.hpp"
#include "fxcast/fixtures.hpp"
#include "fxcast/rng.hpp"
#include "text_util.hpp"

namespace fxcast::market {

std::string_view field_name(Field field) {
  switch (field) {
    case Field::volume: return "volume";
    case Field::open: return "open";
    case Field::high: return "high";
    case Field::low: return "low";
    case Field::close: return "close";
  }
  return "?";
}

std::optional<double> OhlcvBar::get(Field field) const {
  switch (field) {
    case Field::volume: return volume;
    case Field::open: return open;
    case Field::high: return high;
    case Field::low: return low;
    case Field::close: return close;
  }
  return std::nullopt;
}

void OhlcvBar::set(Field field, std::optional<double> value) {
  switch (field) {
    case Field::volume: volume = value; break;
    case Field::open: open = value; break;
    case Field::high: high = value; break;
    case Field::low: low = value; break;
    case Field::close: close = value; break;
  }
}

double OhlcvBar::value(Field field) const {
  auto v = get(field);
  if (!v) {
    throw Error(ErrorKind::empty_data,
                std::string(field_name(field)) + " missing on " + format_date(date));
  }
  return *v;
}

bool OhlcvBar::complete() const {
  return std::all_of(kAllFields.begin(), kAllFields.end(),
                     [&](Field f) { return get(f).has_value(); });
}

OhlcvSeries::OhlcvSeries(std::string symbol, std::vector<OhlcvBar> bars)
    : symbol_(std::move(symbol)), bars_(std::move(bars)) {
  for (std::size_t i = 1; i < bars_.size(); ++i) {
    if (!(bars_[i - 1].date < bars_[i].date)) {
      throw Error(ErrorKind::ordering, "dates must be strictly increasing: " +
                                           format_date(bars_[i].date) + " follows " +
                                           format_date(bars_[i - 1].date));
    }
  }
  for (std::size_t i = 0; i < bars_.size(); ++i) {
    auto& bar = bars_[i];
    bar.volume_change_rate.reset();
    if (i > 0 && bar.volume && bars_[i - 1].volume) {
      bar.volume_change_rate = (*bar.volume - *bars_[i - 1].volume) / *bars_[i - 1].volume;
    }
  }
}

std::vector<std::optional<double>> OhlcvSeries::column(Field field) const {
  std::vector<std::optional<double>> out;
  out.reserve(bars_.size());
  for (const auto& bar : bars_) out.push_back(bar.get(field));
  return out;
}

std::vector<double> OhlcvSeries::values(Field field) const {
  std::vector<double> out;
  out.reserve(bars_.size());
  for (const auto& bar : bars_) out.push_back(bar.value(field));
  return out;
}

std::vector<Date> OhlcvSeries::dates() const {
  std::vector<Date> out;
  out.reserve(bars_.size());
  for (const auto& bar : bars_) out.push_back(bar.date);
  return out;
}

bool OhlcvSeries::complete() const {
  return std::all_of(bars_.begin(), bars_.end(), [](const OhlcvBar& b) { return b.complete(); });
}

OhlcvSeries parse_csv(std::istream& in, const LoadOptions& options, std::string_view source) {
  const std::string where(source);
  std::string line;
  if (!text::read_line(in, line)) {
    throw Error(ErrorKind::parse, where + ": missing header");
  }
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  if (text::trim(line) != kCsvHeader) {
    throw Error(ErrorKind::parse, where + ":1: expected header '" + std::string(kCsvHeader) +
                                      "', got '" + line + "'");
  }

  std::vector<OhlcvBar> bars;
  std::vector<std::string> warnings;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string at = where + ":" + std::to_string(line_no) + ": ";
    auto cells = text::split(line);
    if (cells.size() != 6) {
      throw Error(ErrorKind::parse,
                  at + "expected 6 fields, found " + std::to_string(cells.size()));
    }
    OhlcvBar bar;
    auto date = parse_date(text::trim(cells[0]));
    if (!date) {
      throw Error(ErrorKind::parse, at + "bad date '" + std::string(cells[0]) + "'");
    }
    bar.date = *date;
    for (std::size_t f = 0; f < kAllFields.size(); ++f) {
      std::optional<double> value;
      try {
        value = text::parse_double(cells[f + 1]);
      } catch (const Error& e) {
        throw Error(ErrorKind::parse, at + std::string(field_name(kAllFields[f])) + ": " +
                                          e.what());
      }
      if (value && *value <= 0.0) {
        throw Error(ErrorKind::domain, at + std::string(field_name(kAllFields[f])) +
                                           " must be positive, got " + text::shortest(*value));
      }
      bar.set(kAllFields[f], value);
    }
    if (!bars.empty() && !(bars.back().date < bar.date)) {
      throw Error(ErrorKind::ordering, at + "date " + format_date(bar.date) +
                                           " does not follow " + format_date(bars.back().date));
    }
    if (bar.open && bar.high && bar.low && bar.close) {
      const bool high_ok = *bar.high >= std::max(*bar.open, *bar.close);
      const bool low_ok = *bar.low <= std::min(*bar.open, *bar.close);
      if (!high_ok || !low_ok) {
        std::string msg = at + "inconsistent OHLC on " + format_date(bar.date) +
                          (high_ok ? "" : " (high below open/close)") +
                          (low_ok ? "" : " (low above open/close)");
        if (options.strict) throw Error(ErrorKind::domain, msg);
        warnings.push_back(std::move(msg));
      }
    }
    bars.push_back(bar);
  }

  OhlcvSeries series(options.symbol, std::move(bars));
  for (auto& w : warnings) series.add_warning(std::move(w));
  return series;
}

OhlcvSeries load_csv(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return parse_csv(in, options, path.string());
}

void write_csv(const OhlcvSeries& series, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& bar : series.bars()) {
    out << format_date(bar.date);
    for (Field f : kAllFields) {
      out << ',';
      if (auto v = bar.get(f)) out << text::shortest(*v);
    }
    out << '\n';
  }
}

void write_csv(const OhlcvSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write_csv(series, out);
}

std::vector<double> volume_change_rates(const OhlcvSeries& series) {
  if (series.size() < 2) {
    throw Error(ErrorKind::insufficient_data, "change rates need at least 2 bars, got " +
                                                  std::to_string(series.size()));
  }
  const auto volume = series.values(Field::volume);
  std::vector<double> rates;
  rates.reserve(volume.size() - 1);
  for (std::size_t i = 0; i + 1 < volume.size(); ++i) {
    rates.push_back((volume[i + 1] - volume[i]) / volume[i]);
  }
  return rates;
}

double round_half_away(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

double rate_to_percent(double rate) { return round_half_away(rate * 100.0, 1); }

OhlcvSeries slice_window(const OhlcvSeries& series, const Date& start, const Date& end) {
  if (end < start) {
    throw Error(ErrorKind::domain,
                "window start " + format_date(start) + " is after end " + format_date(end));
  }
  std::vector<OhlcvBar> bars;
  for (const auto& bar : series.bars()) {
    if (!(bar.date < start) && !(end < bar.date)) bars.push_back(bar);
  }
  if (bars.empty()) {
    throw Error(ErrorKind::empty_window,
                "no bars between " + format_date(start) + " and " + format_date(end));
  }
  // Change rates are recomputed within the window, so the first bar loses its.
  return OhlcvSeries(series.symbol(), std::move(bars));
}

std::vector<RateCheck> check_change_rates(const OhlcvSeries& series,
                                          std::span<const double> printed_percent) {
  if (printed_percent.size() != series.size()) {
    throw Error(ErrorKind::pairing, "printed rates (" + std::to_string(printed_percent.size()) +
                                        ") do not match bars (" +
                                        std::to_string(series.size()) + ")");
  }
  std::vector<RateCheck> checks;
  for (std::size_t i = 0; i < series.size(); ++i) {
    RateCheck check;
    check.date = series[i].date;
    check.printed_percent = printed_percent[i];
    if (auto rate = series[i].volume_change_rate) {
      check.recomputed_percent = rate_to_percent(*rate);
      check.status = std::abs(*check.recomputed_percent - printed_percent[i]) < 1e-9
                         ? RateCheckStatus::consistent
                         : RateCheckStatus::inconsistent;
    }
    checks.push_back(check);
  }
  return checks;
}

OhlcvSeries synthetic_series(const SyntheticConfig& config, std::uint64_t seed) {
  if (config.bars == 0 || config.start_price <= 0.0 || config.base_volume <= 0.0 ||
      config.volatility < 0.0 || config.seasonal_period <= 0.0) {
    throw Error(ErrorKind::config, "invalid synthetic series configuration");
  }
  Rng rng(seed);
  const double sigma = config.volatility;
  std::vector<OhlcvBar> bars;
  bars.reserve(config.bars);
  double prev_close = config.start_price;
  for (std::size_t t = 0; t < config.bars; ++t) {
    const double season =
        config.seasonal_amplitude *
        std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / config.seasonal_period);
    const double log_return =
        config.drift + season - 0.5 * sigma * sigma + sigma * rng.normal();
    OhlcvBar bar;
    bar.date = add_days(config.start_date, static_cast<int>(t));
    const double open = prev_close * std::exp(0.1 * sigma * rng.normal());
    const double close = prev_close * std::exp(log_return);
    bar.open = open;
    bar.close = close;
    bar.high = std::max(open, close) * std::exp(0.5 * sigma * std::abs(rng.normal()));
    bar.low = std::min(open, close) * std::exp(-0.5 * sigma * std::abs(rng.normal()));
    bar.volume = config.base_volume * std::exp(config.volume_volatility * rng.normal());
    bars.push_back(bar);
    prev_close = close;
  }
  return OhlcvSeries("SYNTH", std::move(bars));
}

}  // namespace fxcast::market

namespace fxcast::fixtures {

market::OhlcvSeries condition_series() {
  std::vector<market::OhlcvBar> bars;
  for (const auto& day : kConditionDays) {
    market::OhlcvBar bar;
    bar.date = *parse_date(day.date);
    bar.volume = day.volume_musd;
    bar.open = day.open;
    bar.high = day.high;
    bar.low = day.low;
    bar.close = day.close;
    bars.push_back(bar);
  }
  return market::OhlcvSeries("USDJPY", std::move(bars));
}

std::array<double, 5> printed_change_percents() {
  std::array<double, 5> out{};
  for (std::size_t i = 0; i < kConditionDays.size(); ++i) {
    out[i] = kConditionDays[i].printed_change_percent;
  }
  return out;
}

market::OhlcvSeries forecast_actuals() {
  std::vector<market::OhlcvBar> bars;
  for (const auto& day : kForecastDays) {
    market::OhlcvBar bar;
    bar.date = *parse_date(day.date);
    bar.open = day.actual_open;
    bar.high = day.actual_high;
    bar.low = day.actual_low;
    bar.close = day.actual_close;
    bars.push_back(bar);
  }
  return market::OhlcvSeries("USDJPY", std::move(bars));
}

}  // namespace fxcast::fixtures
