#include "fxcast/forecasting.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fxcast/error.hpp"
#include "text_util.hpp"

namespace fxcast::forecasting {

std::string describe(const ZPolicy& policy) {
  struct Visitor {
    std::string operator()(const ZeroNoise&) const { return "zero-noise"; }
    std::string operator()(const FixedSeed& p) const {
      return "fixed-seed:" + std::to_string(p.seed);
    }
    std::string operator()(const SampleMean& p) const {
      return "sample-mean:" + std::to_string(p.samples) + ":" + std::to_string(p.seed);
    }
  };
  return std::visit(Visitor{}, policy);
}

std::vector<double> ForecastResult::closes() const {
  std::vector<double> out;
  out.reserve(predicted.size());
  for (const auto& row : predicted) out.push_back(row.close);
  return out;
}

OhlcRow repair_ohlc(double open, double high, double low, double close) {
  if (!std::isfinite(open) || !std::isfinite(high) || !std::isfinite(low) ||
      !std::isfinite(close)) {
    throw Error(ErrorKind::domain, "repair_ohlc: non-finite price");
  }
  return {open, std::max({high, open, close}), std::min({low, open, close}), close};
}

namespace {

constexpr std::size_t kColumns = gan::kFeatureCount;

/// Rolling raw window, one vector per column (volume, O, H, L, C).
using Window = std::vector<std::vector<double>>;

/// Unrepaired next-day O/H/L/C in price space.
std::array<double, 4> predict_prices(const OneStepModel& model,
                                     const preprocess::FittedPipeline& pipeline, const Window& window,
                                     std::span<const double> noise) {
  preprocess::Frame frame;
  frame.names = pipeline.column_names();
  frame.columns = window;
  const auto transformed = pipeline.transform(frame);
  const std::size_t rows = transformed.rows();
  if (rows != model.condition_rows()) {
    throw Error(ErrorKind::config, "pipeline yields " + std::to_string(rows) +
                                       " condition rows, model expects " +
                                       std::to_string(model.condition_rows()));
  }
  std::vector<double> condition;
  condition.reserve(rows * kColumns);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < kColumns; ++c) condition.push_back(transformed.columns[c][r]);
  }
  const auto out = model.predict(condition, noise);
  std::array<double, 4> price{};
  for (std::size_t k = 0; k < 4; ++k) price[k] = pipeline.invert_next(k + 1, window[k + 1], out[k]);
  for (double p : price) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::domain, "forecast produced a non-positive or non-finite price");
    }
  }
  return price;
}

OhlcRow predict_day(const OneStepModel& model, const preprocess::FittedPipeline& pipeline,
                    const Window& window, std::span<const double> noise) {
  const auto p = predict_prices(model, pipeline, window, noise);
  return repair_ohlc(p[0], p[1], p[2], p[3]);
}

void roll(Window& window, const OhlcRow& row) {
  const double volume = window[0].back();
  const double values[kColumns] = {volume, row.open, row.high, row.low, row.close};
  for (std::size_t c = 0; c < kColumns; ++c) {
    window[c].erase(window[c].begin());
    window[c].push_back(values[c]);
  }
}

std::vector<OhlcRow> run_path(const OneStepModel& model,
                              const preprocess::FittedPipeline& pipeline, Window window,
                              std::size_t horizon, const std::function<void(std::span<double>)>& draw) {
  std::vector<OhlcRow> rows;
  std::vector<double> noise(model.noise_dim(), 0.0);
  for (std::size_t step = 0; step < horizon; ++step) {
    draw(noise);
    rows.push_back(predict_day(model, pipeline, window, noise));
    roll(window, rows.back());
  }
  return rows;
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (path + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

ForecastResult forecast(const OneStepModel& model, const preprocess::FittedPipeline& pipeline,
                        const market::OhlcvSeries& condition, std::size_t horizon,
                        const ZPolicy& z_policy) {
  if (horizon == 0) throw Error(ErrorKind::config, "forecast horizon must be >= 1");
  if (pipeline.column_names().size() != kColumns) {
    throw Error(ErrorKind::config, "pipeline must cover the five OHLCV columns");
  }
  const std::size_t days = model.condition_rows() + pipeline.rows_consumed();
  if (condition.size() != days) {
    throw Error(ErrorKind::config, "model needs " + std::to_string(days) +
                                       " condition days (window " +
                                       std::to_string(model.condition_rows()) + " + " +
                                       std::to_string(pipeline.rows_consumed()) +
                                       " consumed by the pipeline), got " +
                                       std::to_string(condition.size()));
  }

  Window window;
  const auto raw = preprocess::frame_from_series(condition);
  for (const auto& column : raw.columns) window.push_back(preprocess::interpolate_missing(column));

  ForecastResult result;
  result.z_policy = z_policy;
  Date date = condition.back().date;
  for (std::size_t i = 0; i < horizon; ++i) {
    date = add_days(date, 1);
    result.dates.push_back(date);
  }

  if (std::holds_alternative<ZeroNoise>(z_policy)) {
    result.predicted = run_path(model, pipeline, window, horizon, [](std::span<double> z) {
      std::fill(z.begin(), z.end(), 0.0);
    });
  } else if (const auto* fixed = std::get_if<FixedSeed>(&z_policy)) {
    Rng rng(fixed->seed);
    result.predicted = run_path(model, pipeline, window, horizon, [&](std::span<double> z) {
      for (double& v : z) v = rng.normal();
    });
  } else {
    const auto& policy = std::get<SampleMean>(z_policy);
    if (policy.samples == 0) throw Error(ErrorKind::config, "sample-mean policy needs samples >= 1");
    // Each day is the mean of `samples` draws given the (already averaged)
    // window, and that mean day rolls forward. Draws come in antithetic pairs
    // (z, -z) from one stream per step, so a larger sample count extends a
    // smaller one rather than reshuffling it.
    std::vector<double> noise(model.noise_dim());
    for (std::size_t step = 0; step < horizon; ++step) {
      Rng rng(path_seed(policy.seed, step));
      std::array<double, 4> total{};
      for (std::size_t k = 0; k < policy.samples; ++k) {
        if (k % 2 == 0) {
          for (double& v : noise) v = rng.normal();
        } else {
          for (double& v : noise) v = -v;
        }
        const auto p = predict_prices(model, pipeline, window, noise);
        for (std::size_t f = 0; f < 4; ++f) total[f] += p[f];
      }
      const double n = static_cast<double>(policy.samples);
      result.predicted.push_back(repair_ohlc(total[0] / n, total[1] / n, total[2] / n, total[3] / n));
      roll(window, result.predicted.back());
    }
  }
  return result;
}

void write_forecast_csv(const ForecastResult& result, std::ostream& out) {
  out << kForecastCsvHeader << '\n';
  for (std::size_t i = 0; i < result.size(); ++i) {
    const auto& row = result.predicted[i];
    out << format_date(result.dates[i]) << ',' << text::fixed(row.open, 2) << ','
        << text::fixed(row.high, 2) << ',' << text::fixed(row.low, 2) << ','
        << text::fixed(row.close, 2) << '\n';
  }
}

void write_forecast_csv(const ForecastResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write_forecast_csv(result, out);
}

ForecastResult parse_forecast_csv(std::istream& in, std::string_view source) {
  const std::string where(source);
  std::string line;
  if (!text::read_line(in, line) || text::trim(line) != kForecastCsvHeader) {
    throw Error(ErrorKind::parse, where + ":1: expected header '" +
                                      std::string(kForecastCsvHeader) + "'");
  }
  ForecastResult result;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string at = where + ":" + std::to_string(line_no) + ": ";
    const auto cells = text::split(line);
    if (cells.size() != 5) {
      throw Error(ErrorKind::parse, at + "expected 5 fields, got " + std::to_string(cells.size()));
    }
    const auto date = parse_date(text::trim(cells[0]));
    if (!date) throw Error(ErrorKind::parse, at + "bad date '" + std::string(cells[0]) + "'");
    if (!result.dates.empty() && !(result.dates.back() < *date)) {
      throw Error(ErrorKind::ordering, at + "dates must be strictly increasing");
    }
    std::array<double, 4> v{};
    for (std::size_t k = 0; k < 4; ++k) {
      std::optional<double> parsed;
      try {
        parsed = text::parse_double(cells[k + 1]);
      } catch (const Error& e) {
        throw Error(ErrorKind::parse, at + e.what());
      }
      if (!parsed) throw Error(ErrorKind::parse, at + "empty price field");
      v[k] = *parsed;
    }
    result.dates.push_back(*date);
    result.predicted.push_back({v[0], v[1], v[2], v[3]});
  }
  return result;
}

ForecastResult read_forecast_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  return parse_forecast_csv(in, path.string());
}

}  // namespace fxcast::forecasting
