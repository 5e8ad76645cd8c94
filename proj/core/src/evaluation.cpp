#include "fxcast/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "fxcast/error.hpp"
#include "text_util.hpp"

namespace fxcast::evaluation {

double mse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    throw Error(ErrorKind::pairing, std::to_string(actual.size()) + " actual values vs " +
                                        std::to_string(predicted.size()) + " predicted");
  }
  if (actual.empty()) throw Error(ErrorKind::insufficient_data, "no values to compare");
  double total = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = actual[i] - predicted[i];
    total += d * d;
  }
  return total / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  return std::sqrt(mse(actual, predicted));
}

namespace {

constexpr market::Field kFields[4] = {market::Field::open, market::Field::high,
                                      market::Field::low, market::Field::close};

double field_of(const forecasting::OhlcRow& row, std::size_t k) {
  switch (k) {
    case 0: return row.open;
    case 1: return row.high;
    case 2: return row.low;
    default: return row.close;
  }
}

}  // namespace

AccuracyReport accuracy_report(const forecasting::ForecastResult& forecast,
                               const market::OhlcvSeries& actual) {
  if (forecast.dates.size() != forecast.predicted.size()) {
    throw Error(ErrorKind::pairing, "forecast dates and rows differ in count");
  }
  if (forecast.size() == 0) throw Error(ErrorKind::insufficient_data, "forecast is empty");
  std::map<Date, std::size_t> index;
  for (std::size_t i = 0; i < actual.size(); ++i) index[actual[i].date] = i;

  std::string missing;
  for (const auto& date : forecast.dates) {
    if (!index.contains(date)) missing += (missing.empty() ? "" : ", ") + format_date(date);
  }
  if (!missing.empty()) throw Error(ErrorKind::alignment, "no actual bar for " + missing);

  AccuracyReport report;
  report.n = forecast.size();
  std::array<std::vector<double>, 4> predicted, observed;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    const auto& bar = actual[index.at(forecast.dates[i])];
    AccuracyRow row{forecast.dates[i], forecast.predicted[i], {}};
    double values[4];
    for (std::size_t k = 0; k < 4; ++k) values[k] = bar.value(kFields[k]);
    row.actual = {values[0], values[1], values[2], values[3]};
    for (std::size_t k = 0; k < 4; ++k) {
      predicted[k].push_back(field_of(row.predicted, k));
      observed[k].push_back(values[k]);
    }
    report.rows.push_back(row);
  }
  for (std::size_t k = 0; k < 4; ++k) {
    report.fields[k].mse = mse(observed[k], predicted[k]);
    report.fields[k].rmse = std::sqrt(report.fields[k].mse);
  }
  return report;
}

void write_report_csv(const AccuracyReport& report, std::ostream& out) {
  out << "date,pred_open,actual_open,pred_high,actual_high,pred_low,actual_low,pred_close,"
         "actual_close\n";
  for (const auto& row : report.rows) {
    out << format_date(row.date);
    for (std::size_t k = 0; k < 4; ++k) {
      out << ',' << text::fixed(field_of(row.predicted, k), 2) << ','
          << text::fixed(field_of(row.actual, k), 2);
    }
    out << '\n';
  }
  out << "rmse";
  for (const auto& field : report.fields) out << ',' << text::fixed(field.rmse, 2) << ',';
  out << '\n';
}

void write_report_csv(const AccuracyReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write_report_csv(report, out);
}

std::string format_report(const AccuracyReport& report) {
  static constexpr const char* kNames[4] = {"open", "high", "low", "close"};
  std::ostringstream out;
  out << "date        ";
  for (const char* name : kNames) out << "  pred_" << name << "  actual_" << name;
  out << '\n';
  char buf[64];
  for (const auto& row : report.rows) {
    out << format_date(row.date) << "  ";
    for (std::size_t k = 0; k < 4; ++k) {
      std::snprintf(buf, sizeof buf, "  %*s  %*s", 5 + static_cast<int>(std::char_traits<char>::length(kNames[k])),
                    text::fixed(field_of(row.predicted, k), 2).c_str(),
                    7 + static_cast<int>(std::char_traits<char>::length(kNames[k])),
                    text::fixed(field_of(row.actual, k), 2).c_str());
      out << buf;
    }
    out << '\n';
  }
  out << "RMSE over " << report.n << " days:";
  for (std::size_t k = 0; k < 4; ++k) {
    out << ' ' << kNames[k] << ' ' << text::fixed(report.fields[k].rmse, 2)
        << (k + 1 < 4 ? "," : "\n");
  }
  return out.str();
}

}  // namespace fxcast::evaluation
