#include "fxcast/backtest.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fxcast/error.hpp"
#include "fxcast/market_data.hpp"
#include "text_util.hpp"

namespace fxcast::backtest {

std::string_view to_string(Side side) {
  switch (side) {
    case Side::buy: return "Buy";
    case Side::sell: return "Sell";
    case Side::hold: return "Hold";
  }
  return "Hold";
}

Side side_from_string(std::string_view text) {
  if (text == "Buy") return Side::buy;
  if (text == "Sell") return Side::sell;
  if (text == "Hold") return Side::hold;
  throw Error(ErrorKind::parse, "unknown side '" + std::string(text) + "'");
}

int direction(Side side) {
  return side == Side::buy ? 1 : side == Side::sell ? -1 : 0;
}

Side opposite(Side side) {
  return side == Side::buy ? Side::sell : side == Side::sell ? Side::buy : Side::hold;
}

Side decide(double predicted_next_close, double reference_close, double epsilon) {
  if (!(predicted_next_close > 0.0) || !(reference_close > 0.0)) {
    throw Error(ErrorKind::domain, "decide needs positive prices");
  }
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::domain, "epsilon must be >= 0");
  if (predicted_next_close > reference_close + epsilon) return Side::buy;
  if (predicted_next_close < reference_close - epsilon) return Side::sell;
  return Side::hold;
}

namespace {

void check_lengths(std::size_t dates, std::size_t sides, std::size_t preds, std::size_t actuals) {
  if (dates != preds || sides != preds || actuals != preds + 1) {
    throw Error(ErrorKind::pairing,
                std::to_string(preds) + " predictions need " + std::to_string(preds) +
                    " dates and sides and " + std::to_string(preds + 1) +
                    " actual closes (reference day first); got " + std::to_string(dates) + ", " +
                    std::to_string(sides) + ", " + std::to_string(actuals));
  }
}

}  // namespace

BacktestLedger settle(std::span<const Date> dates, std::span<const Side> sides,
                      std::span<const double> predicted_closes,
                      std::span<const double> actual_closes, const BacktestOptions& options) {
  check_lengths(dates.size(), sides.size(), predicted_closes.size(), actual_closes.size());
  if (!(options.notional > 0.0)) throw Error(ErrorKind::domain, "notional must be positive");
  for (double a : actual_closes) {
    if (!(a > 0.0)) throw Error(ErrorKind::domain, "actual closes must be positive");
  }
  BacktestLedger ledger;
  double cum_raw = 0.0, cum_rounded = 0.0;
  for (std::size_t t = 0; t < predicted_closes.size(); ++t) {
    if (t > 0 && !(dates[t - 1] < dates[t])) {
      throw Error(ErrorKind::ordering, "ledger dates must be strictly increasing");
    }
    LedgerRow row;
    row.date = dates[t];
    row.predicted_close = predicted_closes[t];
    row.reference_close = actual_closes[t];
    row.actual_close = actual_closes[t + 1];
    row.side = sides[t];
    const int s = direction(row.side);
    row.notional = s == 0 ? 0.0 : options.notional;
    const double change = (row.actual_close - row.reference_close) / row.reference_close;
    row.raw_pnl = s * (options.notional * change);
    if (s != 0) row.raw_pnl -= options.fee;
    row.rounded_pnl = market::round_half_away(row.raw_pnl, 1);
    cum_raw += row.raw_pnl;
    cum_rounded += row.rounded_pnl;
    row.cumulative_raw = cum_raw;
    row.cumulative_rounded = cum_rounded;
    ledger.rows.push_back(row);
  }
  return ledger;
}

BacktestLedger run_backtest(std::span<const Date> dates, std::span<const double> predicted_closes,
                            std::span<const double> actual_closes, const BacktestOptions& options) {
  check_lengths(dates.size(), predicted_closes.size(), predicted_closes.size(),
                actual_closes.size());
  std::vector<Side> sides;
  for (std::size_t t = 0; t < predicted_closes.size(); ++t) {
    sides.push_back(decide(predicted_closes[t], actual_closes[t], options.epsilon));
  }
  return settle(dates, sides, predicted_closes, actual_closes, options);
}

void write_ledger_csv(const BacktestLedger& ledger, std::ostream& out) {
  out << kLedgerCsvHeader << '\n';
  for (const auto& r : ledger.rows) {
    out << format_date(r.date) << ',' << text::fixed(r.predicted_close, 2) << ','
        << text::fixed(r.actual_close, 2) << ',' << to_string(r.side) << ','
        << text::shortest(r.notional) << ',' << text::shortest(r.raw_pnl) << ','
        << text::fixed(r.rounded_pnl, 1) << ',' << text::shortest(r.cumulative_raw) << ','
        << text::fixed(r.cumulative_rounded, 1) << '\n';
  }
}

void write_ledger_csv(const BacktestLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write_ledger_csv(ledger, out);
}

std::string roi_report(const BacktestLedger& ledger) {
  if (ledger.rows.empty()) throw Error(ErrorKind::empty_data, "ledger is empty");
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s  %-6s  %14s  %12s  %14s\n", "date", "side",
                "notional_musd", "return_musd", "cumulative_musd");
  out << buf;
  for (const auto& r : ledger.rows) {
    std::snprintf(buf, sizeof buf, "%-10s  %-6s  %14s  %12s  %14s\n", format_date(r.date).c_str(),
                  std::string(to_string(r.side)).c_str(), text::shortest(r.notional).c_str(),
                  text::fixed(r.rounded_pnl, 1).c_str(),
                  text::fixed(r.cumulative_rounded, 1).c_str());
    out << buf;
  }
  out << "cumulative return, rounded daily (0.1 musd): " << text::fixed(ledger.total_rounded(), 1)
      << '\n';
  out << "cumulative return, raw:                      " << text::fixed(ledger.total_raw(), 6)
      << '\n';
  return out.str();
}

}  // namespace fxcast::backtest
