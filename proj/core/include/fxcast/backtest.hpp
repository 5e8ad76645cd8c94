#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fxcast/calendar.hpp"

namespace fxcast::backtest {

enum class Side { buy, sell, hold };

std::string_view to_string(Side side);
Side side_from_string(std::string_view text);
/// +1, -1 or 0.
int direction(Side side);
Side opposite(Side side);

/// Buy when the predicted close beats the reference by more than epsilon,
/// sell when it trails by more than epsilon, hold otherwise.
Side decide(double predicted_next_close, double reference_close, double epsilon = 0.0);

struct LedgerRow {
  Date date{};
  double predicted_close = 0.0;
  double reference_close = 0.0;
  double actual_close = 0.0;
  Side side = Side::hold;
  double notional = 0.0;
  double raw_pnl = 0.0;
  double rounded_pnl = 0.0;
  double cumulative_raw = 0.0;
  double cumulative_rounded = 0.0;
};

struct BacktestLedger {
  std::vector<LedgerRow> rows;

  double total_raw() const { return rows.empty() ? 0.0 : rows.back().cumulative_raw; }
  double total_rounded() const { return rows.empty() ? 0.0 : rows.back().cumulative_rounded; }
};

struct BacktestOptions {
  double notional = 100.0;  // millions USD per trade
  double epsilon = 0.0;
  double fee = 0.0;         // millions USD per executed trade
};

/// Day t trades on decide(pred_t, actual_{t-1}) and settles at actual_t.
/// `actual_closes` carries the reference day first, so it is one longer
/// than `predicted_closes`.
BacktestLedger run_backtest(std::span<const Date> dates, std::span<const double> predicted_closes,
                            std::span<const double> actual_closes,
                            const BacktestOptions& options = {});

/// Settles the given sides without deciding; run_backtest = decide + settle.
BacktestLedger settle(std::span<const Date> dates, std::span<const Side> sides,
                      std::span<const double> predicted_closes,
                      std::span<const double> actual_closes, const BacktestOptions& options = {});

inline constexpr std::string_view kLedgerCsvHeader =
    "date,pred_close,actual_close,side,notional_musd,pnl_musd_raw,pnl_musd_rounded,cum_raw,"
    "cum_rounded";

void write_ledger_csv(const BacktestLedger& ledger, std::ostream& out);
void write_ledger_csv(const BacktestLedger& ledger, const std::filesystem::path& path);

/// Rows shaped like the published return table, plus a footer giving both
/// the raw and the rounded cumulative return.
std::string roi_report(const BacktestLedger& ledger);

}  // namespace fxcast::backtest
