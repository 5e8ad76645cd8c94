#include <gtest/gtest.h>

#include <sstream>

#include "fxcast/backtest.hpp"
#include "fxcast/error.hpp"
#include "fxcast/fixtures.hpp"
#include "fxcast/market_data.hpp"
#include "fxcast/rng.hpp"

using namespace fxcast;
using namespace fxcast::backtest;

namespace {

struct Fixture {
  std::vector<Date> dates;
  std::vector<double> predicted;
  std::vector<double> actual;
};

Fixture reference() {
  Fixture f;
  f.actual.push_back(fixtures::kConditionDays.back().close);
  for (const auto& d : fixtures::kForecastDays) {
    f.dates.push_back(*parse_date(d.date));
    f.predicted.push_back(d.pred_close);
    f.actual.push_back(d.actual_close);
  }
  return f;
}

}  // namespace

TEST(Decide, Examples) {
  EXPECT_EQ(decide(111.90, 111.70), Side::buy);
  EXPECT_EQ(decide(111.70, 111.70), Side::hold);
  EXPECT_EQ(decide(100.0, 101.0), Side::sell);
  EXPECT_EQ(decide(111.75, 111.70, 0.1), Side::hold);
  try {
    decide(0.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
  }
  EXPECT_THROW(decide(1.0, 1.0, -0.1), Error);
}

TEST(Decide, ScaleInvariant) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double p = rng.uniform(90, 130), r = rng.uniform(90, 130), k = rng.uniform(0.01, 100);
    EXPECT_EQ(decide(p, r), decide(k * p, k * r));
  }
}

TEST(Backtest, ReferenceLedger) {
  const auto f = reference();
  const auto ledger = run_backtest(f.dates, f.predicted, f.actual);
  ASSERT_EQ(ledger.rows.size(), 5u);

  // Independent percent-change oracle.
  double cum = 0.0;
  for (std::size_t t = 0; t < 5; ++t) {
    const auto& row = ledger.rows[t];
    const auto& printed = fixtures::kTradeDays[t];
    EXPECT_EQ(row.side, Side::buy);
    EXPECT_EQ(row.notional, printed.notional_musd);
    EXPECT_EQ(row.rounded_pnl, printed.daily_return_musd);
    EXPECT_NEAR(row.cumulative_rounded, printed.cumulative_return_musd, 1e-12);
    const double raw = 100.0 * (f.actual[t + 1] - f.actual[t]) / f.actual[t];
    EXPECT_NEAR(row.raw_pnl, raw, 1e-12);
    cum += raw;
    EXPECT_NEAR(row.cumulative_raw, cum, 1e-12);
  }
  EXPECT_NEAR(ledger.total_rounded(), 1.0, 1e-12);
  EXPECT_NEAR(ledger.total_raw(), 0.875, 0.005);
  EXPECT_NEAR(ledger.rows[0].raw_pnl, 0.161, 5e-4);
}

TEST(Backtest, FlatActualsGiveZero) {
  const auto f = reference();
  const std::vector<double> flat(6, 111.7);
  const std::vector<Side> sides{Side::buy, Side::sell, Side::hold, Side::buy, Side::sell};
  const auto ledger = settle(f.dates, sides, f.predicted, flat);
  for (const auto& row : ledger.rows) {
    EXPECT_EQ(row.raw_pnl, 0.0);
    EXPECT_EQ(row.rounded_pnl, 0.0);
  }
}

TEST(Backtest, AntisymmetryAndScaling) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = reference();
    std::vector<double> actual(6), pred(5);
    for (double& v : actual) v = rng.uniform(100, 120);
    for (double& v : pred) v = rng.uniform(100, 120);
    std::vector<Side> sides, flipped;
    for (int i = 0; i < 5; ++i) {
      const Side s = static_cast<Side>(rng.below(3));
      sides.push_back(s);
      flipped.push_back(opposite(s));
    }
    const auto a = settle(f.dates, sides, pred, actual);
    const auto b = settle(f.dates, flipped, pred, actual);
    BacktestOptions big;
    big.notional = 300.0;
    const auto c = settle(f.dates, sides, pred, actual, big);
    for (std::size_t t = 0; t < 5; ++t) {
      EXPECT_EQ(b.rows[t].raw_pnl, -a.rows[t].raw_pnl);
      EXPECT_NEAR(c.rows[t].raw_pnl, 3.0 * a.rows[t].raw_pnl, 1e-12);
      EXPECT_NEAR(c.rows[t].cumulative_raw, 3.0 * a.rows[t].cumulative_raw, 1e-12);
    }
  }
}

TEST(Backtest, PairingError) {
  const auto f = reference();
  const std::vector<double> short_actual(f.actual.begin(), f.actual.end() - 1);
  try {
    run_backtest(f.dates, f.predicted, short_actual);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::pairing);
  }
}

TEST(Report, ShowsBothTracks) {
  const auto f = reference();
  const auto text = roi_report(run_backtest(f.dates, f.predicted, f.actual));
  EXPECT_NE(text.find("Buy"), std::string::npos);
  EXPECT_NE(text.find("0.874288"), std::string::npos);
  EXPECT_NE(text.find("rounded daily (0.1 musd): 1.0"), std::string::npos);

  const std::vector<Date> one{f.dates[0]};
  const std::vector<double> p{111.7}, a{111.7, 111.9};
  const auto hold = run_backtest(one, p, a);
  ASSERT_EQ(hold.rows.size(), 1u);
  EXPECT_EQ(hold.rows[0].side, Side::hold);
  EXPECT_EQ(hold.rows[0].raw_pnl, 0.0);
  EXPECT_NE(roi_report(hold).find("Hold"), std::string::npos);
}

TEST(Ledger, CsvHeader) {
  const auto f = reference();
  std::ostringstream out;
  write_ledger_csv(run_backtest(f.dates, f.predicted, f.actual), out);
  const auto s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), kLedgerCsvHeader);
  EXPECT_NE(s.find("2023-04-06,111.90,111.88,Buy,100"), std::string::npos);
}
