#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "app.hpp"

using namespace fxcast;
namespace fs = std::filesystem;

namespace {

const fs::path kData = FXCAST_DATA_DIR;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fxcast_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::io;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

app::RunConfig fixture_config(const std::string& name) {
  auto c = app::default_config();
  c.out = fresh_dir(name);
  c.forecast_path = kData / "reference_forecast.csv";
  c.actual = {kData / "observed_bars.csv", kData / "realized_bars.csv"};
  return c;
}

}  // namespace

TEST(Config, DefaultsRoundTripThroughJson) {
  auto c = app::default_config();
  c.seed = 12;
  c.actual = {"a.csv", "b.csv"};
  c.z_policy = forecasting::SampleMean{64, 3};
  const auto text = app::config_to_json(c);
  EXPECT_EQ(app::config_to_json(app::parse_config(text)), text);
}

TEST(Config, ErrorsNameTheFieldPath) {
  auto msg = message_of([] { app::parse_config(R"({"schema_version":1,"train":{"epoch":3}})"); });
  EXPECT_NE(msg.find("train.epoch"), std::string::npos) << msg;
  msg = message_of([] { app::parse_config(R"({"schema_version":1,"train":{"lr":"fast"}})"); });
  EXPECT_NE(msg.find("train.lr"), std::string::npos) << msg;
  msg = message_of([] { app::parse_config(R"({"schema_version":1,"preprocess":{"window":1}})"); });
  EXPECT_NE(msg.find("preprocess.window"), std::string::npos) << msg;
  msg = message_of([] {
    app::parse_config(R"({"schema_version":1,"model":{"discriminator":{"conv_layers":[{"kernel":"x"}]}}})");
  });
  EXPECT_NE(msg.find("model.discriminator.conv_layers[0].kernel"), std::string::npos) << msg;
  EXPECT_EQ(kind_of([] { app::parse_config(R"({"seed":1})"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { app::parse_config(R"({"schema_version":2})"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { app::parse_config(R"({"schema_version":1,"forecast":{"z_policy":"mean"}})"); }),
            ErrorKind::config);
  EXPECT_EQ(kind_of([] { app::parse_config("{"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { app::parse_config(R"({"schema_version":1,"seed":-1})"); }), ErrorKind::config);
}

TEST(Config, RelativeInputPathsResolveAgainstConfigDir) {
  const auto c = app::parse_config(R"({"schema_version":1,"data":{"actual":["x.csv"]}})", "/etc/run");
  ASSERT_EQ(c.actual.size(), 1u);
  EXPECT_EQ(c.actual[0], fs::path("/etc/run/x.csv"));
}

TEST(Config, BundledDefaultFileLoads) {
  const auto c = app::load_config(kData.parent_path() / "config" / "default.json");
  EXPECT_EQ(c.window, 5u);
  EXPECT_EQ(c.actual.size(), 2u);
  EXPECT_TRUE(fs::exists(c.condition));
}

TEST(ExitCodes, Categories) {
  EXPECT_EQ(app::exit_code(ErrorKind::config), 2);
  EXPECT_EQ(app::exit_code(ErrorKind::dependency), 3);
  EXPECT_NE(app::exit_code(ErrorKind::divergence), 0);
  EXPECT_NE(app::exit_code(ErrorKind::corrupt_checkpoint), app::exit_code(ErrorKind::parse));
}

TEST(Commands, EvaluateBundledFixture) {
  const auto c = fixture_config("evaluate");
  std::ostringstream log;
  app::run_evaluate(c, log);
  EXPECT_NE(log.str().find("open 0.02, high 0.02, low 0.02, close 0.02"), std::string::npos) << log.str();
  EXPECT_TRUE(fs::exists(c.out / app::files::accuracy));
}

TEST(Commands, BacktestBundledFixture) {
  const auto c = fixture_config("backtest");
  std::ostringstream log;
  app::run_backtest(c, log);
  EXPECT_NE(log.str().find("rounded daily (0.1 musd): 1.0"), std::string::npos) << log.str();
  const auto ledger = slurp(c.out / app::files::ledger);
  EXPECT_NE(ledger.find("2023-04-10,112.70,112.68,Buy,100"), std::string::npos) << ledger;
}

TEST(Commands, BacktestWithoutReferenceDayIsAlignment) {
  auto c = fixture_config("noref");
  c.actual = {kData / "realized_bars.csv"};
  std::ostringstream log;
  EXPECT_EQ(kind_of([&] { app::run_backtest(c, log); }), ErrorKind::alignment);
}

TEST(Commands, ReportComposesAccuracyAndReturns) {
  const auto c = fixture_config("report");
  std::ostringstream log;
  app::run_report(c, log);
  const auto text = slurp(c.out / app::files::report);
  EXPECT_NE(text.find("RMSE"), std::string::npos);
  EXPECT_NE(text.find("0.874288"), std::string::npos);
}

TEST(Commands, MissingArtifactIsDependencyError) {
  auto c = app::default_config();
  c.out = fresh_dir("missing");
  std::ostringstream log;
  const auto msg = message_of([&] { app::run_train(c, log); });
  EXPECT_NE(msg.find("dependency"), std::string::npos);
  EXPECT_NE(msg.find("ingested.csv"), std::string::npos) << msg;
  EXPECT_EQ(kind_of([&] { app::run_forecast(c, log); }), ErrorKind::dependency);
  EXPECT_EQ(kind_of([&] { app::run_evaluate(c, log); }), ErrorKind::dependency);  // no forecast yet
  c.forecast_path = kData / "reference_forecast.csv";
  EXPECT_EQ(kind_of([&] { app::run_evaluate(c, log); }), ErrorKind::config);  // no actuals
}

TEST(Commands, GradcheckPasses) {
  std::ostringstream log;
  EXPECT_TRUE(app::run_gradcheck(app::default_config(), log)) << log.str();
}

TEST(Commands, ChainIsReproducibleAndLeavesInputsAlone) {
  const auto before = slurp(kData / "observed_bars.csv");
  std::vector<std::string> outputs[2];
  for (int run = 0; run < 2; ++run) {
    auto c = app::default_config();
    c.out = fresh_dir("chain" + std::to_string(run));
    c.seed = 21;
    c.train.epochs = 3;
    c.synthetic.bars = 60;
    c.condition = kData / "observed_bars.csv";
    c.actual = {kData / "observed_bars.csv", kData / "realized_bars.csv"};
    std::ostringstream log;
    app::record_run(c, "chain");
    app::run_ingest(c, log);
    app::run_preprocess(c, log);
    app::run_train(c, log);
    app::run_forecast(c, log);
    app::run_evaluate(c, log);
    app::run_backtest(c, log);
    for (auto name : {app::files::ingested, app::files::pipeline, app::files::transformed,
                      app::files::checkpoint, app::files::epochs, app::files::forecast,
                      app::files::accuracy, app::files::ledger}) {
      outputs[run].push_back(slurp(c.out / name));
      EXPECT_FALSE(outputs[run].back().empty()) << name;
    }
  }
  EXPECT_EQ(outputs[0], outputs[1]);
  EXPECT_EQ(slurp(kData / "observed_bars.csv"), before);
}

TEST(Commands, CheckpointFromOtherConfigIsRejected) {
  auto c = app::default_config();
  c.out = fresh_dir("mismatch");
  c.train.epochs = 1;
  c.synthetic.bars = 40;
  std::ostringstream log;
  app::run_ingest(c, log);
  app::run_preprocess(c, log);
  app::run_train(c, log);
  c.model.generator.lstm_hidden = 7;
  EXPECT_EQ(kind_of([&] { app::run_forecast(c, log); }), ErrorKind::incompatible_checkpoint);
}
