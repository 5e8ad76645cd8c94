#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "app.hpp"

using namespace fxcast;

int main(int argc, char** argv) {
  CLI::App cli{"fxcast: conditional GAN forecasting of daily USD/JPY bars"};
  cli.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, data, condition, forecast;
  std::vector<std::string> actual;
  bool strict = false;
  std::optional<int> epochs, batch_size;
  std::optional<double> lr, notional, epsilon;
  std::optional<std::size_t> window, horizon;

  cli.add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
  cli.add_option("--seed", seed, "Seed for every random stream");
  cli.add_option("--out", out, "Output directory");
  cli.add_flag("--strict", strict, "Treat OHLC inconsistencies as errors");
  cli.add_option("--data", data, "Training OHLCV CSV (default: synthetic series)");
  cli.add_option("--condition", condition, "OHLCV CSV whose last window days condition the forecast");
  cli.add_option("--forecast", forecast, "Forecast CSV to evaluate or backtest");
  cli.add_option("--actual", actual, "Realized OHLCV CSV; repeat to merge several");
  cli.add_option("--epochs", epochs, "Training epochs");
  cli.add_option("--batch-size", batch_size, "Training batch size");
  cli.add_option("--lr", lr, "Adam learning rate");
  cli.add_option("--window", window, "Raw days per condition window");
  cli.add_option("--horizon", horizon, "Days to forecast");
  cli.add_option("--notional", notional, "Millions USD per trade");
  cli.add_option("--epsilon", epsilon, "Dead band around the reference close");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"ingest", "Load and validate the training series"},
      {"preprocess", "Fit the transform pipeline"},
      {"train", "Train the GAN and write a checkpoint"},
      {"forecast", "Recursive multi-day forecast"},
      {"evaluate", "RMSE of a forecast against actuals"},
      {"backtest", "Rule-based trading ledger"},
      {"report", "Accuracy and return tables together"},
      {"gradcheck", "Finite-difference check of the autodiff engine"},
  };
  for (const auto& [name, help] : commands) cli.add_subcommand(name, help)->fallthrough();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests are successes; anything else is a usage error.
    const int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = cli.get_subcommands().front()->get_name();

  try {
    app::RunConfig config = config_path.empty() ? app::default_config() : app::load_config(config_path);
    if (seed) config.seed = *seed;
    if (out) config.out = *out;
    if (strict) config.strict = true;
    if (data) config.data = *data;
    if (condition) config.condition = *condition;
    if (forecast) config.forecast_path = *forecast;
    if (!actual.empty()) config.actual.assign(actual.begin(), actual.end());
    if (epochs) config.train.epochs = *epochs;
    if (batch_size) config.train.batch_size = *batch_size;
    if (lr) config.train.lr = *lr;
    if (window) config.window = *window;
    if (horizon) config.horizon = *horizon;
    if (notional) config.backtest.notional = *notional;
    if (epsilon) config.backtest.epsilon = *epsilon;
    config.validate();

    if (command == "gradcheck") return app::run_gradcheck(config, std::cout) ? 0 : 1;

    app::record_run(config, command);
    if (command == "ingest") app::run_ingest(config, std::cout);
    if (command == "preprocess") app::run_preprocess(config, std::cout);
    if (command == "train") app::run_train(config, std::cout);
    if (command == "forecast") app::run_forecast(config, std::cout);
    if (command == "evaluate") app::run_evaluate(config, std::cout);
    if (command == "backtest") app::run_backtest(config, std::cout);
    if (command == "report") app::run_report(config, std::cout);
    return 0;
  } catch (const Error& e) {
    std::cerr << "fxcast " << command << ": " << e.what() << "\n";
    return app::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "fxcast " << command << ": " << e.what() << "\n";
    return 1;
  }
}
