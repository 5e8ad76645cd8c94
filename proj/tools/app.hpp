#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fxcast/backtest.hpp"
#include "fxcast/error.hpp"
#include "fxcast/forecasting.hpp"
#include "fxcast/gan_model.hpp"
#include "fxcast/training.hpp"

namespace fxcast::app {

inline constexpr int kConfigSchemaVersion = 1;

/// Everything a run needs. Relative paths read from a config file are
/// resolved against that file's directory.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  bool strict = false;

  /// Training series; empty means a seeded synthetic series.
  std::filesystem::path data;
  market::SyntheticConfig synthetic;
  /// Condition days for `forecast`; empty means the tail of the ingested series.
  std::filesystem::path condition;
  /// Forecast CSV for evaluate/backtest/report; empty means <out>/forecast.csv.
  std::filesystem::path forecast_path;
  /// Realized bars, merged by date. Backtest also needs the day before the
  /// first forecast date for its reference close.
  std::vector<std::filesystem::path> actual;

  std::string recipe = "interpolate,log,difference:1,zscore";
  /// Raw days per condition window.
  std::size_t window = 5;

  gan::GanConfig model;  // generator.condition_window is derived from window
  training::TrainConfig train;

  std::size_t horizon = 5;
  forecasting::ZPolicy z_policy = forecasting::ZeroNoise{};

  backtest::BacktestOptions backtest;

  void validate() const;
};

RunConfig default_config();

/// Overlays the JSON document on the defaults; unknown keys and wrong types
/// are config errors naming the field path.
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

/// Process exit status for a failure category.
int exit_code(ErrorKind kind);

/// Artifact names inside the output directory.
namespace files {
inline constexpr std::string_view ingested = "ingested.csv";
inline constexpr std::string_view pipeline = "pipeline.json";
inline constexpr std::string_view transformed = "transformed.csv";
inline constexpr std::string_view checkpoint = "model.ckpt";
inline constexpr std::string_view epochs = "epochs.csv";
inline constexpr std::string_view forecast = "forecast.csv";
inline constexpr std::string_view accuracy = "accuracy.csv";
inline constexpr std::string_view ledger = "ledger.csv";
inline constexpr std::string_view report = "report.txt";
inline constexpr std::string_view config_echo = "effective_config.json";
inline constexpr std::string_view metadata = "run_metadata.json";
}  // namespace files

// Each subcommand writes its artifacts under config.out and a short summary
// to `log`. Missing prerequisites raise dependency errors naming the file.
void run_ingest(const RunConfig& config, std::ostream& log);
void run_preprocess(const RunConfig& config, std::ostream& log);
void run_train(const RunConfig& config, std::ostream& log);
void run_forecast(const RunConfig& config, std::ostream& log);
void run_evaluate(const RunConfig& config, std::ostream& log);
void run_backtest(const RunConfig& config, std::ostream& log);
void run_report(const RunConfig& config, std::ostream& log);
/// Returns true when every check passes.
bool run_gradcheck(const RunConfig& config, std::ostream& log);

/// Echoes the effective config and writes the timestamped metadata sidecar.
void record_run(const RunConfig& config, std::string_view subcommand);

struct GradCheckResult {
  std::string name;
  double max_relative_error = 0.0;
};

/// Central-difference checks of every autodiff primitive and both networks.
std::vector<GradCheckResult> gradcheck_suite(std::uint64_t seed);
inline constexpr double kGradCheckTolerance = 1e-4;

}  // namespace fxcast::app
