#include "app.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fxcast/evaluation.hpp"
#include "fxcast/market_data.hpp"
#include "fxcast/preprocess.hpp"

namespace fxcast::app {

using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& message) {
  throw Error(ErrorKind::config, path + ": " + message);
}

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// Config reading. Every accessor carries the dotted field path for errors.
// ---------------------------------------------------------------------------

class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(display(), "expected an object");
  }

  /// Rejects keys not in `known`.
  void only(std::initializer_list<std::string_view> known) const {
    for (const auto& item : j_.items()) {
      if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
        config_error(field(item.key()), "unknown key");
      }
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  Section child(const char* key) const { return Section(j_.at(key), field(key)); }
  const Json& raw(const char* key) const { return j_.at(key); }
  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  void read(const char* key, double& out) const {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number()) config_error(field(key), "expected a number");
    out = v.get<double>();
  }
  void read(const char* key, bool& out) const {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) config_error(field(key), "expected true or false");
    out = v.get<bool>();
  }
  void read(const char* key, std::string& out) const {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_string()) config_error(field(key), "expected a string");
    out = v.get<std::string>();
  }
  void read(const char* key, std::uint64_t& out) const {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned()) config_error(field(key), "expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }
  void read(const char* key, std::size_t& out, bool) const {
    std::uint64_t v = out;
    read(key, v);
    out = static_cast<std::size_t>(v);
  }
  void read(const char* key, int& out) const {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) config_error(field(key), "expected an integer");
    out = v.get<int>();
  }
  void read_path(const char* key, fs::path& out, const fs::path& base) const {
    std::string s;
    read(key, s);
    if (!has(key)) return;
    out = resolve(s, base);
  }

  static fs::path resolve(const std::string& s, const fs::path& base) {
    if (s.empty()) return {};
    fs::path p(s);
    return p.is_relative() && !base.empty() ? base / p : p;
  }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }
  const Json& j_;
  std::string path_;
};

forecasting::ZPolicy parse_policy(const std::string& text, const std::string& path) {
  if (text == "zero-noise") return forecasting::ZeroNoise{};
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
      config_error(path, "bad number in z policy '" + text + "'");
    }
    return v;
  };
  const std::string_view t = text;
  if (t.rfind("fixed-seed:", 0) == 0) return forecasting::FixedSeed{number(t.substr(11))};
  if (t.rfind("sample-mean:", 0) == 0) {
    const auto rest = t.substr(12);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) config_error(path, "expected sample-mean:<n>:<seed>");
    return forecasting::SampleMean{number(rest.substr(0, colon)), number(rest.substr(colon + 1))};
  }
  config_error(path, "expected zero-noise, fixed-seed:<seed> or sample-mean:<n>:<seed>, got '" +
                         text + "'");
}

std::size_t recipe_rows_consumed(const std::string& recipe) {
  std::size_t consumed = 0;
  for (const auto& step : preprocess::parse_recipe(recipe)) {
    if (step.kind == preprocess::StepKind::difference) consumed += static_cast<std::size_t>(step.parameter);
  }
  return consumed;
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

fs::path artifact(const RunConfig& config, std::string_view name) { return config.out / name; }

fs::path require(const fs::path& path, std::string_view needed_by) {
  if (!fs::exists(path)) {
    throw Error(ErrorKind::dependency, std::string(needed_by) + " needs " + path.string() +
                                           ", which does not exist");
  }
  return path;
}

void ensure_out(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + config.out.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  return out;
}

gan::GanConfig model_config(const RunConfig& config) {
  gan::GanConfig g = config.model;
  g.generator.condition_window = config.window - recipe_rows_consumed(config.recipe);
  return g;
}

market::LoadOptions load_options(const RunConfig& config) {
  market::LoadOptions o;
  o.strict = config.strict;
  return o;
}

market::OhlcvSeries load_input(const RunConfig& config, const fs::path& path, std::string_view what) {
  return market::load_csv(require(path, what), load_options(config));
}

market::OhlcvSeries merged_actuals(const RunConfig& config, std::string_view what) {
  if (config.actual.empty()) config_error("data.actual", std::string(what) + " needs at least one actuals CSV");
  std::map<std::chrono::sys_days, market::OhlcvBar> bars;
  for (const auto& path : config.actual) {
    const auto series = load_input(config, path, what);
    for (const auto& bar : series.bars()) {
      const auto key = std::chrono::sys_days(bar.date);
      auto [it, inserted] = bars.emplace(key, bar);
      if (!inserted && it->second.close != bar.close) {
        throw Error(ErrorKind::alignment, "actuals disagree on the close of " + format_date(bar.date));
      }
    }
  }
  std::vector<market::OhlcvBar> ordered;
  for (auto& [key, bar] : bars) ordered.push_back(bar);
  return market::OhlcvSeries("USDJPY", std::move(ordered));
}

fs::path forecast_file(const RunConfig& config) {
  return config.forecast_path.empty() ? artifact(config, files::forecast) : config.forecast_path;
}

forecasting::ForecastResult load_forecast(const RunConfig& config, std::string_view what) {
  return forecasting::read_forecast_csv(require(forecast_file(config), what));
}

backtest::BacktestLedger ledger_for(const forecasting::ForecastResult& forecast,
                                    const market::OhlcvSeries& actual,
                                    const backtest::BacktestOptions& options) {
  if (forecast.size() == 0) throw Error(ErrorKind::empty_data, "forecast has no rows");
  std::map<std::chrono::sys_days, double> closes;
  for (const auto& bar : actual.bars()) {
    if (bar.close) closes[std::chrono::sys_days(bar.date)] = *bar.close;
  }
  const auto first = std::chrono::sys_days(forecast.dates.front());
  auto ref = closes.lower_bound(first);
  if (ref == closes.begin()) {
    throw Error(ErrorKind::alignment, "no actual close before " + format_date(forecast.dates.front()) +
                                          " to use as the reference");
  }
  --ref;
  std::vector<double> actual_closes{ref->second};
  std::vector<std::string> missing;
  for (const auto& date : forecast.dates) {
    auto it = closes.find(std::chrono::sys_days(date));
    if (it == closes.end()) {
      missing.push_back(format_date(date));
    } else {
      actual_closes.push_back(it->second);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorKind::alignment, "no actual close for " + list);
  }
  const auto predicted = forecast.closes();
  return backtest::run_backtest(forecast.dates, predicted, actual_closes, options);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void RunConfig::validate() const {
  if (window < 2) config_error("preprocess.window", "must be >= 2");
  std::size_t consumed = 0;
  try {
    consumed = recipe_rows_consumed(recipe);
  } catch (const Error& e) {
    config_error("preprocess.recipe", e.what());
  }
  if (window <= consumed) {
    config_error("preprocess.window", "must exceed the " + std::to_string(consumed) +
                                          " rows the recipe consumes");
  }
  if (horizon < 1) config_error("forecast.horizon", "must be >= 1");
  if (!(backtest.notional > 0.0)) config_error("backtest.notional", "must be positive");
  if (!(backtest.epsilon >= 0.0)) config_error("backtest.epsilon", "must be >= 0");
  if (!(backtest.fee >= 0.0)) config_error("backtest.fee", "must be >= 0");
  if (synthetic.bars < 2) config_error("synthetic.bars", "must be >= 2");
  if (const auto* s = std::get_if<forecasting::SampleMean>(&z_policy); s && s->samples == 0) {
    config_error("forecast.z_policy", "sample count must be >= 1");
  }
  try {
    train.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::config, std::string(e.what()).substr(std::string("config error: ").size()));
  }
  try {
    model_config(*this).validate();
  } catch (const Error& e) {
    config_error("model", e.what());
  }
}

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config(std::string_view json_text, const fs::path& base_dir) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("not valid JSON: ") + e.what());
  }
  RunConfig c = default_config();
  const Section root(j, "");
  root.only({"schema_version", "seed", "out", "strict", "data", "synthetic", "preprocess", "model",
             "train", "forecast", "backtest"});
  if (!root.has("schema_version")) config_error("schema_version", "missing");
  int version = 0;
  root.read("schema_version", version);
  if (version != kConfigSchemaVersion) {
    config_error("schema_version", "unsupported version " + std::to_string(version) + ", expected " +
                                       std::to_string(kConfigSchemaVersion));
  }
  root.read("seed", c.seed);
  std::string out = c.out.string();
  root.read("out", out);
  c.out = out;
  root.read("strict", c.strict);

  if (root.has("data")) {
    const auto d = root.child("data");
    d.only({"train", "condition", "forecast", "actual"});
    d.read_path("train", c.data, base_dir);
    d.read_path("condition", c.condition, base_dir);
    d.read_path("forecast", c.forecast_path, base_dir);
    if (d.has("actual")) {
      const auto& list = d.raw("actual");
      if (!list.is_array()) config_error(d.field("actual"), "expected a list of paths");
      c.actual.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (!list[i].is_string()) config_error(d.field("actual") + "[" + std::to_string(i) + "]", "expected a string");
        c.actual.push_back(Section::resolve(list[i].get<std::string>(), base_dir));
      }
    }
  }
  if (root.has("synthetic")) {
    const auto s = root.child("synthetic");
    s.only({"bars", "start_price", "drift", "volatility", "seasonal_amplitude", "seasonal_period",
            "base_volume", "volume_volatility", "start_date"});
    s.read("bars", c.synthetic.bars, true);
    s.read("start_price", c.synthetic.start_price);
    s.read("drift", c.synthetic.drift);
    s.read("volatility", c.synthetic.volatility);
    s.read("seasonal_amplitude", c.synthetic.seasonal_amplitude);
    s.read("seasonal_period", c.synthetic.seasonal_period);
    s.read("base_volume", c.synthetic.base_volume);
    s.read("volume_volatility", c.synthetic.volume_volatility);
    if (s.has("start_date")) {
      std::string text;
      s.read("start_date", text);
      const auto date = parse_date(text);
      if (!date) config_error(s.field("start_date"), "expected YYYY-MM-DD");
      c.synthetic.start_date = *date;
    }
  }
  if (root.has("preprocess")) {
    const auto p = root.child("preprocess");
    p.only({"recipe", "window"});
    p.read("recipe", c.recipe);
    p.read("window", c.window, true);
  }
  if (root.has("model")) {
    const auto m = root.child("model");
    m.only({"generator", "discriminator"});
    if (m.has("generator")) {
      const auto g = m.child("generator");
      g.only({"noise_dim", "lstm_hidden"});
      g.read("noise_dim", c.model.generator.noise_dim, true);
      g.read("lstm_hidden", c.model.generator.lstm_hidden, true);
    }
    if (m.has("discriminator")) {
      const auto d = m.child("discriminator");
      d.only({"conv_layers", "dropout_rate"});
      d.read("dropout_rate", c.model.discriminator.dropout_rate);
      if (d.has("conv_layers")) {
        const auto& list = d.raw("conv_layers");
        if (!list.is_array()) config_error(d.field("conv_layers"), "expected a list");
        c.model.discriminator.conv_layers.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
          const Section layer(list[i], d.field("conv_layers") + "[" + std::to_string(i) + "]");
          layer.only({"out_channels", "kernel", "stride", "padding"});
          gan::ConvLayerConfig lc;
          layer.read("out_channels", lc.out_channels, true);
          layer.read("kernel", lc.kernel, true);
          layer.read("stride", lc.stride, true);
          layer.read("padding", lc.padding, true);
          c.model.discriminator.conv_layers.push_back(lc);
        }
      }
    }
  }
  if (root.has("train")) {
    const auto t = root.child("train");
    t.only({"epochs", "batch_size", "lr", "beta1", "beta2", "epsilon", "d_steps_per_g_step",
            "generator_loss", "attenuation", "supervised_weight"});
    t.read("epochs", c.train.epochs);
    t.read("batch_size", c.train.batch_size);
    t.read("lr", c.train.lr);
    t.read("beta1", c.train.beta1);
    t.read("beta2", c.train.beta2);
    t.read("epsilon", c.train.epsilon);
    t.read("d_steps_per_g_step", c.train.d_steps_per_g_step);
    t.read("supervised_weight", c.train.supervised_weight);
    if (t.has("generator_loss")) {
      std::string mode;
      t.read("generator_loss", mode);
      if (mode == "saturating") {
        c.train.generator_loss_mode = gan::GeneratorLossMode::saturating;
      } else if (mode == "non-saturating") {
        c.train.generator_loss_mode = gan::GeneratorLossMode::non_saturating;
      } else {
        config_error(t.field("generator_loss"), "expected saturating or non-saturating");
      }
    }
    if (t.has("attenuation")) {
      std::string mode;
      t.read("attenuation", mode);
      if (mode == "beta1") {
        c.train.attenuation = training::Attenuation::beta1;
      } else if (mode == "lr-decay") {
        c.train.attenuation = training::Attenuation::lr_decay;
      } else {
        config_error(t.field("attenuation"), "expected beta1 or lr-decay");
      }
    }
  }
  if (root.has("forecast")) {
    const auto f = root.child("forecast");
    f.only({"horizon", "z_policy"});
    f.read("horizon", c.horizon, true);
    if (f.has("z_policy")) {
      std::string policy;
      f.read("z_policy", policy);
      c.z_policy = parse_policy(policy, f.field("z_policy"));
    }
  }
  if (root.has("backtest")) {
    const auto b = root.child("backtest");
    b.only({"notional", "epsilon", "fee"});
    b.read("notional", c.backtest.notional);
    b.read("epsilon", c.backtest.epsilon);
    b.read("fee", c.backtest.fee);
  }
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::dependency, "config file " + path.string() + " does not exist");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string config_to_json(const RunConfig& c) {
  Json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  j["strict"] = c.strict;
  Json actual = Json::array();
  for (const auto& p : c.actual) actual.push_back(p.string());
  j["data"] = {{"train", c.data.string()},
               {"condition", c.condition.string()},
               {"forecast", c.forecast_path.string()},
               {"actual", actual}};
  j["synthetic"] = {{"bars", c.synthetic.bars},
                    {"start_price", c.synthetic.start_price},
                    {"drift", c.synthetic.drift},
                    {"volatility", c.synthetic.volatility},
                    {"seasonal_amplitude", c.synthetic.seasonal_amplitude},
                    {"seasonal_period", c.synthetic.seasonal_period},
                    {"base_volume", c.synthetic.base_volume},
                    {"volume_volatility", c.synthetic.volume_volatility},
                    {"start_date", format_date(c.synthetic.start_date)}};
  j["preprocess"] = {{"recipe", c.recipe}, {"window", c.window}};
  Json layers = Json::array();
  for (const auto& l : c.model.discriminator.conv_layers) {
    layers.push_back({{"out_channels", l.out_channels},
                      {"kernel", l.kernel},
                      {"stride", l.stride},
                      {"padding", l.padding}});
  }
  j["model"] = {{"generator",
                 {{"noise_dim", c.model.generator.noise_dim},
                  {"lstm_hidden", c.model.generator.lstm_hidden}}},
                {"discriminator",
                 {{"conv_layers", layers}, {"dropout_rate", c.model.discriminator.dropout_rate}}}};
  j["train"] = {
      {"epochs", c.train.epochs},
      {"batch_size", c.train.batch_size},
      {"lr", c.train.lr},
      {"beta1", c.train.beta1},
      {"beta2", c.train.beta2},
      {"epsilon", c.train.epsilon},
      {"d_steps_per_g_step", c.train.d_steps_per_g_step},
      {"generator_loss", c.train.generator_loss_mode == gan::GeneratorLossMode::saturating
                             ? "saturating"
                             : "non-saturating"},
      {"attenuation", c.train.attenuation == training::Attenuation::beta1 ? "beta1" : "lr-decay"},
      {"supervised_weight", c.train.supervised_weight}};
  j["forecast"] = {{"horizon", c.horizon}, {"z_policy", forecasting::describe(c.z_policy)}};
  j["backtest"] = {
      {"notional", c.backtest.notional}, {"epsilon", c.backtest.epsilon}, {"fee", c.backtest.fee}};
  return j.dump(2) + "\n";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::dependency: return 3;
    case ErrorKind::io: return 4;
    case ErrorKind::parse:
    case ErrorKind::ordering:
    case ErrorKind::domain:
    case ErrorKind::insufficient_data:
    case ErrorKind::empty_window:
    case ErrorKind::empty_data:
    case ErrorKind::degenerate_scale:
    case ErrorKind::pairing:
    case ErrorKind::alignment: return 5;
    case ErrorKind::corrupt_checkpoint:
    case ErrorKind::incompatible_checkpoint: return 6;
    case ErrorKind::divergence: return 7;
    case ErrorKind::shape:
    case ErrorKind::rank:
    case ErrorKind::consumed_graph:
    case ErrorKind::unready_parameter: return 8;
  }
  return 1;
}

void record_run(const RunConfig& config, std::string_view subcommand) {
  ensure_out(config);
  open_out(artifact(config, files::config_echo)) << config_to_json(config);
  Json meta = {{"subcommand", subcommand}, {"started_utc", utc_now()}, {"seed", config.seed}};
  open_out(artifact(config, files::metadata)) << meta.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void run_ingest(const RunConfig& config, std::ostream& log) {
  ensure_out(config);
  const auto series = config.data.empty()
                          ? market::synthetic_series(config.synthetic, config.seed)
                          : load_input(config, config.data, "ingest");
  market::write_csv(series, artifact(config, files::ingested));
  log << "ingested " << series.size() << " bars";
  if (!series.empty()) {
    log << " (" << format_date(series.front().date) << " .. " << format_date(series.back().date) << ")";
  }
  log << " from " << (config.data.empty() ? "synthetic series, seed " + std::to_string(config.seed)
                                          : config.data.string())
      << "\n";
  for (const auto& w : series.warnings()) log << "warning: " << w << "\n";
}

void run_preprocess(const RunConfig& config, std::ostream& log) {
  ensure_out(config);
  const auto series = load_input(config, artifact(config, files::ingested), "preprocess");
  const auto raw = preprocess::frame_from_series(series);
  const auto pipeline = preprocess::FittedPipeline::fit(raw, preprocess::parse_recipe(config.recipe));
  pipeline.save(artifact(config, files::pipeline));

  const auto transformed = pipeline.transform(raw);
  auto out = open_out(artifact(config, files::transformed));
  out << "date";
  for (const auto& name : transformed.names) out << ',' << name;
  out << '\n';
  const std::size_t offset = pipeline.rows_consumed();
  for (std::size_t r = 0; r < transformed.rows(); ++r) {
    out << format_date(series[r + offset].date);
    for (const auto& column : transformed.columns) out << ',' << shortest(column[r]);
    out << '\n';
  }
  log << "fitted " << preprocess::format_recipe(pipeline.recipe()) << " on " << series.size()
      << " bars; " << transformed.rows() << " transformed rows\n";
}

void run_train(const RunConfig& config, std::ostream& log) {
  ensure_out(config);
  const auto series = load_input(config, artifact(config, files::ingested), "train");
  const auto pipeline = preprocess::FittedPipeline::load(require(artifact(config, files::pipeline), "train"));
  const auto set = training::make_training_set(series, pipeline, config.window);

  gan::GanModel model(model_config(config), config.seed);
  auto tc = config.train;
  tc.seed = config.seed;
  const auto records = training::train(model, set, tc, [&](const training::EpochRecord& r, const gan::GanModel&) {
    if (r.epoch == 1 || r.epoch % 10 == 0 || r.epoch == tc.epochs) {
      log << "epoch " << r.epoch << "  d_loss " << r.d_loss << "  g_loss " << r.g_loss << "  mse "
          << r.mse << "\n";
    }
    return true;
  });
  training::write_epoch_log(records, artifact(config, files::epochs));
  training::save_checkpoint(model, artifact(config, files::checkpoint));
  log << "trained " << records.size() << " epochs on " << set.size() << " windows; "
      << model.parameter_count() << " parameters\n";
}

void run_forecast(const RunConfig& config, std::ostream& log) {
  ensure_out(config);
  const auto pipeline = preprocess::FittedPipeline::load(require(artifact(config, files::pipeline), "forecast"));
  const auto model = training::load_checkpoint(require(artifact(config, files::checkpoint), "forecast"),
                                               model_config(config));
  const auto source = config.condition.empty()
                          ? load_input(config, artifact(config, files::ingested), "forecast")
                          : load_input(config, config.condition, "forecast");
  if (source.size() < config.window) {
    throw Error(ErrorKind::insufficient_data, "forecast needs " + std::to_string(config.window) +
                                                  " condition days, the source has " +
                                                  std::to_string(source.size()));
  }
  std::vector<market::OhlcvBar> tail(source.bars().end() - static_cast<std::ptrdiff_t>(config.window),
                                     source.bars().end());
  const market::OhlcvSeries condition(source.symbol(), std::move(tail));
  const auto result = forecasting::forecast(forecasting::GanForecaster(model), pipeline, condition,
                                            config.horizon, config.z_policy);
  forecasting::write_forecast_csv(result, artifact(config, files::forecast));
  log << "forecast " << result.size() << " days from " << format_date(condition.front().date) << " .. "
      << format_date(condition.back().date) << " (" << forecasting::describe(config.z_policy) << ")\n";
  forecasting::write_forecast_csv(result, log);
}

void run_evaluate(const RunConfig& config, std::ostream& log) {
  ensure_out(config);
  const auto forecast = load_forecast(config, "evaluate");
  const auto report = evaluation::accuracy_report(forecast, merged_actuals(config, "evaluate"));
  evaluation::write_report_csv(report, artifact(config, files::accuracy));
  log << evaluation::format_report(report);
}

void run_backtest(const RunConfig& config, std::ostream& log) {
  ensure_out(config);
  const auto forecast = load_forecast(config, "backtest");
  const auto ledger = ledger_for(forecast, merged_actuals(config, "backtest"), config.backtest);
  backtest::write_ledger_csv(ledger, artifact(config, files::ledger));
  log << backtest::roi_report(ledger);
}

void run_report(const RunConfig& config, std::ostream& log) {
  ensure_out(config);
  const auto forecast = load_forecast(config, "report");
  const auto actual = merged_actuals(config, "report");
  std::ostringstream text;
  text << "Prediction accuracy\n\n"
       << evaluation::format_report(evaluation::accuracy_report(forecast, actual))
       << "\nReturn on investment\n\n"
       << backtest::roi_report(ledger_for(forecast, actual, config.backtest));
  open_out(artifact(config, files::report)) << text.str();
  log << text.str();
}

bool run_gradcheck(const RunConfig& config, std::ostream& log) {
  bool ok = true;
  for (const auto& r : gradcheck_suite(config.seed)) {
    const bool pass = r.max_relative_error < kGradCheckTolerance;
    ok = ok && pass;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-28s %.3e  %s\n", r.name.c_str(), r.max_relative_error,
                  pass ? "ok" : "FAIL");
    log << buf;
  }
  log << (ok ? "all checks below " : "some checks at or above ") << kGradCheckTolerance << "\n";
  return ok;
}

}  // namespace fxcast::app
