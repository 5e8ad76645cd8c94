#include "fxcast/training.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fxcast/error.hpp"
#include "fxcast/optim.hpp"
#include "text_util.hpp"

namespace fxcast::training {

using ad::Tensor;
using Json = nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 0) throw Error(ErrorKind::config, "train.epochs must be >= 0");
  if (batch_size < 1) throw Error(ErrorKind::config, "train.batch_size must be >= 1");
  if (!(lr > 0.0)) throw Error(ErrorKind::config, "train.lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw Error(ErrorKind::config, "train.beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw Error(ErrorKind::config, "train.beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::config, "train.epsilon must be positive");
  if (d_steps_per_g_step < 1) throw Error(ErrorKind::config, "train.d_steps_per_g_step must be >= 1");
  if (!(supervised_weight >= 0.0)) throw Error(ErrorKind::config, "train.supervised_weight must be >= 0");
}

// ---------------------------------------------------------------------------
// Training set
// ---------------------------------------------------------------------------

TrainingSet make_training_set(const market::OhlcvSeries& series,
                              const preprocess::FittedPipeline& pipeline, std::size_t window) {
  const std::size_t consumed = pipeline.rows_consumed();
  if (window <= consumed) {
    throw Error(ErrorKind::config, "window of " + std::to_string(window) +
                                       " days leaves no rows after the pipeline consumes " +
                                       std::to_string(consumed));
  }
  if (series.size() <= window) {
    throw Error(ErrorKind::insufficient_data, "series of " + std::to_string(series.size()) +
                                                  " bars is too short for window " +
                                                  std::to_string(window));
  }
  if (pipeline.column_names().size() != gan::kFeatureCount) {
    throw Error(ErrorKind::config, "pipeline must cover the five OHLCV columns");
  }

  TrainingSet set;
  set.window_days = window;
  set.rows = window - consumed;
  set.pipeline = pipeline;
  const auto raw = preprocess::frame_from_series(series);
  set.raw.names = raw.names;
  for (const auto& column : raw.columns) set.raw.columns.push_back(preprocess::interpolate_missing(column));
  const auto transformed = pipeline.transform(set.raw);

  // Pipeline row r holds raw day r + consumed.
  for (std::size_t target = window; target < series.size(); ++target) {
    TrainingPair pair;
    pair.target_index = target;
    pair.condition.reserve(set.rows * set.features);
    for (std::size_t day = target - window + consumed; day < target; ++day) {
      for (std::size_t f = 0; f < set.features; ++f) {
        pair.condition.push_back(transformed.columns[f][day - consumed]);
      }
    }
    for (std::size_t k = 0; k < gan::kOutputDim; ++k) {
      pair.target[k] = transformed.columns[k + 1][target - consumed];
    }
    set.pairs.push_back(std::move(pair));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kCloseColumn = 4;

Tensor noise_batch(std::size_t batch, std::size_t dim, Rng& rng) {
  Tensor z = Tensor::zeros({batch, dim});
  for (double& v : z.mutable_values()) v = rng.normal();
  return z;
}

bool all_finite(const std::vector<Tensor>& params) {
  for (const auto& p : params) {
    for (double v : p.values()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace

double close_mse(const gan::GanModel& model, const TrainingSet& data) {
  if (data.pairs.empty()) throw Error(ErrorKind::empty_data, "training set is empty");
  const auto& closes = data.raw.columns[kCloseColumn];
  const std::vector<double> zero(model.config().generator.noise_dim, 0.0);
  double total = 0.0;
  for (const auto& pair : data.pairs) {
    const auto predicted = model.generate(pair.condition, zero);
    const std::span<const double> history(closes.data() + pair.target_index - data.window_days,
                                          data.window_days);
    const double price = data.pipeline.invert_next(kCloseColumn, history, predicted[3]);
    const double diff = price - closes[pair.target_index];
    total += diff * diff;
  }
  return total / static_cast<double>(data.pairs.size());
}

std::vector<EpochRecord> train(gan::GanModel& model, const TrainingSet& data,
                               const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (data.pairs.empty()) throw Error(ErrorKind::empty_data, "training set is empty");
  const auto& gcfg = model.config().generator;
  if (data.rows != gcfg.condition_window || data.features != gcfg.feature_count) {
    throw Error(ErrorKind::config, "training windows have " + std::to_string(data.rows) +
                                       " rows but the generator expects " +
                                       std::to_string(gcfg.condition_window));
  }

  ad::AdamConfig adam{config.lr, config.beta1, config.beta2, config.epsilon};
  if (config.attenuation == Attenuation::lr_decay) adam.beta1 = 0.9;
  ad::AdamState state_d(adam), state_g(adam);
  auto& theta_d = model.discriminator_parameters();
  auto& theta_g = model.generator_parameters();

  Rng rng(config.seed);
  std::vector<std::size_t> order(data.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  const std::size_t row_width = data.rows * data.features;

  std::vector<EpochRecord> records;
  for (int e = 0; e < config.epochs; ++e) {
    const auto epoch = static_cast<int>(model.epoch()) + 1;
    rng.shuffle(std::span<std::size_t>(order));
    double d_total = 0.0, g_total = 0.0;
    std::size_t batches = 0;

    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t b = std::min(batch_size, order.size() - start);
      std::vector<double> cond_values, real_values;
      cond_values.reserve(b * row_width);
      real_values.reserve(b * gan::kOutputDim);
      for (std::size_t k = 0; k < b; ++k) {
        const auto& pair = data.pairs[order[start + k]];
        cond_values.insert(cond_values.end(), pair.condition.begin(), pair.condition.end());
        real_values.insert(real_values.end(), pair.target.begin(), pair.target.end());
      }
      const Tensor condition = Tensor::from({b, data.rows, data.features}, std::move(cond_values));
      const Tensor real = Tensor::from({b, gan::kOutputDim}, std::move(real_values));

      double d_loss_value = 0.0;
      for (int s = 0; s < config.d_steps_per_g_step; ++s) {
        Tensor fake;
        {
          ad::NoGradScope no_grad;
          fake = model.generate(condition, noise_batch(b, gcfg.noise_dim, rng));
        }
        ad::Graph graph;
        Tensor d_real = model.discriminate(condition, real, true, rng);
        Tensor d_fake = model.discriminate(condition, fake, true, rng);
        Tensor loss = gan::discriminator_loss(d_real, d_fake);
        d_loss_value = loss.item();
        graph.backward(loss);
        ad::adam_step(theta_d, state_d);
      }

      double g_loss_value = 0.0;
      {
        ad::Graph graph;
        Tensor fake = model.generate(condition, noise_batch(b, gcfg.noise_dim, rng));
        Tensor d_fake = model.discriminate(condition, fake, true, rng);
        Tensor loss = gan::generator_loss(d_fake, config.generator_loss_mode);
        g_loss_value = loss.item();
        if (config.supervised_weight > 0.0) {
          Tensor point = model.generate(condition, Tensor::zeros({b, gcfg.noise_dim}));
          Tensor err = ad::sub(point, real);
          loss = ad::add(loss, ad::mul_scalar(ad::mean(ad::mul(err, err)), config.supervised_weight));
        }
        graph.backward(loss);
        ad::adam_step(theta_g, state_g);
        ad::clear_grads(theta_d);
      }

      if (!std::isfinite(d_loss_value) || !std::isfinite(g_loss_value)) {
        throw Error(ErrorKind::divergence, "non-finite loss at epoch " + std::to_string(epoch) +
                                               ", batch " + std::to_string(batches + 1));
      }
      d_total += d_loss_value;
      g_total += g_loss_value;
      ++batches;
    }

    if (!all_finite(theta_g) || !all_finite(theta_d)) {
      throw Error(ErrorKind::divergence,
                  "non-finite parameter after epoch " + std::to_string(epoch));
    }
    EpochRecord record;
    record.epoch = epoch;
    record.d_loss = d_total / static_cast<double>(batches);
    record.g_loss = g_total / static_cast<double>(batches);
    record.mse = close_mse(model, data);
    if (!std::isfinite(record.mse)) {
      throw Error(ErrorKind::divergence, "non-finite MSE at epoch " + std::to_string(epoch));
    }
    model.set_epoch(static_cast<std::uint64_t>(epoch));
    records.push_back(record);

    if (config.attenuation == Attenuation::lr_decay) {
      state_d.config.lr *= config.beta1;
      state_g.config.lr *= config.beta1;
    }
    if (on_epoch && !on_epoch(record, model)) break;
  }
  return records;
}

void write_epoch_log(std::span<const EpochRecord> records, std::ostream& out) {
  out << "epoch,d_loss,g_loss,mse\n";
  for (const auto& r : records) {
    out << r.epoch << ',' << text::shortest(r.d_loss) << ',' << text::shortest(r.g_loss) << ','
        << text::shortest(r.mse) << '\n';
  }
}

void write_epoch_log(std::span<const EpochRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write_epoch_log(records, out);
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'F', 'X', 'C', 'G', 'A', 'N', 'C', 'K'};

Json config_to_json(const gan::GanConfig& config) {
  const auto& g = config.generator;
  Json layers = Json::array();
  for (const auto& l : config.discriminator.conv_layers) {
    layers.push_back({{"out_channels", l.out_channels},
                      {"kernel", l.kernel},
                      {"stride", l.stride},
                      {"padding", l.padding}});
  }
  return {{"generator",
           {{"condition_window", g.condition_window},
            {"feature_count", g.feature_count},
            {"noise_dim", g.noise_dim},
            {"lstm_hidden", g.lstm_hidden},
            {"output_dim", g.output_dim}}},
          {"discriminator",
           {{"conv_layers", layers}, {"dropout_rate", config.discriminator.dropout_rate}}}};
}

gan::GanConfig config_from_json(const Json& j) {
  gan::GanConfig config;
  const auto& g = j.at("generator");
  config.generator.condition_window = g.at("condition_window").get<std::size_t>();
  config.generator.feature_count = g.at("feature_count").get<std::size_t>();
  config.generator.noise_dim = g.at("noise_dim").get<std::size_t>();
  config.generator.lstm_hidden = g.at("lstm_hidden").get<std::size_t>();
  config.generator.output_dim = g.at("output_dim").get<std::size_t>();
  const auto& d = j.at("discriminator");
  config.discriminator.conv_layers.clear();
  for (const auto& l : d.at("conv_layers")) {
    config.discriminator.conv_layers.push_back(
        {l.at("out_channels").get<std::size_t>(), l.at("kernel").get<std::size_t>(),
         l.at("stride").get<std::size_t>(), l.at("padding").get<std::size_t>()});
  }
  config.discriminator.dropout_rate = d.at("dropout_rate").get<double>();
  return config;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), n); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error(ErrorKind::corrupt_checkpoint, source_ + ": truncated");
    }
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t limit) {
    const auto n = u64();
    if (n > limit) throw Error(ErrorKind::corrupt_checkpoint, source_ + ": implausible length");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  const std::string& source() const { return source_; }

 private:
  std::uint64_t le(int n) {
    unsigned char buf[8];
    bytes(buf, static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = n - 1; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
  }
  std::istream& in_;
  std::string source_;
};

gan::GanModel read_checkpoint(const std::filesystem::path& path,
                              const gan::GanConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  Reader r(in, path.string());

  char magic[8];
  r.bytes(magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw Error(ErrorKind::corrupt_checkpoint, path.string() + ": not a checkpoint (bad magic)");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::incompatible_checkpoint,
                path.string() + ": format version " + std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));
  }
  const auto seed = r.u64();
  const auto epoch = r.u64();
  gan::GanConfig config;
  try {
    config = config_from_json(Json::parse(r.str(1 << 20)));
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::corrupt_checkpoint, path.string() + ": bad config block: " + e.what());
  }
  if (expected && !(config == *expected)) {
    throw Error(ErrorKind::incompatible_checkpoint,
                path.string() + ": stored model config differs from the requested one");
  }

  gan::GanModel model(config, seed);
  model.set_epoch(epoch);
  auto params = model.named_parameters();
  const auto count = r.u64();
  if (count != params.size()) {
    throw Error(ErrorKind::corrupt_checkpoint, path.string() + ": holds " +
                                                   std::to_string(count) + " tensors, config needs " +
                                                   std::to_string(params.size()));
  }
  for (auto& param : params) {
    const auto name = r.str(4096);
    if (name != param.name) {
      throw Error(ErrorKind::corrupt_checkpoint,
                  path.string() + ": expected tensor '" + param.name + "', found '" + name + "'");
    }
    const auto rank = r.u32();
    ad::Shape shape(rank);
    for (auto& d : shape) d = r.u64();
    if (shape != param.tensor.shape()) {
      throw Error(ErrorKind::corrupt_checkpoint,
                  path.string() + ": tensor '" + name + "' has shape " + ad::shape_string(shape));
    }
    for (double& v : param.tensor.mutable_values()) v = r.f64();
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::corrupt_checkpoint, path.string() + ": trailing bytes");
  }
  return model;
}

}  // namespace

void save_checkpoint(const gan::GanModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  Writer w(out);
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u64(model.seed());
  w.u64(model.epoch());
  w.str(config_to_json(model.config()).dump());
  const auto params = model.named_parameters();
  w.u64(params.size());
  for (const auto& param : params) {
    w.str(param.name);
    w.u32(static_cast<std::uint32_t>(param.tensor.rank()));
    for (auto d : param.tensor.shape()) w.u64(d);
    for (double v : param.tensor.values()) w.f64(v);
  }
  if (!out) throw Error(ErrorKind::io, "failed writing " + path.string());
}

gan::GanModel load_checkpoint(const std::filesystem::path& path) {
  return read_checkpoint(path, nullptr);
}

gan::GanModel load_checkpoint(const std::filesystem::path& path, const gan::GanConfig& expected) {
  return read_checkpoint(path, &expected);
}

// ---------------------------------------------------------------------------
// Toy task
// ---------------------------------------------------------------------------

ToyResult train_toy_gaussian(std::uint64_t seed, const ToyConfig& config) {
  gan::GanConfig gan_config;
  gan_config.generator.condition_window = config.condition_window;
  gan_config.generator.noise_dim = config.noise_dim;
  gan_config.generator.lstm_hidden = config.lstm_hidden;
  gan_config.discriminator.conv_layers = {{8, 2, 1, 0}};
  gan::GanModel model(gan_config, seed);

  const std::size_t b = static_cast<std::size_t>(config.batch_size);
  const std::size_t rows = config.condition_window;
  const Tensor condition = Tensor::zeros({b, rows, gan::kFeatureCount});
  ad::AdamConfig adam{config.lr, config.beta1, 0.999, 1e-8};
  ad::AdamState state_d(adam), state_g(adam);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);

  for (int step = 0; step < config.steps; ++step) {
    const Tensor real = noise_batch(b, gan::kOutputDim, rng);
    Tensor fake;
    {
      ad::NoGradScope no_grad;
      fake = model.generate(condition, noise_batch(b, config.noise_dim, rng));
    }
    {
      ad::Graph graph;
      Tensor loss = gan::discriminator_loss(model.discriminate(condition, real, true, rng),
                                            model.discriminate(condition, fake, true, rng));
      graph.backward(loss);
      ad::adam_step(model.discriminator_parameters(), state_d);
    }
    {
      ad::Graph graph;
      Tensor generated = model.generate(condition, noise_batch(b, config.noise_dim, rng));
      Tensor loss = gan::generator_loss(model.discriminate(condition, generated, true, rng),
                                        config.generator_loss_mode);
      graph.backward(loss);
      ad::adam_step(model.generator_parameters(), state_g);
      ad::clear_grads(model.discriminator_parameters());
    }
  }

  ad::NoGradScope no_grad;
  const std::size_t n = config.eval_samples;
  const Tensor eval_condition = Tensor::zeros({n, rows, gan::kFeatureCount});
  const Tensor samples = model.generate(eval_condition, noise_batch(n, config.noise_dim, rng));
  double sum = 0.0;
  for (double v : samples.values()) sum += v;
  const double mean = sum / static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples.values()) ss += (v - mean) * (v - mean);

  const Tensor d_real =
      model.discriminate(eval_condition, noise_batch(n, gan::kOutputDim, rng), false, rng);
  double d_sum = 0.0;
  for (double v : d_real.values()) d_sum += v;

  ToyResult result;
  result.generated_mean = mean;
  result.generated_std = std::sqrt(ss / static_cast<double>(samples.size()));
  result.mean_d_real = d_sum / static_cast<double>(n);
  return result;
}

}  // namespace fxcast::training
