#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fxcast/gan_model.hpp"
#include "fxcast/market_data.hpp"
#include "fxcast/preprocess.hpp"

namespace fxcast::training {

/// How the published "attenuation factor" is applied to Adam.
enum class Attenuation {
  /// As Adam's first-moment decay beta1.
  beta1,
  /// As a per-epoch learning-rate decay multiplier (beta1 then stays 0.9).
  lr_decay,
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double lr = 0.0002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int d_steps_per_g_step = 1;
  std::uint64_t seed = 0;
  gan::GeneratorLossMode generator_loss_mode = gan::GeneratorLossMode::saturating;
  Attenuation attenuation = Attenuation::beta1;
  /// Weight of the supervised term mean((G(c, 0) - target)^2) added to the
  /// generator objective; 0 trains on the adversarial loss alone.
  double supervised_weight = 1.0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double d_loss = 0.0;
  /// Adversarial part only.
  double g_loss = 0.0;
  /// Zero-noise next-day close vs actual close, in price units.
  double mse = 0.0;
};

struct TrainingPair {
  /// window rows x features, row-major, pipeline space.
  std::vector<double> condition;
  std::array<double, gan::kOutputDim> target{};
  /// Index of the target day in the source series.
  std::size_t target_index = 0;
};

struct TrainingSet {
  std::size_t window_days = 0;  // raw days per condition
  std::size_t rows = 0;         // pipeline-space rows per condition
  std::size_t features = gan::kFeatureCount;
  std::vector<TrainingPair> pairs;
  preprocess::FittedPipeline pipeline;
  /// Interpolated raw columns of the source series (volume, O, H, L, C).
  preprocess::Frame raw;

  std::size_t size() const { return pairs.size(); }
};

/// Sliding windows of `window` raw days, each paired with the following
/// day's O/H/L/C in pipeline space. Pair count = length - window.
TrainingSet make_training_set(const market::OhlcvSeries& series,
                              const preprocess::FittedPipeline& pipeline, std::size_t window);

/// Called after each epoch; returning false stops early.
using EpochCallback = std::function<bool(const EpochRecord&, const gan::GanModel&)>;

std::vector<EpochRecord> train(gan::GanModel& model, const TrainingSet& data,
                               const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Zero-noise price-space MSE of the predicted close over every pair.
double close_mse(const gan::GanModel& model, const TrainingSet& data);

void write_epoch_log(std::span<const EpochRecord> records, std::ostream& out);
void write_epoch_log(std::span<const EpochRecord> records, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const gan::GanModel& model, const std::filesystem::path& path);
gan::GanModel load_checkpoint(const std::filesystem::path& path);
/// Throws incompatible_checkpoint unless the stored configs equal `expected`.
gan::GanModel load_checkpoint(const std::filesystem::path& path, const gan::GanConfig& expected);

// ---------------------------------------------------------------------------
// Toy sanity task
// ---------------------------------------------------------------------------

struct ToyConfig {
  int steps = 2000;
  int batch_size = 64;
  double lr = 0.001;
  double beta1 = 0.5;
  std::size_t condition_window = 2;
  std::size_t noise_dim = 4;
  std::size_t lstm_hidden = 8;
  std::size_t eval_samples = 4000;
  gan::GeneratorLossMode generator_loss_mode = gan::GeneratorLossMode::non_saturating;
};

struct ToyResult {
  double generated_mean = 0.0;
  double generated_std = 0.0;
  double mean_d_real = 0.0;
};

/// Trains the conditional GAN on candidates whose four values are i.i.d.
/// N(0, 1) with an all-zero condition, then reports moments of the pooled
/// generated values and the discriminator's mean output on fresh real data.
ToyResult train_toy_gaussian(std::uint64_t seed, const ToyConfig& config = {});

}  // namespace fxcast::training
