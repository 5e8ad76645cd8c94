#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fxcast/error.hpp"
#include "fxcast/training.hpp"

using namespace fxcast;
using namespace fxcast::training;

namespace {

market::OhlcvSeries series_of(std::size_t bars, std::uint64_t seed = 3) {
  market::SyntheticConfig c;
  c.bars = bars;
  return market::synthetic_series(c, seed);
}

preprocess::FittedPipeline fitted(const market::OhlcvSeries& s) {
  return preprocess::FittedPipeline::fit(preprocess::frame_from_series(s),
                                         preprocess::default_recipe());
}

gan::GanConfig small_gan(std::size_t rows) {
  gan::GanConfig c;
  c.generator.condition_window = rows;
  c.generator.lstm_hidden = 6;
  c.generator.noise_dim = 3;
  c.discriminator.conv_layers = {{4, 2, 1, 0}};
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("fxcast_test_" + name);
}

std::vector<double> flat(const gan::GanModel& m) {
  std::vector<double> out;
  for (const auto& p : m.named_parameters()) out.insert(out.end(), p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

}  // namespace

TEST(TrainingSet, PairCounts) {
  auto five = series_of(5);
  EXPECT_EQ(make_training_set(five, fitted(five), 4).size(), 1u);
  auto ten = series_of(10);
  auto set = make_training_set(ten, fitted(ten), 5);
  EXPECT_EQ(set.size(), 5u);
  EXPECT_EQ(set.rows, 4u);
  EXPECT_EQ(set.pairs.front().condition.size(), 4u * 5u);
}

TEST(TrainingSet, TooShortOrWindowTooSmall) {
  auto five = series_of(5);
  try {
    make_training_set(five, fitted(five), 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_data);
  }
  EXPECT_THROW(make_training_set(five, fitted(five), 1), Error);
}

TEST(TrainingSet, AlignmentMatchesFullTransform) {
  auto s = series_of(30);
  auto pipe = fitted(s);
  auto set = make_training_set(s, pipe, 6);
  auto full = pipe.transform(preprocess::frame_from_series(s));
  for (const auto& pair : set.pairs) {
    // Transformed row r describes raw day r + 1; the last condition row is
    // the day before the target.
    const std::size_t last_row = pair.target_index - 1 - 1;
    for (std::size_t f = 0; f < 5; ++f) {
      EXPECT_EQ(pair.condition[(set.rows - 1) * 5 + f], full.columns[f][last_row]);
    }
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_EQ(pair.target[k], full.columns[k + 1][pair.target_index - 1]);
    }
  }
  EXPECT_EQ(set.pairs.front().target_index, 6u);
  EXPECT_EQ(set.pairs.back().target_index, 29u);
}

TEST(Train, ZeroEpochsLeavesModelUntouched) {
  auto s = series_of(20);
  auto set = make_training_set(s, fitted(s), 6);
  gan::GanModel m(small_gan(5), 1);
  const auto before = flat(m);
  TrainConfig c;
  c.epochs = 0;
  EXPECT_TRUE(train(m, set, c).empty());
  EXPECT_EQ(flat(m), before);
}

TEST(Train, RejectsBadConfigAndMismatchedWindow) {
  auto s = series_of(20);
  auto set = make_training_set(s, fitted(s), 6);
  gan::GanModel m(small_gan(5), 1);
  TrainConfig c;
  c.batch_size = 0;
  EXPECT_THROW(train(m, set, c), Error);
  gan::GanModel wrong(small_gan(4), 1);
  try {
    train(wrong, set, TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

TEST(Train, DeterministicForSeed) {
  auto s = series_of(40);
  auto set = make_training_set(s, fitted(s), 6);
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 8;
  c.lr = 0.001;
  c.seed = 5;
  gan::GanModel a(small_gan(5), 2), b(small_gan(5), 2);
  auto ra = train(a, set, c);
  auto rb = train(b, set, c);
  ASSERT_EQ(ra.size(), 3u);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(ra[i].epoch, static_cast<int>(i) + 1);
    EXPECT_EQ(ra[i].d_loss, rb[i].d_loss);
    EXPECT_EQ(ra[i].g_loss, rb[i].g_loss);
    EXPECT_EQ(ra[i].mse, rb[i].mse);
  }
  EXPECT_EQ(flat(a), flat(b));
  EXPECT_EQ(a.epoch(), 3u);
}

TEST(Train, CallbackCanStopEarly) {
  auto s = series_of(30);
  auto set = make_training_set(s, fitted(s), 6);
  gan::GanModel m(small_gan(5), 2);
  TrainConfig c;
  c.epochs = 10;
  auto records = train(m, set, c, [](const EpochRecord& r, const gan::GanModel&) { return r.epoch < 2; });
  EXPECT_EQ(records.size(), 2u);
}

TEST(Train, EpochLogFormat) {
  std::vector<EpochRecord> records{{1, 1.5, -0.5, 0.25}};
  std::ostringstream out;
  write_epoch_log(records, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "epoch,d_loss,g_loss,mse");
  EXPECT_NE(out.str().find("1,1.5,-0.5,0.25"), std::string::npos);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto s = series_of(30);
  auto set = make_training_set(s, fitted(s), 6);
  gan::GanModel m(small_gan(5), 4);
  TrainConfig c;
  c.epochs = 2;
  train(m, set, c);
  const auto path = temp_path("roundtrip.ckpt");
  save_checkpoint(m, path);
  auto loaded = load_checkpoint(path);
  EXPECT_EQ(loaded.config(), m.config());
  EXPECT_EQ(loaded.epoch(), 2u);
  EXPECT_EQ(loaded.seed(), 4u);
  EXPECT_EQ(flat(loaded), flat(m));
  const std::vector<double> z(3, 0.1);
  EXPECT_EQ(loaded.generate(set.pairs[0].condition, z), m.generate(set.pairs[0].condition, z));
  EXPECT_NO_THROW(load_checkpoint(path, small_gan(5)));
  std::filesystem::remove(path);
}

TEST(Checkpoint, DifferentConfigIsIncompatible) {
  gan::GanModel m(small_gan(5), 4);
  const auto path = temp_path("config.ckpt");
  save_checkpoint(m, path);
  try {
    load_checkpoint(path, small_gan(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::incompatible_checkpoint);
  }
  std::filesystem::remove(path);
}

TEST(Checkpoint, BadMagicAndTruncationAreCorrupt) {
  gan::GanModel m(small_gan(5), 4);
  const auto path = temp_path("corrupt.ckpt");
  save_checkpoint(m, path);
  const auto size = std::filesystem::file_size(path);

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto expect_corrupt = [&](const std::string& content) {
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << content;
    }
    try {
      load_checkpoint(path);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::corrupt_checkpoint) << e.what();
    }
  };
  std::string bad = bytes;
  bad[0] = 'X';
  expect_corrupt(bad);
  expect_corrupt(bytes.substr(0, size / 2));
  expect_corrupt(bytes.substr(0, size - 1));
  expect_corrupt(bytes + "extra");
  std::filesystem::remove(path);

  try {
    load_checkpoint(temp_path("does_not_exist.ckpt"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(Toy, RecoversStandardNormalOnOneSeed) {
  const auto r = train_toy_gaussian(0);
  EXPECT_LT(std::abs(r.generated_mean), 0.2);
  EXPECT_LT(std::abs(r.generated_std - 1.0), 0.3);
  EXPECT_GT(r.mean_d_real, 0.35);
  EXPECT_LT(r.mean_d_real, 0.65);
}
