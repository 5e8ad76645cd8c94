#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fxcast/market_data.hpp"

namespace fxcast::preprocess {

// ---------------------------------------------------------------------------
// Single-column transforms
// ---------------------------------------------------------------------------

/// Linear interpolation between the nearest present neighbours; leading and
/// trailing gaps take the nearest present value.
std::vector<double> interpolate_missing(std::span<const std::optional<double>> series);

struct ZScore {
  double mean = 0.0;
  double std = 1.0;  // population standard deviation
};

ZScore fit_zscore(std::span<const double> series);
std::vector<double> apply_zscore(const ZScore& scale, std::span<const double> series);
std::vector<double> invert_zscore(const ZScore& scale, std::span<const double> series);

std::vector<double> log_transform(std::span<const double> series);
std::vector<double> exp_transform(std::span<const double> series);

struct Differenced {
  std::vector<double> values;
  /// The first `order` values of the input; enough to rebuild it.
  std::vector<double> seeds;
};

Differenced difference(std::span<const double> series, int order);
std::vector<double> undifference(std::span<const double> seeds, std::span<const double> diffed);

struct Deseasonalized {
  std::vector<double> adjusted;
  std::vector<double> indices;  // one per phase, summing to zero
};

/// Classical additive decomposition with a centred moving-average trend.
Deseasonalized deseasonalize(std::span<const double> series, int period);

/// Subtracts (sign = -1) or adds back (sign = +1) the seasonal index of each
/// element's phase, phase of element i being (phase_origin + i) mod period.
std::vector<double> apply_seasonal(std::span<const double> indices,
                                   std::span<const double> series, std::size_t phase_origin,
                                   double sign);

// ---------------------------------------------------------------------------
// Fitted multi-column chain
// ---------------------------------------------------------------------------

enum class StepKind { interpolate, zscore, log, difference, deseasonalize };

std::string_view to_string(StepKind kind);
StepKind step_kind_from_string(std::string_view name);

struct StepSpec {
  StepKind kind = StepKind::zscore;
  /// Differencing order or seasonal period; unused otherwise.
  int parameter = 0;

  bool operator==(const StepSpec&) const = default;
};

using Recipe = std::vector<StepSpec>;

/// interpolate -> log -> difference(1) -> zscore.
Recipe default_recipe();

/// Comma separated, e.g. "interpolate,log,difference:1,zscore".
Recipe parse_recipe(std::string_view text);
std::string format_recipe(const Recipe& recipe);

struct TransformStep {
  StepKind kind = StepKind::zscore;
  int parameter = 0;
  // Per-column fitted state; only the vector matching `kind` is populated.
  std::vector<ZScore> scales;
  std::vector<std::vector<double>> seeds;
  std::vector<std::vector<double>> seasonal_indices;
};

struct Frame {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

struct RawFrame {
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> columns;
};

/// Columns volume, open, high, low, close in that order.
RawFrame frame_from_series(const market::OhlcvSeries& series);

/// Differencing seeds per step and column, taken from the data a transform
/// was applied to. Empty entries for steps that need none.
struct Anchors {
  std::vector<std::vector<std::vector<double>>> seeds;
};

class FittedPipeline {
 public:
  FittedPipeline() = default;

  /// Fits each step in order on the output of the previous one.
  static FittedPipeline fit(const RawFrame& frame, const Recipe& recipe);
  static FittedPipeline fit(const Frame& frame, const Recipe& recipe);

  const std::vector<TransformStep>& steps() const noexcept { return steps_; }
  const std::vector<std::string>& column_names() const noexcept { return column_names_; }
  Recipe recipe() const;

  /// Leading rows lost to differencing.
  std::size_t rows_consumed() const;

  /// Applies the fitted chain. Differencing uses the input's own leading
  /// values, so the result depends only on the given data and fitted
  /// statistics.
  Frame transform(const Frame& frame, std::size_t phase_origin = 0) const;
  Frame transform(const RawFrame& frame, std::size_t phase_origin = 0) const;

  std::vector<double> transform_column(std::size_t column, std::span<const double> values,
                                       std::size_t phase_origin = 0) const;

  Anchors anchors(const Frame& original, std::size_t phase_origin = 0) const;

  /// Inverse using the seeds stored at fit time.
  Frame inverse(const Frame& transformed) const;
  Frame inverse(const Frame& transformed, const Anchors& anchors,
                std::size_t phase_origin = 0) const;

  std::vector<double> inverse_column(std::size_t column, std::span<const double> transformed,
                                     const Anchors& anchors, std::size_t phase_origin = 0) const;

  /// Maps one transformed value following `history` back to the raw scale.
  double invert_next(std::size_t column, std::span<const double> history,
                     double next_transformed) const;

  std::string to_json() const;
  static FittedPipeline from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static FittedPipeline load(const std::filesystem::path& path);

 private:
  Anchors fitted_anchors() const;

  std::vector<TransformStep> steps_;
  std::vector<std::string> column_names_;
};

inline constexpr int kPipelineFormatVersion = 1;

}  // namespace fxcast::preprocess
