#include "fxcast/preprocess.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fxcast/error.hpp"
#include "text_util.hpp"

namespace fxcast::preprocess {

using Json = nlohmann::json;

std::vector<double> interpolate_missing(std::span<const std::optional<double>> series) {
  std::vector<std::size_t> present;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i]) present.push_back(i);
  }
  if (present.empty()) throw Error(ErrorKind::empty_data, "every value is missing");

  std::vector<double> out(series.size());
  std::size_t next = 0;  // index into `present` of the first present index >= i
  for (std::size_t i = 0; i < series.size(); ++i) {
    while (next < present.size() && present[next] < i) ++next;
    if (series[i]) {
      out[i] = *series[i];
    } else if (next == 0) {
      out[i] = *series[present.front()];
    } else if (next == present.size()) {
      out[i] = *series[present.back()];
    } else {
      const std::size_t lo = present[next - 1];
      const std::size_t hi = present[next];
      const double frac = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
      out[i] = *series[lo] + (*series[hi] - *series[lo]) * frac;
    }
  }
  return out;
}

ZScore fit_zscore(std::span<const double> series) {
  if (series.size() < 2) {
    throw Error(ErrorKind::insufficient_data,
                "z-score needs at least 2 values, got " + std::to_string(series.size()));
  }
  const double n = static_cast<double>(series.size());
  double total = 0.0;
  double largest = 0.0;
  for (double x : series) {
    total += x;
    largest = std::max(largest, std::abs(x));
  }
  const double mean = total / n;
  double squares = 0.0;
  for (double x : series) squares += (x - mean) * (x - mean);
  const double std = std::sqrt(squares / n);
  if (!(std > 64.0 * std::numeric_limits<double>::epsilon() * largest)) {
    throw Error(ErrorKind::degenerate_scale, "series is constant (population std " +
                                                 text::shortest(std) + ")");
  }
  return {mean, std};
}

std::vector<double> apply_zscore(const ZScore& scale, std::span<const double> series) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - scale.mean) / scale.std;
  return out;
}

std::vector<double> invert_zscore(const ZScore& scale, std::span<const double> series) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i] * scale.std + scale.mean;
  return out;
}

std::vector<double> log_transform(std::span<const double> series) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!(series[i] > 0.0)) {
      throw Error(ErrorKind::domain, "log of non-positive value " + text::shortest(series[i]) +
                                         " at index " + std::to_string(i));
    }
    out[i] = std::log(series[i]);
  }
  return out;
}

std::vector<double> exp_transform(std::span<const double> series) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = std::exp(series[i]);
  return out;
}

Differenced difference(std::span<const double> series, int order) {
  if (order < 1) throw Error(ErrorKind::config, "differencing order must be >= 1");
  const auto d = static_cast<std::size_t>(order);
  if (series.size() <= d) {
    throw Error(ErrorKind::insufficient_data, "differencing order " + std::to_string(order) +
                                                  " needs more than " + std::to_string(order) +
                                                  " values, got " +
                                                  std::to_string(series.size()));
  }
  Differenced out;
  out.seeds.assign(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(d));
  out.values.assign(series.begin(), series.end());
  for (std::size_t level = 0; level < d; ++level) {
    for (std::size_t i = 0; i + 1 < out.values.size(); ++i) {
      out.values[i] = out.values[i + 1] - out.values[i];
    }
    out.values.pop_back();
  }
  return out;
}

std::vector<double> undifference(std::span<const double> seeds, std::span<const double> diffed) {
  const std::size_t d = seeds.size();
  // heads[k] = first element of the k-th difference, derived from the seeds.
  std::vector<double> heads(d);
  std::vector<double> level(seeds.begin(), seeds.end());
  for (std::size_t k = 0; k < d; ++k) {
    heads[k] = level.front();
    for (std::size_t i = 0; i + 1 < level.size(); ++i) level[i] = level[i + 1] - level[i];
    level.pop_back();
  }
  std::vector<double> current(diffed.begin(), diffed.end());
  for (std::size_t k = d; k-- > 0;) {
    std::vector<double> up(current.size() + 1);
    up[0] = heads[k];
    for (std::size_t i = 0; i < current.size(); ++i) up[i + 1] = up[i] + current[i];
    current = std::move(up);
  }
  return current;
}

Deseasonalized deseasonalize(std::span<const double> series, int period) {
  if (period < 2) throw Error(ErrorKind::config, "seasonal period must be >= 2");
  const auto m = static_cast<std::size_t>(period);
  const std::size_t n = series.size();
  if (n < 2 * m) {
    throw Error(ErrorKind::insufficient_data, "deseasonalize with period " +
                                                  std::to_string(period) + " needs " +
                                                  std::to_string(2 * m) + " values, got " +
                                                  std::to_string(n));
  }

  std::vector<double> phase_sum(m, 0.0);
  std::vector<std::size_t> phase_count(m, 0);
  const std::size_t half = m / 2;
  for (std::size_t t = half; t + half < n; ++t) {
    double trend = 0.0;
    if (m % 2 == 1) {
      for (std::size_t j = t - half; j <= t + half; ++j) trend += series[j];
    } else {
      trend = 0.5 * series[t - half] + 0.5 * series[t + half];
      for (std::size_t j = t - half + 1; j < t + half; ++j) trend += series[j];
    }
    trend /= static_cast<double>(m);
    phase_sum[t % m] += series[t] - trend;
    ++phase_count[t % m];
  }

  Deseasonalized out;
  out.indices.resize(m);
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    out.indices[j] = phase_sum[j] / static_cast<double>(phase_count[j]);
    total += out.indices[j];
  }
  const double centre = total / static_cast<double>(m);
  for (double& idx : out.indices) idx -= centre;
  out.adjusted = apply_seasonal(out.indices, series, 0, -1.0);
  return out;
}

std::vector<double> apply_seasonal(std::span<const double> indices,
                                   std::span<const double> series, std::size_t phase_origin,
                                   double sign) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    out[i] = series[i] + sign * indices[(phase_origin + i) % indices.size()];
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::interpolate: return "interpolate";
    case StepKind::zscore: return "zscore";
    case StepKind::log: return "log";
    case StepKind::difference: return "difference";
    case StepKind::deseasonalize: return "deseasonalize";
  }
  return "?";
}

StepKind step_kind_from_string(std::string_view name) {
  for (auto kind : {StepKind::interpolate, StepKind::zscore, StepKind::log,
                    StepKind::difference, StepKind::deseasonalize}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorKind::config, "unknown transform '" + std::string(name) + "'");
}

Recipe default_recipe() {
  return {{StepKind::interpolate, 0},
          {StepKind::log, 0},
          {StepKind::difference, 1},
          {StepKind::zscore, 0}};
}

Recipe parse_recipe(std::string_view text) {
  Recipe recipe;
  if (text::trim(text).empty()) return recipe;
  for (auto token : text::split(text)) {
    token = text::trim(token);
    StepSpec spec;
    auto colon = token.find(':');
    spec.kind = step_kind_from_string(token.substr(0, colon));
    if (colon != std::string_view::npos) {
      auto arg = token.substr(colon + 1);
      auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), spec.parameter);
      if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
        throw Error(ErrorKind::config, "bad parameter in '" + std::string(token) + "'");
      }
    } else if (spec.kind == StepKind::difference) {
      spec.parameter = 1;
    }
    if (spec.kind == StepKind::difference && spec.parameter < 1) {
      throw Error(ErrorKind::config, "difference order must be >= 1");
    }
    if (spec.kind == StepKind::deseasonalize && spec.parameter < 2) {
      throw Error(ErrorKind::config, "deseasonalize needs a period >= 2, e.g. deseasonalize:5");
    }
    recipe.push_back(spec);
  }
  return recipe;
}

std::string format_recipe(const Recipe& recipe) {
  std::string out;
  for (const auto& step : recipe) {
    if (!out.empty()) out += ',';
    out += to_string(step.kind);
    if (step.kind == StepKind::difference || step.kind == StepKind::deseasonalize) {
      out += ':' + std::to_string(step.parameter);
    }
  }
  return out;
}

RawFrame frame_from_series(const market::OhlcvSeries& series) {
  RawFrame frame;
  for (auto field : market::kAllFields) {
    frame.names.emplace_back(market::field_name(field));
    frame.columns.push_back(series.column(field));
  }
  return frame;
}

namespace {

[[noreturn]] void rethrow_at_step(const Error& e, std::size_t step, StepKind kind,
                                  const std::string& column) {
  throw Error(e.kind(), "step " + std::to_string(step) + " (" + std::string(to_string(kind)) +
                            ") on column '" + column + "': " + e.what());
}

std::vector<double> dense(std::span<const std::optional<double>> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) {
      throw Error(ErrorKind::empty_data,
                  "missing value at row " + std::to_string(i) + " and no interpolation step");
    }
    out.push_back(*values[i]);
  }
  return out;
}

}  // namespace

FittedPipeline FittedPipeline::fit(const RawFrame& frame, const Recipe& recipe) {
  const bool interpolate_first = !recipe.empty() && recipe.front().kind == StepKind::interpolate;
  Frame filled;
  filled.names = frame.names;
  for (std::size_t c = 0; c < frame.columns.size(); ++c) {
    try {
      filled.columns.push_back(interpolate_first ? interpolate_missing(frame.columns[c])
                                                 : dense(frame.columns[c]));
    } catch (const Error& e) {
      rethrow_at_step(e, 0, recipe.empty() ? StepKind::interpolate : recipe.front().kind,
                      frame.names[c]);
    }
  }
  return fit(filled, recipe);
}

FittedPipeline FittedPipeline::fit(const Frame& frame, const Recipe& recipe) {
  if (frame.names.size() != frame.columns.size()) {
    throw Error(ErrorKind::shape, "column names and columns differ in count");
  }
  FittedPipeline pipeline;
  pipeline.column_names_ = frame.names;
  std::vector<std::vector<double>> current = frame.columns;
  std::size_t consumed = 0;

  for (std::size_t s = 0; s < recipe.size(); ++s) {
    TransformStep step;
    step.kind = recipe[s].kind;
    step.parameter = recipe[s].parameter;
    for (std::size_t c = 0; c < current.size(); ++c) {
      try {
        auto& col = current[c];
        switch (step.kind) {
          case StepKind::interpolate:
            break;
          case StepKind::zscore: {
            auto scale = fit_zscore(col);
            col = apply_zscore(scale, col);
            step.scales.push_back(scale);
            break;
          }
          case StepKind::log:
            col = log_transform(col);
            break;
          case StepKind::difference: {
            auto diffed = difference(col, step.parameter);
            step.seeds.push_back(std::move(diffed.seeds));
            col = std::move(diffed.values);
            break;
          }
          case StepKind::deseasonalize: {
            auto result = deseasonalize(col, step.parameter);
            const auto m = result.indices.size();
            // Stored by absolute row phase so later windows can realign.
            std::vector<double> absolute(m);
            for (std::size_t j = 0; j < m; ++j) absolute[(consumed + j) % m] = result.indices[j];
            step.seasonal_indices.push_back(std::move(absolute));
            col = std::move(result.adjusted);
            break;
          }
        }
      } catch (const Error& e) {
        rethrow_at_step(e, s, step.kind, frame.names[c]);
      }
    }
    if (step.kind == StepKind::difference) consumed += static_cast<std::size_t>(step.parameter);
    pipeline.steps_.push_back(std::move(step));
  }
  return pipeline;
}

Recipe FittedPipeline::recipe() const {
  Recipe recipe;
  for (const auto& step : steps_) recipe.push_back({step.kind, step.parameter});
  return recipe;
}

std::size_t FittedPipeline::rows_consumed() const {
  std::size_t total = 0;
  for (const auto& step : steps_) {
    if (step.kind == StepKind::difference) total += static_cast<std::size_t>(step.parameter);
  }
  return total;
}

namespace {

struct ColumnPass {
  std::vector<double> values;
  std::vector<std::vector<double>> seeds;  // per step
};

ColumnPass forward_column(const std::vector<TransformStep>& steps, std::size_t column,
                          const std::string& name, std::vector<double> values,
                          std::size_t phase_origin) {
  ColumnPass pass;
  pass.seeds.resize(steps.size());
  std::size_t consumed = 0;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const auto& step = steps[s];
    try {
      switch (step.kind) {
        case StepKind::interpolate:
          break;
        case StepKind::zscore:
          values = apply_zscore(step.scales.at(column), values);
          break;
        case StepKind::log:
          values = log_transform(values);
          break;
        case StepKind::difference: {
          auto diffed = difference(values, step.parameter);
          pass.seeds[s] = std::move(diffed.seeds);
          values = std::move(diffed.values);
          consumed += static_cast<std::size_t>(step.parameter);
          break;
        }
        case StepKind::deseasonalize:
          values = apply_seasonal(step.seasonal_indices.at(column), values,
                                  phase_origin + consumed, -1.0);
          break;
      }
    } catch (const Error& e) {
      rethrow_at_step(e, s, step.kind, name);
    }
  }
  pass.values = std::move(values);
  return pass;
}

std::vector<double> inverse_column_impl(const std::vector<TransformStep>& steps,
                                        std::size_t column,
                                        std::span<const std::vector<double>> seeds,
                                        std::vector<double> values, std::size_t phase_origin) {
  std::vector<std::size_t> consumed_before(steps.size() + 1, 0);
  for (std::size_t s = 0; s < steps.size(); ++s) {
    consumed_before[s + 1] =
        consumed_before[s] +
        (steps[s].kind == StepKind::difference ? static_cast<std::size_t>(steps[s].parameter) : 0);
  }
  for (std::size_t s = steps.size(); s-- > 0;) {
    const auto& step = steps[s];
    switch (step.kind) {
      case StepKind::interpolate:
        break;
      case StepKind::zscore:
        values = invert_zscore(step.scales.at(column), values);
        break;
      case StepKind::log:
        values = exp_transform(values);
        break;
      case StepKind::difference:
        if (seeds[s].size() != static_cast<std::size_t>(step.parameter)) {
          throw Error(ErrorKind::shape, "differencing anchors do not match step order");
        }
        values = undifference(seeds[s], values);
        break;
      case StepKind::deseasonalize:
        values = apply_seasonal(step.seasonal_indices.at(column), values,
                                phase_origin + consumed_before[s], +1.0);
        break;
    }
  }
  return values;
}

}  // namespace

std::vector<double> FittedPipeline::transform_column(std::size_t column,
                                                     std::span<const double> values,
                                                     std::size_t phase_origin) const {
  return forward_column(steps_, column, column_names_.at(column),
                        std::vector<double>(values.begin(), values.end()), phase_origin)
      .values;
}

Frame FittedPipeline::transform(const Frame& frame, std::size_t phase_origin) const {
  if (frame.columns.size() != column_names_.size()) {
    throw Error(ErrorKind::shape, "pipeline fitted on " + std::to_string(column_names_.size()) +
                                      " columns, got " + std::to_string(frame.columns.size()));
  }
  Frame out;
  out.names = column_names_;
  for (std::size_t c = 0; c < frame.columns.size(); ++c) {
    out.columns.push_back(transform_column(c, frame.columns[c], phase_origin));
  }
  return out;
}

Frame FittedPipeline::transform(const RawFrame& frame, std::size_t phase_origin) const {
  const bool interpolate_first = !steps_.empty() && steps_.front().kind == StepKind::interpolate;
  Frame dense_frame;
  dense_frame.names = frame.names;
  for (std::size_t c = 0; c < frame.columns.size(); ++c) {
    dense_frame.columns.push_back(interpolate_first ? interpolate_missing(frame.columns[c])
                                                    : dense(frame.columns[c]));
  }
  return transform(dense_frame, phase_origin);
}

Anchors FittedPipeline::anchors(const Frame& original, std::size_t phase_origin) const {
  Anchors anchors;
  anchors.seeds.assign(steps_.size(), std::vector<std::vector<double>>(original.columns.size()));
  for (std::size_t c = 0; c < original.columns.size(); ++c) {
    auto pass = forward_column(steps_, c, column_names_.at(c), original.columns[c], phase_origin);
    for (std::size_t s = 0; s < steps_.size(); ++s) anchors.seeds[s][c] = std::move(pass.seeds[s]);
  }
  return anchors;
}

Anchors FittedPipeline::fitted_anchors() const {
  Anchors anchors;
  anchors.seeds.assign(steps_.size(), std::vector<std::vector<double>>(column_names_.size()));
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    if (steps_[s].kind == StepKind::difference) anchors.seeds[s] = steps_[s].seeds;
  }
  return anchors;
}

std::vector<double> FittedPipeline::inverse_column(std::size_t column,
                                                   std::span<const double> transformed,
                                                   const Anchors& anchors,
                                                   std::size_t phase_origin) const {
  std::vector<std::vector<double>> seeds(steps_.size());
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    if (s < anchors.seeds.size() && column < anchors.seeds[s].size()) {
      seeds[s] = anchors.seeds[s][column];
    }
  }
  return inverse_column_impl(steps_, column, seeds,
                             std::vector<double>(transformed.begin(), transformed.end()),
                             phase_origin);
}

Frame FittedPipeline::inverse(const Frame& transformed) const {
  return inverse(transformed, fitted_anchors(), 0);
}

Frame FittedPipeline::inverse(const Frame& transformed, const Anchors& anchors,
                              std::size_t phase_origin) const {
  Frame out;
  out.names = column_names_;
  for (std::size_t c = 0; c < transformed.columns.size(); ++c) {
    out.columns.push_back(inverse_column(c, transformed.columns[c], anchors, phase_origin));
  }
  return out;
}

double FittedPipeline::invert_next(std::size_t column, std::span<const double> history,
                                   double next_transformed) const {
  auto pass = forward_column(steps_, column, column_names_.at(column),
                             std::vector<double>(history.begin(), history.end()), 0);
  pass.values.push_back(next_transformed);
  auto restored = inverse_column_impl(steps_, column, pass.seeds, std::move(pass.values), 0);
  return restored.back();
}

// ---------------------------------------------------------------------------
// Serialisation
// ---------------------------------------------------------------------------

std::string FittedPipeline::to_json() const {
  Json doc;
  doc["format"] = "fxcast-pipeline";
  doc["version"] = kPipelineFormatVersion;
  doc["columns"] = column_names_;
  Json steps = Json::array();
  for (const auto& step : steps_) {
    Json js;
    js["kind"] = to_string(step.kind);
    js["parameter"] = step.parameter;
    switch (step.kind) {
      case StepKind::zscore: {
        Json scales = Json::array();
        for (const auto& s : step.scales) scales.push_back({{"mean", s.mean}, {"std", s.std}});
        js["scales"] = scales;
        break;
      }
      case StepKind::difference:
        js["seeds"] = step.seeds;
        break;
      case StepKind::deseasonalize:
        js["indices"] = step.seasonal_indices;
        break;
      default:
        break;
    }
    steps.push_back(js);
  }
  doc["steps"] = steps;
  return doc.dump(2) + "\n";
}

FittedPipeline FittedPipeline::from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::parse, std::string("pipeline document: ") + e.what());
  }
  if (doc.value("format", "") != "fxcast-pipeline") {
    throw Error(ErrorKind::parse, "not a pipeline document");
  }
  if (doc.value("version", -1) != kPipelineFormatVersion) {
    throw Error(ErrorKind::config, "unsupported pipeline version " + doc["version"].dump());
  }
  try {
    FittedPipeline pipeline;
    pipeline.column_names_ = doc.at("columns").get<std::vector<std::string>>();
    const std::size_t columns = pipeline.column_names_.size();
    for (const auto& js : doc.at("steps")) {
      TransformStep step;
      step.kind = step_kind_from_string(js.at("kind").get<std::string>());
      step.parameter = js.at("parameter").get<int>();
      switch (step.kind) {
        case StepKind::zscore:
          for (const auto& s : js.at("scales")) {
            ZScore scale{s.at("mean").get<double>(), s.at("std").get<double>()};
            if (!(scale.std > 0.0)) throw Error(ErrorKind::degenerate_scale, "stored std <= 0");
            step.scales.push_back(scale);
          }
          if (step.scales.size() != columns) throw Error(ErrorKind::shape, "scale count");
          break;
        case StepKind::difference:
          step.seeds = js.at("seeds").get<std::vector<std::vector<double>>>();
          if (step.seeds.size() != columns) throw Error(ErrorKind::shape, "seed count");
          for (const auto& s : step.seeds) {
            if (s.size() != static_cast<std::size_t>(step.parameter)) {
              throw Error(ErrorKind::shape, "seed list length must equal differencing order");
            }
          }
          break;
        case StepKind::deseasonalize:
          step.seasonal_indices = js.at("indices").get<std::vector<std::vector<double>>>();
          if (step.seasonal_indices.size() != columns) throw Error(ErrorKind::shape, "indices");
          break;
        default:
          break;
      }
      pipeline.steps_.push_back(std::move(step));
    }
    return pipeline;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::parse, std::string("pipeline document: ") + e.what());
  }
}

void FittedPipeline::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << to_json();
}

FittedPipeline FittedPipeline::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

}  // namespace fxcast::preprocess
