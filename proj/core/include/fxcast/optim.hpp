#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fxcast/autodiff.hpp"

namespace fxcast::ad {

struct AdamConfig {
  double lr = 0.0002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  AdamState() = default;
  explicit AdamState(AdamConfig cfg) : config(cfg) {}
};

/// Bias-corrected Adam update. Every parameter must hold a gradient; grads
/// are cleared after the step.
void adam_step(std::span<Tensor> params, AdamState& state);

void clear_grads(std::span<Tensor> params);

}  // namespace fxcast::ad
