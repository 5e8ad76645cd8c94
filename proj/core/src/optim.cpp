#include "fxcast/optim.hpp"

#include <cmath>

#include "fxcast/error.hpp"

namespace fxcast::ad {

void adam_step(std::span<Tensor> params, AdamState& state) {
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params[p].has_grad()) {
      throw Error(ErrorKind::unready_parameter,
                  "parameter " + std::to_string(p) + " has no gradient");
    }
  }
  if (state.m.empty() && state.v.empty()) {
    for (const auto& param : params) {
      state.m.emplace_back(param.size(), 0.0);
      state.v.emplace_back(param.size(), 0.0);
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw Error(ErrorKind::shape, "optimizer state tracks " + std::to_string(state.m.size()) +
                                      " parameters, got " + std::to_string(params.size()));
  }

  const auto& cfg = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t p = 0; p < params.size(); ++p) {
    auto values = params[p].mutable_values();
    auto grad = params[p].grad();
    auto& m = state.m[p];
    auto& v = state.v[p];
    if (m.size() != values.size() || v.size() != values.size()) {
      throw Error(ErrorKind::shape, "optimizer moments do not match parameter " +
                                        std::to_string(p));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
    params[p].clear_grad();
  }
}

void clear_grads(std::span<Tensor> params) {
  for (auto& p : params) p.clear_grad();
}

}  // namespace fxcast::ad
