#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fxcast::arima {

/// Sign applied to the moving-average sum.
enum class MaConvention {
  /// y_t = c + e_t + sum(phi_i y_{t-i}) - sum(theta_i e_{t-i})
  minus,
  /// y_t = c + e_t + sum(phi_i y_{t-i}) + sum(theta_i e_{t-i})
  plus,
};

std::string_view to_string(MaConvention convention);

struct FitInfo {
  std::size_t observations = 0;
  std::size_t iterations = 0;
  double loss = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// ARMA(p, q) on an already-differenced series. Presample residuals are zero.
struct ArimaModel {
  double c = 0.0;
  std::vector<double> phi;
  std::vector<double> theta;
  std::vector<double> residuals;
  MaConvention convention = MaConvention::minus;
  FitInfo fit;

  std::size_t p() const { return phi.size(); }
  std::size_t q() const { return theta.size(); }
};

/// One-step prediction with e_t = 0. Histories run oldest to newest and must
/// hold at least p values and q residuals respectively.
double arima_predict_one(const ArimaModel& model, std::span<const double> y_history,
                         std::span<const double> eps_history);

/// In-sample one-step residuals; the first p are presample zeros.
std::vector<double> residuals(const ArimaModel& model, std::span<const double> series);

/// Mean of squared residuals over t >= p.
double css_loss(const ArimaModel& model, std::span<const double> series);

struct FitOptions {
  std::size_t max_iterations = 10000;
  double tolerance = 1e-10;
};

/// Conditional-sum-of-squares fit by gradient descent with backtracking line
/// search, gradients from the autodiff engine.
ArimaModel arima_fit(std::span<const double> series, std::size_t p, std::size_t q,
                     const FitOptions& options = {});

/// Recursive multi-step forecast with future residuals zero.
std::vector<double> arima_forecast(const ArimaModel& model, std::span<const double> series,
                                   std::size_t horizon);

/// Same predictions under the other MA sign convention (theta negated).
ArimaModel with_convention(const ArimaModel& model, MaConvention convention);

std::string to_json(const ArimaModel& model);
ArimaModel from_json(std::string_view text);

}  // namespace fxcast::arima
