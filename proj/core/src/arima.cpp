#include "fxcast/arima.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "fxcast/autodiff.hpp"
#include "fxcast/error.hpp"

namespace fxcast::arima {

using ad::Tensor;
using Json = nlohmann::json;

std::string_view to_string(MaConvention convention) {
  return convention == MaConvention::minus ? "paper-minus-MA" : "standard-plus-MA";
}

namespace {

MaConvention convention_from_string(std::string_view text) {
  if (text == "paper-minus-MA") return MaConvention::minus;
  if (text == "standard-plus-MA") return MaConvention::plus;
  throw Error(ErrorKind::parse, "unknown MA convention '" + std::string(text) + "'");
}

/// +1 when the MA sum is added to the prediction, -1 when subtracted.
double ma_sign(MaConvention convention) { return convention == MaConvention::plus ? 1.0 : -1.0; }

}  // namespace

double arima_predict_one(const ArimaModel& model, std::span<const double> y_history,
                         std::span<const double> eps_history) {
  if (y_history.size() < model.p() || eps_history.size() < model.q()) {
    throw Error(ErrorKind::insufficient_data,
                "ARMA(" + std::to_string(model.p()) + "," + std::to_string(model.q()) +
                    ") needs " + std::to_string(model.p()) + " values and " +
                    std::to_string(model.q()) + " residuals of history");
  }
  double y = model.c;
  for (std::size_t i = 1; i <= model.p(); ++i) y += model.phi[i - 1] * y_history[y_history.size() - i];
  double ma = 0.0;
  for (std::size_t i = 1; i <= model.q(); ++i) {
    ma += model.theta[i - 1] * eps_history[eps_history.size() - i];
  }
  return y + ma_sign(model.convention) * ma;
}

std::vector<double> residuals(const ArimaModel& model, std::span<const double> series) {
  const std::size_t p = model.p(), q = model.q();
  if (series.size() <= p) {
    throw Error(ErrorKind::insufficient_data, "series of " + std::to_string(series.size()) +
                                                  " values is too short for p = " +
                                                  std::to_string(p));
  }
  std::vector<double> eps(series.size(), 0.0);
  const double sign = ma_sign(model.convention);
  for (std::size_t t = p; t < series.size(); ++t) {
    double pred = model.c;
    for (std::size_t i = 1; i <= p; ++i) pred += model.phi[i - 1] * series[t - i];
    for (std::size_t i = 1; i <= q && i <= t; ++i) pred += sign * model.theta[i - 1] * eps[t - i];
    eps[t] = series[t] - pred;
  }
  return eps;
}

double css_loss(const ArimaModel& model, std::span<const double> series) {
  const auto eps = residuals(model, series);
  double total = 0.0;
  for (std::size_t t = model.p(); t < eps.size(); ++t) total += eps[t] * eps[t];
  return total / static_cast<double>(eps.size() - model.p());
}

namespace {

/// CSS loss as a graph over (c, phi, theta) for gradient evaluation.
Tensor css_graph(std::span<const double> y, std::size_t p, std::size_t q, const Tensor& c,
                 const Tensor& phi, const Tensor& theta) {
  const std::size_t n = y.size();
  const std::size_t m = n - p;
  if (q == 0) {
    // Vectorised: e = Y - X phi - c with X the lag matrix.
    Tensor target = Tensor::from({m, 1}, std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(p), y.end()));
    Tensor fitted = Tensor::zeros({m, 1});
    if (p > 0) {
      std::vector<double> lags(m * p);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t i = 1; i <= p; ++i) lags[r * p + (i - 1)] = y[p + r - i];
      }
      fitted = ad::matmul(Tensor::from({m, p}, std::move(lags)), ad::reshape(phi, {p, 1}));
    }
    Tensor e = ad::sub(ad::sub(target, fitted), c);
    return ad::mean(ad::mul(e, e));
  }

  // The MA recursion makes each residual depend on earlier ones.
  std::vector<Tensor> phi_i, theta_i;
  for (std::size_t i = 0; i < p; ++i) phi_i.push_back(ad::slice(phi, 0, i, i + 1));
  for (std::size_t i = 0; i < q; ++i) theta_i.push_back(ad::slice(theta, 0, i, i + 1));
  std::vector<Tensor> eps(n);
  Tensor total = Tensor::zeros({1});
  for (std::size_t t = p; t < n; ++t) {
    Tensor e = ad::sub(Tensor::from({1}, {y[t]}), c);
    for (std::size_t i = 1; i <= p; ++i) e = ad::sub(e, ad::mul_scalar(phi_i[i - 1], y[t - i]));
    for (std::size_t i = 1; i <= q && t - i >= p; ++i) {
      e = ad::add(e, ad::mul(theta_i[i - 1], eps[t - i]));
    }
    eps[t] = e;
    total = ad::add(total, ad::mul(e, e));
  }
  return ad::mul_scalar(total, 1.0 / static_cast<double>(m));
}

}  // namespace

ArimaModel arima_fit(std::span<const double> series, std::size_t p, std::size_t q,
                     const FitOptions& options) {
  const std::size_t n = series.size();
  if (n <= p || n == 0) {
    throw Error(ErrorKind::insufficient_data, "series of " + std::to_string(n) +
                                                  " values is too short for p = " +
                                                  std::to_string(p));
  }
  for (double v : series) {
    if (!std::isfinite(v)) throw Error(ErrorKind::domain, "series contains a non-finite value");
  }

  ArimaModel model;
  model.convention = MaConvention::minus;
  model.c = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  model.phi.assign(p, 0.0);
  model.theta.assign(q, 0.0);
  model.fit.observations = n;
  if (n < 10 * std::max<std::size_t>(p + q, 1)) {
    model.fit.warnings.push_back("only " + std::to_string(n) + " observations for ARMA(" +
                                 std::to_string(p) + "," + std::to_string(q) + ")");
  }

  auto pack = [&](const ArimaModel& m) {
    std::vector<double> w{m.c};
    w.insert(w.end(), m.phi.begin(), m.phi.end());
    w.insert(w.end(), m.theta.begin(), m.theta.end());
    return w;
  };
  auto unpack = [&](std::span<const double> w) {
    ArimaModel m = model;
    m.c = w[0];
    std::copy(w.begin() + 1, w.begin() + 1 + static_cast<std::ptrdiff_t>(p), m.phi.begin());
    std::copy(w.begin() + 1 + static_cast<std::ptrdiff_t>(p), w.end(), m.theta.begin());
    return m;
  };
  auto gradient = [&](std::span<const double> w) {
    Tensor c = Tensor::from({1}, {w[0]}, true);
    Tensor phi = Tensor::from({p}, {w.begin() + 1, w.begin() + 1 + static_cast<std::ptrdiff_t>(p)}, true);
    Tensor theta = Tensor::from({q}, {w.begin() + 1 + static_cast<std::ptrdiff_t>(p), w.end()}, true);
    {
      ad::Graph graph;
      graph.backward(css_graph(series, p, q, c, phi, theta));
    }
    std::vector<double> g{c.grad()[0]};
    if (p > 0) g.insert(g.end(), phi.grad().begin(), phi.grad().end());
    if (q > 0) {
      if (theta.has_grad()) {
        g.insert(g.end(), theta.grad().begin(), theta.grad().end());
      } else {
        g.resize(g.size() + q, 0.0);
      }
    }
    return g;
  };

  std::vector<double> w = pack(model);
  double loss = css_loss(model, series);
  double step = 1.0;
  std::size_t iter = 0;
  bool converged = false;
  while (iter < options.max_iterations) {
    if (!std::isfinite(loss)) {
      throw Error(ErrorKind::divergence, "CSS loss became non-finite at iteration " + std::to_string(iter));
    }
    ++iter;
    const auto g = gradient(w);
    double g2 = 0.0;
    for (double gi : g) g2 += gi * gi;
    if (g2 == 0.0) {
      converged = true;
      break;
    }
    // Armijo backtracking from twice the last accepted step.
    step = std::min(step * 2.0, 1e6);
    std::vector<double> trial(w.size());
    double trial_loss = loss;
    bool accepted = false;
    while (step > 1e-300) {
      for (std::size_t k = 0; k < w.size(); ++k) trial[k] = w[k] - step * g[k];
      trial_loss = css_loss(unpack(trial), series);
      if (std::isfinite(trial_loss) && trial_loss <= loss - 1e-4 * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      converged = true;
      break;
    }
    const double change = loss - trial_loss;
    w = trial;
    loss = trial_loss;
    if (std::abs(change) < options.tolerance) {
      converged = true;
      break;
    }
  }

  model = unpack(w);
  model.residuals = residuals(model, series);
  model.fit.iterations = iter;
  model.fit.loss = loss;
  model.fit.converged = converged;
  if (!converged) model.fit.warnings.push_back("iteration limit reached");
  return model;
}

std::vector<double> arima_forecast(const ArimaModel& model, std::span<const double> series,
                                   std::size_t horizon) {
  if (horizon == 0) throw Error(ErrorKind::config, "forecast horizon must be >= 1");
  std::vector<double> y(series.begin(), series.end());
  std::vector<double> eps = model.residuals.size() == series.size() ? model.residuals
                                                                    : residuals(model, series);
  std::vector<double> out;
  for (std::size_t h = 0; h < horizon; ++h) {
    const double next = arima_predict_one(model, y, eps);
    out.push_back(next);
    y.push_back(next);
    eps.push_back(0.0);
  }
  return out;
}

ArimaModel with_convention(const ArimaModel& model, MaConvention convention) {
  ArimaModel out = model;
  if (convention != model.convention) {
    for (double& t : out.theta) t = -t;
    out.convention = convention;
  }
  return out;
}

std::string to_json(const ArimaModel& model) {
  Json j;
  j["format"] = "fxcast-arima";
  j["version"] = 1;
  j["p"] = model.p();
  j["q"] = model.q();
  j["c"] = model.c;
  j["phi"] = model.phi;
  j["theta"] = model.theta;
  j["convention"] = to_string(model.convention);
  j["fit"] = {{"observations", model.fit.observations},
              {"iterations", model.fit.iterations},
              {"loss", model.fit.loss},
              {"converged", model.fit.converged},
              {"warnings", model.fit.warnings}};
  j["residuals"] = model.residuals;
  return j.dump(2);
}

ArimaModel from_json(std::string_view text) {
  try {
    const Json j = Json::parse(text);
    if (j.at("format") != "fxcast-arima" || j.at("version") != 1) {
      throw Error(ErrorKind::parse, "not an ARIMA model document");
    }
    ArimaModel m;
    m.c = j.at("c").get<double>();
    m.phi = j.at("phi").get<std::vector<double>>();
    m.theta = j.at("theta").get<std::vector<double>>();
    if (m.p() != j.at("p").get<std::size_t>() || m.q() != j.at("q").get<std::size_t>()) {
      throw Error(ErrorKind::parse, "p/q disagree with coefficient counts");
    }
    m.convention = convention_from_string(j.at("convention").get<std::string>());
    const auto& fit = j.at("fit");
    m.fit.observations = fit.at("observations").get<std::size_t>();
    m.fit.iterations = fit.at("iterations").get<std::size_t>();
    m.fit.loss = fit.at("loss").get<double>();
    m.fit.converged = fit.at("converged").get<bool>();
    m.fit.warnings = fit.at("warnings").get<std::vector<std::string>>();
    m.residuals = j.at("residuals").get<std::vector<double>>();
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::parse, std::string("ARIMA model JSON: ") + e.what());
  }
}

}  // namespace fxcast::arima
