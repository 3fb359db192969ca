#include "mixl/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixl/errors.hpp"

namespace mixl {

LikelihoodMatrix stack(std::span<const FitResult> fits) {
  LikelihoodMatrix m;
  if (fits.empty()) return m;
  m.person_ids = fits.front().person_ids;
  for (const auto& fit : fits) {
    if (fit.person_likelihoods.empty()) {
      throw Error(ErrorCode::MissingPersonLikelihoods, "fit '" + fit.model_id + "' carries no person likelihoods");
    }
    if (fit.person_ids != m.person_ids || fit.person_likelihoods.size() != m.person_ids.size()) {
      throw Error(ErrorCode::PersonSetMismatch, "fit '" + fit.model_id + "' covers a different person set than '" +
                                                    fits.front().model_id + "'");
    }
    m.model_ids.push_back(fit.model_id);
  }
  const std::size_t K = fits.size();
  m.values.resize(m.person_ids.size() * K);
  for (std::size_t n = 0; n < m.person_ids.size(); ++n) {
    for (std::size_t k = 0; k < K; ++k) m.values[n * K + k] = fits[k].person_likelihoods[n];
  }
  return m;
}

std::vector<double> weights_from_theta(std::span<const double> theta) {
  std::vector<double> w(theta.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (double t : theta) mx = std::max(mx, t);
  if (std::isinf(mx) && mx > 0) {
    const auto n = static_cast<double>(std::count(theta.begin(), theta.end(), mx));
    for (std::size_t k = 0; k < theta.size(); ++k) w[k] = theta[k] == mx ? 1.0 / n : 0.0;
    return w;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    w[k] = std::exp(theta[k] - mx);
    s += w[k];
  }
  for (double& v : w) v /= s;
  return w;
}

double ma_log_likelihood(const LikelihoodMatrix& m, std::span<const double> weights) {
  double ll = 0.0;
  const std::size_t K = m.n_models();
  for (std::size_t n = 0; n < m.n_persons(); ++n) {
    double mix = 0.0;
    for (std::size_t k = 0; k < K; ++k) mix += weights[k] * m(n, k);
    ll += std::log(mix);
  }
  return ll;
}

MAResult estimate_weights(const LikelihoodMatrix& m) {
  const std::size_t K = m.n_models();
  if (K < 2) throw Error(ErrorCode::TooFewModels, "model averaging needs at least two models");
  for (double v : m.values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::NonPositiveLikelihood, "likelihood matrix has a non-positive entry");
  }

  auto full_theta = [K](std::span<const double> free) {
    std::vector<double> theta(K, 0.0);
    std::copy(free.begin(), free.end(), theta.begin() + 1);
    return theta;
  };
  const Objective objective = [&](std::span<const double> free) {
    return ma_log_likelihood(m, weights_from_theta(full_theta(free)));
  };
  // d/dtheta_k = sum_n (pi_k M_nk / mix_n - pi_k)
  const GradientFn gradient = [&](std::span<const double> free) {
    const auto w = weights_from_theta(full_theta(free));
    std::vector<double> g(K - 1, 0.0);
    for (std::size_t n = 0; n < m.n_persons(); ++n) {
      double mix = 0.0;
      for (std::size_t k = 0; k < K; ++k) mix += w[k] * m(n, k);
      for (std::size_t k = 1; k < K; ++k) g[k - 1] += w[k] * m(n, k) / mix - w[k];
    }
    return g;
  };

  OptimizerSettings settings;
  settings.gradient_tol = 1e-8;
  settings.relative_tol = 1e-14;
  settings.max_iter = 2000;
  const OptimizerResult opt = maximize(objective, std::vector<double>(K - 1, 0.0), settings, gradient);

  MAResult out;
  out.model_ids = m.model_ids;
  out.person_ids = m.person_ids;
  out.theta = full_theta(opt.theta);
  out.weights = weights_from_theta(out.theta);
  out.ll = opt.value;
  out.convergence = {opt.status, opt.gradient_norm, opt.iterations};

  // The supremum may sit on a corner of the simplex, which theta only reaches at infinity.
  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> e(K, 0.0);
    e[k] = 1.0;
    const double ll = ma_log_likelihood(m, e);
    if (ll > best_ll) {
      best_ll = ll;
      best = k;
    }
  }
  if (best_ll > out.ll) {
    out.weights.assign(K, 0.0);
    out.weights[best] = 1.0;
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      out.theta[k] = best == 0 ? (k == 0 ? 0.0 : -inf) : (k == 0 ? 0.0 : (k == best ? inf : 0.0));
    }
    out.ll = best_ll;
    out.convergence.status = ConvergenceStatus::Converged;
  }

  out.person_likelihoods.resize(m.n_persons());
  for (std::size_t n = 0; n < m.n_persons(); ++n) {
    double mix = 0.0;
    for (std::size_t k = 0; k < K; ++k) mix += out.weights[k] * m(n, k);
    out.person_likelihoods[n] = mix;
  }
  return out;
}

MaFitStats ma_fit_stats(double ll_ma, std::span<const FitResult> fits) {
  MaFitStats out;
  for (const auto& f : fits) out.n_params += f.n_params;
  if (!fits.empty()) out.n_params += fits.size() - 1;
  out.aic = 2.0 * static_cast<double>(out.n_params) - 2.0 * ll_ma;
  return out;
}

MaFitStats ma_fit_stats(const MAResult& result, std::span<const FitResult> fits) {
  if (fits.size() != result.model_ids.size()) {
    throw Error(ErrorCode::ConstituentMismatch, "fit list does not match the averaged models");
  }
  return ma_fit_stats(result.ll, fits);
}

MAResult average(std::span<const FitResult> fits) {
  MAResult out = estimate_weights(stack(fits));
  const MaFitStats stats = ma_fit_stats(out, fits);
  out.n_params = stats.n_params;
  out.aic = stats.aic;
  return out;
}

}  // namespace mixl
