#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mixl/estimation.hpp"

namespace mixl {

/// Person x model matrix of simulated person likelihoods P_n, row-major.
struct LikelihoodMatrix {
  std::vector<std::string> person_ids;
  std::vector<std::string> model_ids;
  std::vector<double> values;

  std::size_t n_persons() const { return person_ids.size(); }
  std::size_t n_models() const { return model_ids.size(); }
  double operator()(std::size_t person, std::size_t model) const { return values[person * n_models() + model]; }
};

/// Constituent fits are used as frozen inputs; only their person likelihoods are read.
/// Throws PersonSetMismatch, MissingPersonLikelihoods.
LikelihoodMatrix stack(std::span<const FitResult> fits);

struct MAResult {
  std::vector<std::string> model_ids;
  /// Class-membership parameters with theta[0] = 0; -inf/+inf when a weight is exactly 0 or 1.
  std::vector<double> theta;
  std::vector<double> weights;
  double ll = 0.0;
  std::size_t n_params = 0;  // conservative count, see ma_fit_stats
  double aic = 0.0;
  std::vector<std::string> person_ids;
  std::vector<double> person_likelihoods;
  ConvergenceReport convergence;
  /// Artifact paths of the constituents, when known.
  std::vector<std::string> constituent_paths;
};

/// Softmax of theta.
std::vector<double> weights_from_theta(std::span<const double> theta);

/// sum_n ln(sum_k w_k M[n][k]).
double ma_log_likelihood(const LikelihoodMatrix& m, std::span<const double> weights);

/// Maximizes the averaged log-likelihood over theta_2..theta_K (theta_1 = 0) from theta = 0.
/// A single-model corner is returned whenever it beats the interior optimum.
/// Throws TooFewModels, NonPositiveLikelihood.
MAResult estimate_weights(const LikelihoodMatrix& m);

struct MaFitStats {
  std::size_t n_params = 0;
  double aic = 0.0;
};

/// AIC counting every constituent parameter plus the K - 1 weight parameters.
MaFitStats ma_fit_stats(double ll_ma, std::span<const FitResult> fits);
MaFitStats ma_fit_stats(const MAResult& result, std::span<const FitResult> fits);

/// Weight estimation plus the conservative fit statistics, ready to persist.
MAResult average(std::span<const FitResult> fits);

}  // namespace mixl
