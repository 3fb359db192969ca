#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixl/data.hpp"
#include "mixl/models.hpp"

namespace mixl {

enum class ConvergenceStatus { Converged, MaxIter, LineSearchFailure };

std::string_view status_name(ConvergenceStatus status);
ConvergenceStatus parse_status(std::string_view name);

using Objective = std::function<double(std::span<const double>)>;
using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

struct OptimizerSettings {
  std::size_t max_iter = 500;
  double gradient_tol = 1e-6;
  double relative_tol = 1e-9;
  /// Number of starts; extra starts are perturbations of the first.
  std::size_t n_starts = 1;
  std::uint64_t start_seed = 7;
};

struct OptimizerResult {
  std::vector<double> theta;
  double value = 0.0;
  double gradient_norm = 0.0;  // max-norm
  std::size_t iterations = 0;
  ConvergenceStatus status = ConvergenceStatus::MaxIter;
};

/// Central finite differences, step max(1e-6, 1e-6 |theta_i|). Falls back to a one-sided
/// difference when one side is not finite.
std::vector<double> fd_gradient(const Objective& objective, std::span<const double> theta);

/// BFGS ascent with Armijo backtracking. Converged when the gradient max-norm drops below
/// gradient_tol, or when the relative change in the objective stays below relative_tol for
/// two consecutive accepted steps that the line search did not cut below 1e-3 of the
/// quasi-Newton step. Throws NonFiniteObjectiveAtStart.
OptimizerResult maximize(const Objective& objective, std::vector<double> start, const OptimizerSettings& settings = {},
                         const GradientFn& gradient = nullptr);

/// Square roots of the diagonal of the negative inverse finite-difference Hessian. Entries
/// are empty where the Hessian is singular along a direction that loads on that parameter.
std::vector<std::optional<double>> std_errors(const Objective& objective, std::span<const double> theta);

struct FitStats {
  double aic = 0.0;
  double bic = 0.0;
};

FitStats fit_stats(double ll, std::size_t k, double n_obs);

struct ParameterEstimate {
  std::string name;
  double estimate = 0.0;
  std::optional<double> se;
  /// |estimate| for scale parameters whose sign is unidentified, else the estimate.
  double reported = 0.0;
};

struct ConvergenceReport {
  ConvergenceStatus status = ConvergenceStatus::MaxIter;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
};

struct SettingsFingerprint {
  std::uint64_t seed = 0;
  std::size_t n_draws = 0;
  std::map<std::string, std::string> families;
};

struct FitResult {
  std::string model_id;
  ModelSpec spec;
  std::vector<ParameterEstimate> parameters;
  double ll = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_params = 0;
  ConvergenceReport convergence;
  SettingsFingerprint fingerprint;
  std::vector<std::string> person_ids;
  std::vector<double> person_likelihoods;
  std::size_t n_floored = 0;
  /// Where the data came from, relative to the artifact when persisted. Informational.
  std::string data_path;

  std::vector<double> estimates() const;
  const ParameterEstimate& parameter(const std::string& name) const;
};

struct EstimateSettings {
  std::size_t n_draws = 500;
  std::uint64_t seed = 1;
  OptimizerSettings optimizer;
  /// Start means at MNL estimates instead of the defaults.
  bool warm_start = false;
  bool compute_std_errors = true;
};

/// Defaults: ASCs and means 0, spread parameters 0.1, lognormal/loguniform location ln(0.5),
/// asymmetric triangular on [-0.1, 0.1] with c = 0.
std::vector<double> default_start(const ModelSpec& spec);

/// Starts whose distribution means equal the given fixed-coefficient (MNL) estimates.
std::vector<double> warm_start_from(const ModelSpec& spec, std::span<const double> mnl_estimates);

FitResult estimate(const ModelSpec& spec, const ChoiceDataset& dataset, const EstimateSettings& settings,
                   const std::string& model_id);

}  // namespace mixl
