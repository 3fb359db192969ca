#include "mixl/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mixl/draws.hpp"
#include "mixl/errors.hpp"

namespace mixl {

std::string_view status_name(ConvergenceStatus status) {
  switch (status) {
    case ConvergenceStatus::Converged: return "converged";
    case ConvergenceStatus::MaxIter: return "max_iter";
    case ConvergenceStatus::LineSearchFailure: return "line_search_failure";
  }
  return "?";
}

ConvergenceStatus parse_status(std::string_view name) {
  for (auto s : {ConvergenceStatus::Converged, ConvergenceStatus::MaxIter, ConvergenceStatus::LineSearchFailure}) {
    if (status_name(s) == name) return s;
  }
  throw Error(ErrorCode::InvalidArtifact, "unknown convergence status '" + std::string(name) + "'");
}

std::vector<double> fd_gradient(const Objective& objective, std::span<const double> theta) {
  std::vector<double> x(theta.begin(), theta.end());
  std::vector<double> g(x.size(), 0.0);
  double f0 = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(theta[i]));
    x[i] = theta[i] + h;
    const double fp = objective(x);
    x[i] = theta[i] - h;
    const double fm = objective(x);
    x[i] = theta[i];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h);
      continue;
    }
    if (std::isnan(f0)) f0 = objective(x);
    if (std::isfinite(fp) && std::isfinite(f0)) {
      g[i] = (fp - f0) / h;
    } else if (std::isfinite(fm) && std::isfinite(f0)) {
      g[i] = (f0 - fm) / h;
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

namespace {

double max_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

OptimizerResult bfgs(const Objective& objective, const GradientFn& gradient, std::vector<double> start,
                     const OptimizerSettings& s) {
  const auto n = static_cast<Eigen::Index>(start.size());
  auto grad = [&](const Eigen::VectorXd& x) {
    std::vector<double> xs = to_std(x);
    return to_eigen(gradient ? gradient(xs) : fd_gradient(objective, xs));
  };
  auto value = [&](const Eigen::VectorXd& x) {
    std::vector<double> xs = to_std(x);
    return objective(xs);
  };

  OptimizerResult out;
  Eigen::VectorXd x = to_eigen(start);
  double f = value(x);
  if (!std::isfinite(f)) throw Error(ErrorCode::NonFiniteObjectiveAtStart, "objective is not finite at the start");
  Eigen::VectorXd g = grad(x);
  if (n == 0) {
    out.theta = start;
    out.value = f;
    out.status = ConvergenceStatus::Converged;
    return out;
  }

  auto identity_scale = [&](const Eigen::VectorXd& gv) { return 1.0 / std::max(1.0, max_norm(gv)); };
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) * identity_scale(g);
  bool fresh = true;
  bool scaled = false;
  std::size_t small_changes = 0;
  out.status = ConvergenceStatus::MaxIter;

  std::size_t iter = 0;
  for (; iter < s.max_iter; ++iter) {
    if (max_norm(g) < s.gradient_tol) {
      out.status = ConvergenceStatus::Converged;
      break;
    }
    Eigen::VectorXd p = H * g;
    double slope = g.dot(p);
    if (!(slope > 0.0) || !p.allFinite()) {
      H = Eigen::MatrixXd::Identity(n, n) * identity_scale(g);
      fresh = true;
      p = H * g;
      slope = g.dot(p);
    }

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd xn;
    double fn = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + t * p;
      fn = value(xn);
      if (std::isfinite(fn) && fn >= f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!fresh) {
        H = Eigen::MatrixXd::Identity(n, n) * identity_scale(g);
        fresh = true;
        continue;
      }
      out.status = ConvergenceStatus::LineSearchFailure;
      break;
    }

    Eigen::VectorXd gn = grad(xn);
    const Eigen::VectorXd step = xn - x;
    const Eigen::VectorXd y = g - gn;  // change in the gradient of -f
    const double sy = step.dot(y);
    if (sy > 1e-12 * step.norm() * y.norm() && gn.allFinite()) {
      if (!scaled) {
        H = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * step * y.transpose()) * H * (I - rho * y * step.transpose()) + rho * step * step.transpose();
      fresh = false;
    }
    const double rel = std::abs(fn - f) / std::max(std::abs(f), 1.0);
    x = xn;
    f = fn;
    g = gn.allFinite() ? gn : Eigen::VectorXd(gn.unaryExpr([](double v) { return std::isfinite(v) ? v : 0.0; }));
    // A step the line search had to cut hard says nothing about being near an optimum.
    small_changes = rel < s.relative_tol && t >= 1e-3 ? small_changes + 1 : 0;
    if (small_changes >= 2) {
      ++iter;
      out.status = ConvergenceStatus::Converged;
      break;
    }
  }
  out.theta = to_std(x);
  out.value = f;
  out.gradient_norm = max_norm(g);
  out.iterations = iter;
  return out;
}

}  // namespace

OptimizerResult maximize(const Objective& objective, std::vector<double> start, const OptimizerSettings& settings,
                         const GradientFn& gradient) {
  OptimizerResult best = bfgs(objective, gradient, start, settings);
  Rng rng(settings.start_seed);
  for (std::size_t s = 1; s < settings.n_starts; ++s) {
    std::vector<double> perturbed = start;
    for (double& v : perturbed) v += 0.1 * (1.0 + std::abs(v)) * rng.std_normal();
    if (!std::isfinite(objective(perturbed))) continue;
    OptimizerResult r = bfgs(objective, gradient, perturbed, settings);
    const bool better_status = r.status == ConvergenceStatus::Converged && best.status != ConvergenceStatus::Converged;
    if (r.value > best.value || (better_status && r.value >= best.value - 1e-9)) best = std::move(r);
  }
  return best;
}

std::vector<std::optional<double>> std_errors(const Objective& objective, std::span<const double> theta) {
  const auto n = static_cast<Eigen::Index>(theta.size());
  std::vector<double> x(theta.begin(), theta.end());
  std::vector<double> h(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) h[i] = 1e-4 * std::max(1.0, std::abs(theta[i]));
  const double f0 = objective(x);

  Eigen::MatrixXd hess(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    x[ui] = theta[ui] + h[ui];
    const double fp = objective(x);
    x[ui] = theta[ui] - h[ui];
    const double fm = objective(x);
    x[ui] = theta[ui];
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h[ui] * h[ui]);
    for (Eigen::Index j = 0; j < i; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      auto at = [&](double si, double sj) {
        x[ui] = theta[ui] + si * h[ui];
        x[uj] = theta[uj] + sj * h[uj];
        const double v = objective(x);
        x[ui] = theta[ui];
        x[uj] = theta[uj];
        return v;
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h[ui] * h[uj]);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }

  std::vector<std::optional<double>> se(theta.size());
  if (n == 0 || !hess.allFinite()) return se;
  const Eigen::MatrixXd info = -hess;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const Eigen::MatrixXd& vecs = eig.eigenvectors();
  const double tol = 1e-10 * std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd null_load = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (lambda(k) > tol) {
      var += vecs.col(k).cwiseAbs2() / lambda(k);
    } else {
      null_load += vecs.col(k).cwiseAbs2();
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (null_load(i) > 1e-6) continue;
    se[static_cast<std::size_t>(i)] = std::sqrt(var(i));
  }
  return se;
}

FitStats fit_stats(double ll, std::size_t k, double n_obs) {
  const double kd = static_cast<double>(k);
  return {2.0 * kd - 2.0 * ll, kd * std::log(n_obs) - 2.0 * ll};
}

std::vector<double> FitResult::estimates() const {
  std::vector<double> out;
  out.reserve(parameters.size());
  for (const auto& p : parameters) out.push_back(p.estimate);
  return out;
}

const ParameterEstimate& FitResult::parameter(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::MissingCoefficient, "fit '" + model_id + "' has no parameter '" + name + "'");
}

namespace {

std::vector<double> family_start(const MixingSpec& m) {
  const double ln_half = std::log(0.5);
  switch (m.family) {
    case Family::Fixed: return {0.0};
    case Family::Normal:
    case Family::Uniform:
    case Family::Triangular: return {0.0, 0.1};
    case Family::Lognormal:
    case Family::Loguniform: return {ln_half, 0.1};
    case Family::AsymTriangular:
      if (m.pin_at_offset) return {-0.1, 0.1};
      return {-0.1, 0.1, 0.0};
    case Family::Fm2: return {0.0, 0.1, 0.1};
    case Family::Fm3: return {0.0, 0.1, 0.1, 0.1};
  }
  return {};
}

std::vector<double> family_start_at_mean(const MixingSpec& m, double beta) {
  const double sign = m.positive ? 1.0 : -1.0;
  const double log_mag = std::log(std::max(sign * beta, 1e-3));
  switch (m.family) {
    case Family::Fixed: return {beta};
    case Family::Normal: return {beta, 0.1};
    case Family::Uniform: return {beta - 0.05, 0.1};
    case Family::Triangular: return {beta - 0.1, 0.1};
    case Family::Lognormal: return {log_mag - 0.005, 0.1};
    case Family::Loguniform: return {log_mag - std::log(std::expm1(0.1) / 0.1), 0.1};
    case Family::AsymTriangular:
      if (m.pin_at_offset) return {beta - 0.1, beta + 0.1};
      return {beta - 0.1, beta + 0.1, 0.0};
    case Family::Fm2: return {beta - 0.1 / 2.0 - 0.1 / 3.0, 0.1, 0.1};
    case Family::Fm3: return {beta - 0.1 / 2.0 - 0.1 / 3.0 - 0.1 / 4.0, 0.1, 0.1, 0.1};
  }
  return {};
}

// The warm-start model keeps a sign-constrained WTP price coefficient as is; everything else is fixed.
ModelSpec warm_start_spec(const ModelSpec& spec) {
  ModelSpec out = spec;
  for (auto& c : out.coefficients) {
    const bool keep = spec.space == Space::Wtp && c.name() == spec.price_coefficient;
    if (!keep) c.mixing.family = Family::Fixed;
  }
  return out;
}

}  // namespace

std::vector<double> default_start(const ModelSpec& spec) {
  std::vector<double> out;
  for (const auto& c : spec.coefficients) {
    auto s = family_start(c.mixing);
    out.insert(out.end(), s.begin(), s.end());
  }
  if (spec.rp) out.push_back(0.1);
  return out;
}

std::vector<double> warm_start_from(const ModelSpec& spec, std::span<const double> mnl_estimates) {
  const ModelSpec base = warm_start_spec(spec);
  const ParameterLayout base_layout = layout(base);
  if (mnl_estimates.size() != base_layout.size()) {
    throw Error(ErrorCode::ArityMismatch, "warm start needs " + std::to_string(base_layout.size()) + " MNL estimates");
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < spec.coefficients.size(); ++k) {
    const auto& target = spec.coefficients[k].mixing;
    const auto& from = base.coefficients[k].mixing;
    const std::size_t off = base_layout.offset[k];
    if (target.family == from.family) {
      for (std::size_t i = 0; i < arity(from); ++i) out.push_back(mnl_estimates[off + i]);
      continue;
    }
    auto s = family_start_at_mean(target, mnl_estimates[off]);
    out.insert(out.end(), s.begin(), s.end());
  }
  if (spec.rp) out.push_back(mnl_estimates[base_layout.rho_param]);
  return out;
}

FitResult estimate(const ModelSpec& spec, const ChoiceDataset& dataset, const EstimateSettings& settings,
                   const std::string& model_id) {
  validate_spec(spec);
  if (settings.n_draws == 0) throw Error(ErrorCode::ZeroCount, "n_draws must be >= 1");
  const SimulationDraws draws = make_simulation_draws(spec, dataset.persons.size(), settings.n_draws, settings.seed);
  const CompiledModel model(spec, dataset, draws);
  const ParameterLayout& lay = model.parameter_layout();

  std::vector<double> start = default_start(spec);
  const bool any_random = std::any_of(spec.coefficients.begin(), spec.coefficients.end(),
                                      [](const CoefficientSpec& c) { return is_random(c.mixing.family); });
  if (settings.warm_start && any_random) {
    EstimateSettings base_settings = settings;
    base_settings.warm_start = false;
    base_settings.compute_std_errors = false;
    const FitResult base = estimate(warm_start_spec(spec), dataset, base_settings, model_id + ".warm");
    start = warm_start_from(spec, base.estimates());
  }

  const Objective objective = [&model](std::span<const double> theta) { return model.log_likelihood(theta); };
  const OptimizerResult opt = maximize(objective, start, settings.optimizer);
  std::vector<std::optional<double>> se(opt.theta.size());
  if (settings.compute_std_errors) se = std_errors(objective, opt.theta);
  const LikelihoodResult lr = model.evaluate(opt.theta);

  FitResult fit;
  fit.model_id = model_id;
  fit.spec = spec;
  for (std::size_t k = 0; k < spec.coefficients.size(); ++k) {
    const auto& m = spec.coefficients[k].mixing;
    for (std::size_t i = 0; i < arity(m); ++i) {
      const std::size_t idx = lay.offset[k] + i;
      const double est = opt.theta[idx];
      fit.parameters.push_back({lay.names[idx], est, se[idx], is_scale_parameter(m, i) ? std::abs(est) : est});
    }
    fit.fingerprint.families[m.coefficient] = std::string(family_name(m.family));
  }
  if (spec.rp) {
    const double est = opt.theta[lay.rho_param];
    fit.parameters.push_back({kRhoParameter, est, se[lay.rho_param], std::abs(est)});
  }
  fit.ll = lr.ll;
  fit.n_params = opt.theta.size();
  fit.n_obs = dataset.mode == DatasetMode::RpPair ? dataset.persons.size() : dataset.n_tasks();
  const FitStats stats = fit_stats(fit.ll, fit.n_params, static_cast<double>(fit.n_obs));
  fit.aic = stats.aic;
  fit.bic = stats.bic;
  fit.convergence = {opt.status, opt.gradient_norm, opt.iterations};
  fit.fingerprint.seed = settings.seed;
  fit.fingerprint.n_draws = draws.n_draws;
  for (const auto& p : dataset.persons) fit.person_ids.push_back(p.id);
  fit.person_likelihoods = lr.person_prob;
  fit.n_floored = lr.n_floored;
  return fit;
}

}  // namespace mixl
