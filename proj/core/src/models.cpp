#include "mixl/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mixl/errors.hpp"

namespace mixl {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

bool sign_constrained(Family f) { return f == Family::Lognormal || f == Family::Loguniform; }

// log(1 / (1 + exp(-x))) without overflow.
double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace

void validate_spec(const ModelSpec& spec) {
  std::set<std::string> names;
  for (const auto& c : spec.coefficients) {
    if (c.name().empty()) throw Error(ErrorCode::InvalidSpec, "coefficient without a name");
    if (!names.insert(c.name()).second) throw Error(ErrorCode::InvalidSpec, "coefficient '" + c.name() + "' repeated");
    if (spec.rp) {
      if (c.outcome != "cig" && c.outcome != "ecig") {
        throw Error(ErrorCode::InvalidSpec, "RP coefficient '" + c.name() + "' needs outcome cig or ecig");
      }
    } else if (c.attribute.empty() == c.asc_label.empty()) {
      throw Error(ErrorCode::InvalidSpec, "coefficient '" + c.name() + "' needs exactly one of attribute or asc");
    }
  }
  if (names.count(kRhoParameter)) throw Error(ErrorCode::InvalidSpec, "'rho.sigma' is reserved");
  if (spec.space == Space::Wtp) {
    if (spec.rp) throw Error(ErrorCode::InvalidSpec, "WTP space applies to stated-choice panels only");
    auto it = std::find_if(spec.coefficients.begin(), spec.coefficients.end(),
                           [&](const CoefficientSpec& c) { return c.name() == spec.price_coefficient; });
    if (it == spec.coefficients.end()) {
      throw Error(ErrorCode::InvalidSpec, "WTP space needs a price coefficient named in the spec");
    }
    if (!sign_constrained(it->mixing.family)) {
      throw Error(ErrorCode::InvalidSpec, "WTP-space price coefficient must be lognormal or loguniform");
    }
    if (it->attribute.empty()) throw Error(ErrorCode::InvalidSpec, "WTP-space price coefficient needs a price attribute");
  }
}

ParameterLayout layout(const ModelSpec& spec) {
  ParameterLayout out;
  for (const auto& c : spec.coefficients) {
    out.offset.push_back(out.names.size());
    for (auto& label : parameter_labels(c.mixing)) out.names.push_back(std::move(label));
    if (is_random(c.mixing.family)) {
      out.first_dim.push_back(out.n_dims);
      out.n_dims += draw_dims(c.mixing.family);
    } else {
      out.first_dim.push_back(npos);
    }
  }
  if (spec.rp) {
    out.rho_param = out.names.size();
    out.names.emplace_back(kRhoParameter);
    out.rho_dim = out.n_dims++;
  }
  return out;
}

ModelSpec with_family(const ModelSpec& spec, Family family) {
  ModelSpec out = spec;
  for (auto& c : out.coefficients) {
    if (c.follow_family) c.mixing.family = family;
  }
  return out;
}

ModelSpec as_fixed(const ModelSpec& spec) {
  ModelSpec out = spec;
  for (auto& c : out.coefficients) c.mixing.family = Family::Fixed;
  return out;
}

SimulationDraws make_simulation_draws(const ModelSpec& spec, std::size_t n_persons, std::size_t n_draws,
                                      std::uint64_t seed) {
  const ParameterLayout lay = layout(spec);
  SimulationDraws out;
  out.n_persons = n_persons;
  out.n_dims = lay.n_dims;
  if (lay.n_dims == 0) {
    out.n_draws = 1;
    out.uniform = DrawBlock(n_persons, 1, 0, DrawKind::Uniform01, seed, {});
    out.normal = DrawBlock(n_persons, 1, 0, DrawKind::StdNormal, seed, {});
    return out;
  }
  out.n_draws = n_draws;
  out.uniform = mlhs(n_persons, n_draws, lay.n_dims, seed);
  out.normal = to_std_normal(out.uniform);
  return out;
}

std::vector<double> mnl_prob(std::span<const double> utilities) {
  std::vector<double> p(utilities.size());
  if (utilities.empty()) return p;
  const double m = *std::max_element(utilities.begin(), utilities.end());
  double s = 0.0;
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    p[i] = std::exp(utilities[i] - m);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

std::vector<double> build_utility(const ModelSpec& spec, const std::vector<std::string>& attribute_names,
                                  const Task& task, const std::map<std::string, double>& coeffs) {
  auto coef = [&](const std::string& name) {
    auto it = coeffs.find(name);
    if (it == coeffs.end()) throw Error(ErrorCode::MissingCoefficient, "no value for coefficient '" + name + "'");
    return it->second;
  };
  auto column = [&](const std::string& attr) {
    auto it = std::find(attribute_names.begin(), attribute_names.end(), attr);
    if (it == attribute_names.end()) throw Error(ErrorCode::SpecDataMismatch, "attribute '" + attr + "' not in data");
    return static_cast<std::size_t>(it - attribute_names.begin());
  };

  std::vector<double> v(task.alternatives.size(), 0.0);
  const bool wtp = spec.space == Space::Wtp;
  double scale = 1.0;
  for (const auto& c : spec.coefficients) {
    const double beta = coef(c.name());
    const bool is_price = wtp && c.name() == spec.price_coefficient;
    if (is_price) scale = beta;
    for (std::size_t i = 0; i < task.alternatives.size(); ++i) {
      const Alternative& alt = task.alternatives[i];
      double x = 0.0;
      if (!c.attribute.empty()) {
        x = alt.x[column(c.attribute)];
      } else if (alt.label == c.asc_label) {
        x = 1.0;
      }
      v[i] += (is_price ? 1.0 : beta) * x;
    }
  }
  if (wtp) {
    for (double& u : v) u *= scale;
  }
  return v;
}

CompiledModel::CompiledModel(const ModelSpec& spec, const ChoiceDataset& dataset, const SimulationDraws& draws)
    : spec_(spec), layout_(layout(spec)) {
  validate_spec(spec_);
  rp_ = spec_.rp.has_value();
  if (rp_ != (dataset.mode == DatasetMode::RpPair)) {
    throw Error(ErrorCode::SpecDataMismatch, rp_ ? "RP spec needs an rp_pair dataset" : "stated spec needs a stated_panel dataset");
  }
  n_persons_ = dataset.persons.size();
  if (draws.n_persons != n_persons_) {
    throw Error(ErrorCode::DrawDimensionMismatch, "draws cover " + std::to_string(draws.n_persons) +
                                                      " persons, dataset has " + std::to_string(n_persons_));
  }
  if (draws.n_dims != layout_.n_dims) {
    throw Error(ErrorCode::DrawDimensionMismatch, "spec needs " + std::to_string(layout_.n_dims) +
                                                      " draw dimensions, draws have " + std::to_string(draws.n_dims));
  }
  if (layout_.n_dims > 0 &&
      (draws.uniform.n_dims() != layout_.n_dims || draws.normal.n_dims() != layout_.n_dims ||
       draws.uniform.n_persons() != n_persons_ || draws.normal.n_persons() != n_persons_ ||
       draws.uniform.n_draws() != draws.n_draws || draws.normal.n_draws() != draws.n_draws ||
       draws.uniform.kind() != DrawKind::Uniform01 || draws.normal.kind() != DrawKind::StdNormal)) {
    throw Error(ErrorCode::DrawDimensionMismatch, "draw blocks do not match the declared shape");
  }
  n_draws_ = layout_.n_dims > 0 ? draws.n_draws : 1;
  n_dims_ = layout_.n_dims;

  const std::size_t K = spec_.coefficients.size();
  for (std::size_t k = 0; k < K; ++k) {
    const auto& c = spec_.coefficients[k];
    Coef coef{c.mixing, layout_.offset[k], nullptr, 0, draw_dims(c.mixing.family)};
    if (is_random(c.mixing.family)) {
      const DrawBlock& block = draw_kind(c.mixing.family) == DrawKind::StdNormal ? draws.normal : draws.uniform;
      coef.draws = block.values().data();
      coef.dim = layout_.first_dim[k];
    }
    coefs_.push_back(coef);
    if (spec_.space == Space::Wtp && c.name() == spec_.price_coefficient) price_index_ = k;
  }

  if (rp_) {
    labels_ = {"cig", "no_cig", "ecig", "no_ecig"};
    rho_draws_ = draws.normal.values().data();
    rp_design_.assign(n_persons_ * 2 * K, 0.0);
    for (std::size_t n = 0; n < n_persons_; ++n) {
      const PanelPerson& person = dataset.persons[n];
      auto c_it = person.covariates.find(kCigIndicator);
      auto e_it = person.covariates.find(kEcigIndicator);
      if (c_it == person.covariates.end() || e_it == person.covariates.end()) {
        throw Error(ErrorCode::MissingIndicator, "person '" + person.id + "' lacks the c/e indicators");
      }
      rp_c_.push_back(c_it->second);
      rp_e_.push_back(e_it->second);
      for (std::size_t k = 0; k < K; ++k) {
        const auto& c = spec_.coefficients[k];
        double x = 1.0;
        if (!c.attribute.empty()) {
          auto it = person.covariates.find(c.attribute);
          if (it == person.covariates.end()) {
            throw Error(ErrorCode::SpecDataMismatch, "covariate '" + c.attribute + "' missing for person '" + person.id + "'");
          }
          x = it->second;
        }
        const std::size_t eq = c.outcome == "cig" ? 0 : 1;
        rp_design_[(n * 2 + eq) * K + k] = x;
      }
    }
    return;
  }

  labels_ = dataset.alternative_labels;
  std::vector<std::size_t> columns(K, npos);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& c = spec_.coefficients[k];
    if (c.attribute.empty()) {
      if (std::find(labels_.begin(), labels_.end(), c.asc_label) == labels_.end()) {
        throw Error(ErrorCode::SpecDataMismatch, "ASC label '" + c.asc_label + "' never appears in the data");
      }
      continue;
    }
    auto it = std::find(dataset.attribute_names.begin(), dataset.attribute_names.end(), c.attribute);
    if (it == dataset.attribute_names.end()) {
      throw Error(ErrorCode::SpecDataMismatch, "attribute '" + c.attribute + "' not in data");
    }
    columns[k] = static_cast<std::size_t>(it - dataset.attribute_names.begin());
    if (dataset.is_categorical(columns[k])) {
      throw Error(ErrorCode::SpecDataMismatch, "attribute '" + c.attribute + "' is categorical; dummy-code it first");
    }
  }
  for (const auto& person : dataset.persons) {
    person_task_begin_.push_back(task_chosen_.size());
    for (const auto& task : person.tasks) {
      task_alt_begin_.push_back(alt_label_.size());
      task_chosen_.push_back(task.chosen);
      for (const auto& alt : task.alternatives) {
        alt_label_.push_back(static_cast<std::size_t>(
            std::find(labels_.begin(), labels_.end(), alt.label) - labels_.begin()));
        for (std::size_t k = 0; k < K; ++k) {
          const auto& c = spec_.coefficients[k];
          design_.push_back(columns[k] != npos ? alt.x[columns[k]] : (alt.label == c.asc_label ? 1.0 : 0.0));
        }
      }
    }
  }
  person_task_begin_.push_back(task_chosen_.size());
  task_alt_begin_.push_back(alt_label_.size());
}

void CompiledModel::realize_coefficients(std::span<const double> params, std::size_t person, std::size_t draw,
                                         double* beta) const {
  const std::size_t base = (person * n_draws_ + draw) * n_dims_;
  for (std::size_t k = 0; k < coefs_.size(); ++k) {
    const Coef& c = coefs_[k];
    const auto p = params.subspan(c.offset, arity(c.mixing));
    if (!c.draws) {
      beta[k] = p[0];
      continue;
    }
    const double d1 = c.draws[base + c.dim];
    const double d2 = c.dims > 1 ? c.draws[base + c.dim + 1] : 0.0;
    beta[k] = transform(c.mixing, p, d1, d2);
  }
}

double CompiledModel::person_log_prob(std::span<const double> params, std::size_t n,
                                      std::vector<double>& scratch) const {
  const std::size_t K = coefs_.size();
  const std::size_t R = n_draws_;
  double* lp = scratch.data();
  double* beta = lp + R;
  double* v = beta + K;

  for (std::size_t r = 0; r < R; ++r) {
    realize_coefficients(params, n, r, beta);
    for (std::size_t k = 0; k < K; ++k) {
      if (!std::isfinite(beta[k])) return std::numeric_limits<double>::quiet_NaN();
    }
    double logp = 0.0;
    if (rp_) {
      const double rho = params[layout_.rho_param] * rho_draws_[(n * R + r) * n_dims_ + layout_.rho_dim];
      const double* xc = &rp_design_[(n * 2) * K];
      const double* xe = xc + K;
      double vc = rho;
      double ve = rho;
      for (std::size_t k = 0; k < K; ++k) {
        vc += beta[k] * xc[k];
        ve += beta[k] * xe[k];
      }
      // Bernoulli factors: P^c (1-P)^(1-c) for each outcome; log(1 - sigmoid(v)) = log_sigmoid(-v).
      logp = (rp_c_[n] == 1.0 ? log_sigmoid(vc) : log_sigmoid(-vc)) +
             (rp_e_[n] == 1.0 ? log_sigmoid(ve) : log_sigmoid(-ve));
    } else {
      double scale = 1.0;
      if (price_index_ != npos) {
        scale = beta[price_index_];
        beta[price_index_] = 1.0;
      }
      for (std::size_t t = person_task_begin_[n]; t < person_task_begin_[n + 1]; ++t) {
        const std::size_t a0 = task_alt_begin_[t];
        const std::size_t J = task_alt_begin_[t + 1] - a0;
        const double* x = &design_[a0 * K];
        double vmax = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < J; ++i) {
          double u = 0.0;
          for (std::size_t k = 0; k < K; ++k) u += beta[k] * x[i * K + k];
          v[i] = scale * u;
          vmax = std::max(vmax, v[i]);
        }
        double s = 0.0;
        for (std::size_t i = 0; i < J; ++i) s += std::exp(v[i] - vmax);
        logp += v[task_chosen_[t]] - vmax - std::log(s);
      }
    }
    lp[r] = logp;
  }
  const double m = *std::max_element(lp, lp + R);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (std::size_t r = 0; r < R; ++r) acc += std::exp(lp[r] - m);
  return m + std::log(acc / static_cast<double>(R));
}

LikelihoodResult CompiledModel::evaluate(std::span<const double> params) const {
  if (params.size() != layout_.size()) {
    throw Error(ErrorCode::ArityMismatch, "expected " + std::to_string(layout_.size()) + " parameters, got " +
                                              std::to_string(params.size()));
  }
  std::size_t max_j = 2;
  for (std::size_t t = 0; t + 1 < task_alt_begin_.size(); ++t) {
    max_j = std::max(max_j, task_alt_begin_[t + 1] - task_alt_begin_[t]);
  }
  std::vector<double> scratch(n_draws_ + coefs_.size() + max_j);
  LikelihoodResult out;
  out.person_prob.resize(n_persons_);
  const double log_floor = std::log(kProbabilityFloor);
  for (std::size_t n = 0; n < n_persons_; ++n) {
    double lpn = person_log_prob(params, n, scratch);
    if (std::isnan(lpn)) {
      out.ll = std::numeric_limits<double>::quiet_NaN();
      std::fill(out.person_prob.begin(), out.person_prob.end(), std::numeric_limits<double>::quiet_NaN());
      return out;
    }
    if (lpn < log_floor) {
      lpn = log_floor;
      ++out.n_floored;
    }
    out.person_prob[n] = lpn == log_floor ? kProbabilityFloor : std::exp(lpn);
    out.ll += lpn;
  }
  return out;
}

double CompiledModel::log_likelihood(std::span<const double> params) const { return evaluate(params).ll; }

ShareTable CompiledModel::shares(std::span<const double> params) const {
  const std::size_t K = coefs_.size();
  std::vector<double> beta(K);
  ShareTable out;
  out.labels = labels_;
  out.shares.assign(labels_.size(), 0.0);
  if (rp_) {
    out.groups = {"cig", "cig", "ecig", "ecig"};
    double pc = 0.0;
    double pe = 0.0;
    for (std::size_t n = 0; n < n_persons_; ++n) {
      for (std::size_t r = 0; r < n_draws_; ++r) {
        realize_coefficients(params, n, r, beta.data());
        const double rho = params[layout_.rho_param] * rho_draws_[(n * n_draws_ + r) * n_dims_ + layout_.rho_dim];
        double vc = rho;
        double ve = rho;
        for (std::size_t k = 0; k < K; ++k) {
          vc += beta[k] * rp_design_[(n * 2) * K + k];
          ve += beta[k] * rp_design_[(n * 2 + 1) * K + k];
        }
        pc += 1.0 / (1.0 + std::exp(-vc));
        pe += 1.0 / (1.0 + std::exp(-ve));
      }
    }
    const double denom = static_cast<double>(n_persons_ * n_draws_);
    out.shares = {pc / denom, 1.0 - pc / denom, pe / denom, 1.0 - pe / denom};
    return out;
  }

  out.groups.assign(labels_.size(), "choice");
  const std::size_t n_tasks = task_chosen_.size();
  const double weight = 1.0 / static_cast<double>(n_tasks * n_draws_);
  std::vector<double> v;
  for (std::size_t n = 0; n < n_persons_; ++n) {
    for (std::size_t r = 0; r < n_draws_; ++r) {
      realize_coefficients(params, n, r, beta.data());
      double scale = 1.0;
      if (price_index_ != npos) {
        scale = beta[price_index_];
        beta[price_index_] = 1.0;
      }
      for (std::size_t t = person_task_begin_[n]; t < person_task_begin_[n + 1]; ++t) {
        const std::size_t a0 = task_alt_begin_[t];
        const std::size_t J = task_alt_begin_[t + 1] - a0;
        v.assign(J, 0.0);
        for (std::size_t i = 0; i < J; ++i) {
          double u = 0.0;
          for (std::size_t k = 0; k < K; ++k) u += beta[k] * design_[(a0 + i) * K + k];
          v[i] = scale * u;
        }
        const auto p = mnl_prob(v);
        for (std::size_t i = 0; i < J; ++i) out.shares[alt_label_[a0 + i]] += weight * p[i];
      }
    }
  }
  return out;
}

LikelihoodResult mixed_panel_ll(const ModelSpec& spec, const ChoiceDataset& dataset, const SimulationDraws& draws,
                                std::span<const double> params) {
  if (dataset.mode != DatasetMode::StatedPanel || spec.rp) {
    throw Error(ErrorCode::SpecDataMismatch, "mixed_panel_ll needs a stated_panel dataset and spec");
  }
  return CompiledModel(spec, dataset, draws).evaluate(params);
}

LikelihoodResult rp_pair_ll(const ModelSpec& spec, const ChoiceDataset& dataset, const SimulationDraws& draws,
                            std::span<const double> params) {
  if (dataset.mode != DatasetMode::RpPair || !spec.rp) {
    throw Error(ErrorCode::SpecDataMismatch, "rp_pair_ll needs an rp_pair dataset and an RP spec");
  }
  return CompiledModel(spec, dataset, draws).evaluate(params);
}

}  // namespace mixl
