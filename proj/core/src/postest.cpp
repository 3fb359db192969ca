#include "mixl/postest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixl/draws.hpp"
#include "mixl/errors.hpp"
#include "mixl/mixing.hpp"

namespace mixl {

namespace {

void check_constituents(const MAResult& ma, std::span<const FitResult> fits) {
  if (fits.size() != ma.model_ids.size()) {
    throw Error(ErrorCode::ConstituentMismatch, "expected " + std::to_string(ma.model_ids.size()) + " fits, got " +
                                                    std::to_string(fits.size()));
  }
  for (std::size_t k = 0; k < fits.size(); ++k) {
    if (fits[k].model_id != ma.model_ids[k]) {
      throw Error(ErrorCode::ConstituentMismatch,
                  "fit '" + fits[k].model_id + "' is not constituent '" + ma.model_ids[k] + "'");
    }
  }
}

// Parameter slice of coefficient k.
std::vector<double> coefficient_params(const ParameterLayout& lay, const ModelSpec& spec, std::span<const double> theta,
                                       std::size_t k) {
  const auto n = arity(spec.coefficients[k].mixing);
  return {theta.begin() + static_cast<std::ptrdiff_t>(lay.offset[k]),
          theta.begin() + static_cast<std::ptrdiff_t>(lay.offset[k] + n)};
}

double draw_one(const MixingSpec& m, std::span<const double> params, Rng& rng) {
  if (m.family == Family::Fixed) return params[0];
  const double u1 = rng.uniform();
  const double u2 = draw_dims(m.family) > 1 ? rng.uniform() : 0.0;
  if (draw_kind(m.family) == DrawKind::StdNormal) return transform(m, params, inverse_normal_cdf(u1));
  return transform(m, params, u1, u2);
}

struct Sampler {
  const FitResult* fit;
  ParameterLayout lay;
  std::vector<std::vector<double>> params;
};

Sampler make_sampler(const FitResult& fit) {
  Sampler s{&fit, layout(fit.spec), {}};
  const auto theta = fit.estimates();
  for (std::size_t k = 0; k < fit.spec.coefficients.size(); ++k) {
    s.params.push_back(coefficient_params(s.lay, fit.spec, theta, k));
  }
  return s;
}

double sd_of(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

bool is_single_parameter_mean(Family f) { return f == Family::Fixed || f == Family::Normal; }

}  // namespace

ShareTable predict_shares(const FitResult& fit, const ChoiceDataset& dataset) {
  const SimulationDraws draws =
      make_simulation_draws(fit.spec, dataset.persons.size(), fit.fingerprint.n_draws, fit.fingerprint.seed);
  const CompiledModel model(fit.spec, dataset, draws);
  const auto theta = fit.estimates();
  if (theta.size() != model.parameter_layout().size()) {
    throw Error(ErrorCode::SpecDataMismatch, "fit '" + fit.model_id + "' has the wrong number of parameters");
  }
  return model.shares(theta);
}

ShareTable predict_shares(const MAResult& ma, std::span<const FitResult> fits, const ChoiceDataset& dataset) {
  check_constituents(ma, fits);
  ShareTable out;
  for (std::size_t k = 0; k < fits.size(); ++k) {
    const ShareTable s = predict_shares(fits[k], dataset);
    if (k == 0) {
      out = s;
      std::fill(out.shares.begin(), out.shares.end(), 0.0);
    } else if (s.labels != out.labels) {
      throw Error(ErrorCode::ConstituentMismatch, "constituents predict different alternatives");
    }
    for (std::size_t i = 0; i < s.shares.size(); ++i) out.shares[i] += ma.weights[k] * s.shares[i];
  }
  return out;
}

const CoefficientSamples& UnconditionalDraws::at(const std::string& coefficient) const {
  for (const auto& c : coefficients) {
    if (c.coefficient == coefficient) return c;
  }
  throw Error(ErrorCode::UnknownAttribute, "no draws for coefficient '" + coefficient + "'");
}

UnconditionalDraws sample_unconditionals(const FitResult& fit, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw Error(ErrorCode::ZeroCount, "n_samples must be >= 1");
  const Sampler s = make_sampler(fit);
  UnconditionalDraws out{fit.model_id, n_samples, {}};
  for (const auto& c : fit.spec.coefficients) out.coefficients.push_back({c.name(), {}});
  for (auto& c : out.coefficients) c.values.reserve(n_samples);
  Rng rng(seed);
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (std::size_t k = 0; k < s.params.size(); ++k) {
      out.coefficients[k].values.push_back(draw_one(fit.spec.coefficients[k].mixing, s.params[k], rng));
    }
  }
  return out;
}

UnconditionalDraws sample_ma_unconditionals(const MAResult& ma, std::span<const FitResult> fits,
                                            std::size_t n_samples, std::uint64_t seed) {
  check_constituents(ma, fits);
  if (n_samples == 0) throw Error(ErrorCode::ZeroCount, "n_samples must be >= 1");
  std::vector<Sampler> samplers;
  for (const auto& f : fits) samplers.push_back(make_sampler(f));

  UnconditionalDraws out{"MA", n_samples, {}};
  for (const auto& c : fits.front().spec.coefficients) out.coefficients.push_back({c.name(), {}});
  // index[k][j]: position of output coefficient j inside constituent k
  std::vector<std::vector<std::size_t>> index(fits.size());
  for (std::size_t k = 0; k < fits.size(); ++k) {
    const auto& coefs = fits[k].spec.coefficients;
    if (coefs.size() != out.coefficients.size()) {
      throw Error(ErrorCode::ConstituentMismatch, "fit '" + fits[k].model_id + "' has different coefficients");
    }
    for (const auto& oc : out.coefficients) {
      auto it = std::find_if(coefs.begin(), coefs.end(),
                             [&](const CoefficientSpec& c) { return c.name() == oc.coefficient; });
      if (it == coefs.end()) {
        throw Error(ErrorCode::ConstituentMismatch,
                    "fit '" + fits[k].model_id + "' lacks coefficient '" + oc.coefficient + "'");
      }
      index[k].push_back(static_cast<std::size_t>(it - coefs.begin()));
    }
  }

  Rng rng(seed);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double u = rng.uniform();
    std::size_t k = fits.size();
    double acc = 0.0;
    for (std::size_t j = 0; j < fits.size(); ++j) {
      if (ma.weights[j] <= 0.0) continue;
      k = j;
      acc += ma.weights[j];
      if (u <= acc) break;
    }
    for (std::size_t j = 0; j < out.coefficients.size(); ++j) {
      const std::size_t c = index[k][j];
      out.coefficients[j].values.push_back(draw_one(fits[k].spec.coefficients[c].mixing, samplers[k].params[c], rng));
    }
  }
  return out;
}

WtpRow wtp_interval(const std::string& attribute, double estimate, double se) {
  return {attribute, "se", estimate, estimate - kZ975 * se, estimate + kZ975 * se};
}

namespace {

// Mean of coefficient `name` across constituents, weighted, at the given parameter vectors.
double weighted_mean(std::span<const FitResult> fits, std::span<const double> weights,
                     const std::vector<Sampler>& samplers, const std::vector<std::vector<double>>& thetas,
                     const std::string& name) {
  double mean = 0.0;
  for (std::size_t k = 0; k < fits.size(); ++k) {
    if (weights[k] == 0.0) continue;
    const auto& coefs = fits[k].spec.coefficients;
    for (std::size_t c = 0; c < coefs.size(); ++c) {
      if (coefs[c].name() != name) continue;
      mean += weights[k] *
              analytic_mean(coefs[c].mixing, coefficient_params(samplers[k].lay, fits[k].spec, thetas[k], c));
    }
  }
  return mean;
}

WtpSummary summarize(const std::string& source, std::span<const FitResult> fits, std::span<const double> weights,
                     std::uint64_t seed) {
  for (const auto& f : fits) {
    if (f.spec.space != Space::Wtp) throw Error(ErrorCode::NotWTPSpace, "fit '" + f.model_id + "' is not in WTP space");
  }
  std::vector<Sampler> samplers;
  std::vector<std::vector<double>> theta_hat;
  std::vector<std::vector<double>> se;
  bool se_complete = true;
  for (const auto& f : fits) {
    samplers.push_back(make_sampler(f));
    theta_hat.push_back(f.estimates());
    std::vector<double> s;
    for (const auto& p : f.parameters) {
      if (!p.se) se_complete = false;
      s.push_back(p.se.value_or(0.0));
    }
    se.push_back(std::move(s));
  }

  WtpSummary out{source, {}};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto& ref = fits.front();
  for (const auto& coef : ref.spec.coefficients) {
    if (coef.name() == ref.spec.price_coefficient) continue;
    const double mean = weighted_mean(fits, weights, samplers, theta_hat, coef.name());

    const bool single = fits.size() == 1 && is_single_parameter_mean(coef.mixing.family);
    if (single) {
      const auto& p = ref.parameter(parameter_labels(coef.mixing).front());
      if (!p.se) {
        out.rows.push_back({coef.name(), "unavailable", mean, nan, nan});
      } else {
        out.rows.push_back(wtp_interval(coef.name(), mean, *p.se));
      }
      continue;
    }
    if (!se_complete) {
      out.rows.push_back({coef.name(), "unavailable", mean, nan, nan});
      continue;
    }
    Rng rng(seed);
    std::vector<double> replicates;
    replicates.reserve(kWtpRedraws);
    for (std::size_t r = 0; r < kWtpRedraws; ++r) {
      std::vector<std::vector<double>> thetas = theta_hat;
      for (std::size_t k = 0; k < fits.size(); ++k) {
        for (std::size_t i = 0; i < thetas[k].size(); ++i) thetas[k][i] += se[k][i] * rng.std_normal();
      }
      replicates.push_back(weighted_mean(fits, weights, samplers, thetas, coef.name()));
    }
    const double half = kZ975 * sd_of(replicates);
    out.rows.push_back({coef.name(), "redraw", mean, mean - half, mean + half});
  }
  return out;
}

}  // namespace

WtpSummary wtp_summary(const FitResult& fit, std::uint64_t seed) {
  const double one = 1.0;
  return summarize(fit.model_id, std::span<const FitResult>(&fit, 1), std::span<const double>(&one, 1), seed);
}

WtpSummary wtp_summary(const MAResult& ma, std::span<const FitResult> fits, std::uint64_t seed) {
  check_constituents(ma, fits);
  return summarize("MA", fits, ma.weights, seed);
}

std::pair<double, double> padded_range(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::ZeroCount, "no samples");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (!(*mx > *mn)) throw Error(ErrorCode::DegenerateRange, "all samples are equal");
  const double pad = 0.05 * (*mx - *mn);
  return {*mn - pad, *mx + pad};
}

std::pair<double, double> common_range(std::span<const double> a, std::span<const double> b) {
  std::vector<double> both(a.begin(), a.end());
  both.insert(both.end(), b.begin(), b.end());
  return padded_range(both);
}

DensityGrid histogram(std::span<const double> samples, std::size_t n_bins, double lo, double hi) {
  if (n_bins < 1) throw Error(ErrorCode::ZeroCount, "n_bins must be >= 1");
  if (!(hi > lo)) throw Error(ErrorCode::DegenerateRange, "empty histogram range");
  DensityGrid g;
  g.lower = lo;
  g.width = (hi - lo) / static_cast<double>(n_bins);
  std::vector<std::size_t> counts(n_bins, 0);
  std::size_t inside = 0;
  for (double x : samples) {
    if (!(x >= lo && x <= hi)) continue;
    auto bin = static_cast<std::size_t>((x - lo) / g.width);
    if (bin >= n_bins) bin = n_bins - 1;
    ++counts[bin];
    ++inside;
  }
  if (inside == 0) throw Error(ErrorCode::ZeroCount, "no samples inside the histogram range");
  g.density.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    g.density[b] = static_cast<double>(counts[b]) / (static_cast<double>(inside) * g.width);
  }
  return g;
}

DensityGrid density_of(const std::string& coefficient, std::span<const double> samples, std::size_t n_bins) {
  if (n_bins < 2) throw Error(ErrorCode::InvalidSpec, "n_bins must be >= 2");
  if (samples.empty()) throw Error(ErrorCode::ZeroCount, "no samples");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  DensityGrid g;
  if (!(*mx > *mn)) {
    g.lower = *mn - 0.5;
    g.width = 1.0;
    g.density = {1.0};
    g.spike = true;
  } else {
    const auto [lo, hi] = padded_range(samples);
    g = histogram(samples, n_bins, lo, hi);
  }
  g.coefficient = coefficient;
  return g;
}

std::vector<DensityGrid> density_grid(const UnconditionalDraws& draws, std::size_t n_bins) {
  std::vector<DensityGrid> out;
  for (const auto& c : draws.coefficients) out.push_back(density_of(c.coefficient, c.values, n_bins));
  return out;
}

DensityGrid resample_grid(const DensityGrid& grid, const DensityGrid& target) {
  DensityGrid out = target;
  out.coefficient = grid.coefficient;
  std::fill(out.density.begin(), out.density.end(), 0.0);
  if (grid.spike) {
    out.spike = target.spike;
    const double x = grid.center(0);
    if (target.spike) {
      out.density[0] = x == target.center(0) ? 1.0 : 0.0;
    } else if (x >= target.lower && x <= target.upper()) {
      auto bin = static_cast<std::size_t>((x - target.lower) / target.width);
      out.density[std::min(bin, target.n_bins() - 1)] = 1.0 / target.width;
    }
    return out;
  }
  out.spike = false;
  for (std::size_t t = 0; t < target.n_bins(); ++t) {
    const double tl = target.lower + static_cast<double>(t) * target.width;
    const double tu = tl + target.width;
    double mass = 0.0;
    for (std::size_t s = 0; s < grid.n_bins(); ++s) {
      const double sl = grid.lower + static_cast<double>(s) * grid.width;
      const double overlap = std::min(tu, sl + grid.width) - std::max(tl, sl);
      if (overlap > 0.0) mass += grid.density[s] * overlap;
    }
    out.density[t] = mass / target.width;
  }
  return out;
}

double recovery_score(const DensityGrid& estimated, const DensityGrid& truth) {
  if (estimated.spike || truth.spike) {
    if (estimated.spike && truth.spike && estimated.center(0) == truth.center(0)) return 0.0;
    return 2.0;
  }
  const double tol = 1e-9 * std::max({1.0, std::abs(estimated.lower), std::abs(estimated.upper())});
  if (estimated.n_bins() != truth.n_bins() || std::abs(estimated.lower - truth.lower) > tol ||
      std::abs(estimated.width - truth.width) > tol) {
    throw Error(ErrorCode::GridMismatch, "density grids use different bins");
  }
  double l1 = 0.0;
  for (std::size_t b = 0; b < estimated.n_bins(); ++b) l1 += std::abs(estimated.density[b] - truth.density[b]);
  return l1 * estimated.width;
}

double recovery_score(std::span<const double> estimated, std::span<const double> truth, std::size_t n_bins) {
  const auto [lo, hi] = common_range(estimated, truth);
  return recovery_score(histogram(estimated, n_bins, lo, hi), histogram(truth, n_bins, lo, hi));
}

}  // namespace mixl
