#include "mixl/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mixl/errors.hpp"
#include "mixl/io.hpp"

namespace mixl {

double TrueDistribution::sample(Rng& rng) const {
  if (!mixture.empty()) {
    const double u = rng.uniform();
    double acc = 0.0;
    const NormalComponent* pick = &mixture.back();
    for (const auto& c : mixture) {
      acc += c.weight;
      if (u <= acc) {
        pick = &c;
        break;
      }
    }
    return pick->mean + pick->sd * rng.std_normal();
  }
  if (mixing.family == Family::Fixed) return params.at(0);
  const double u1 = rng.uniform();
  const double u2 = draw_dims(mixing.family) > 1 ? rng.uniform() : 0.0;
  if (draw_kind(mixing.family) == DrawKind::StdNormal) return transform(mixing, params, inverse_normal_cdf(u1));
  return transform(mixing, params, u1, u2);
}

double TrueDistribution::mean() const {
  if (!mixture.empty()) {
    double m = 0.0;
    for (const auto& c : mixture) m += c.weight * c.mean;
    return m;
  }
  return analytic_mean(mixing, params);
}

std::vector<SimAttribute> default_attributes() {
  return {
      {"country", {"domestic", "foreign"}, {}, "domestic"},
      {"characteristic", {"standard", "fast_acting", "double_strength"}, {}, "standard"},
      {"side_effects", {}, {1, 2, 3, 4}, ""},
      {"price", {}, {2, 4, 6, 8, 10}, ""},
  };
}

std::vector<TrueDistribution> default_truth() {
  std::vector<TrueDistribution> t;
  t.push_back({{"branded", Family::Normal}, {}, {{0.5, -1.0, 0.5}, {0.5, 1.0, 0.5}}});
  t.push_back({{"country_foreign", Family::Normal}, {-0.8, 0.6}, {}});
  t.push_back({{"characteristic_fast_acting", Family::Uniform}, {0.2, 1.2}, {}});
  t.push_back({{"characteristic_double_strength", Family::Normal}, {0.5, 0.4}, {}});
  t.push_back({{"side_effects", Family::AsymTriangular}, {-1.5, 0.0, 0.5}, {}});
  t.push_back({{"price", Family::Lognormal}, {std::log(0.2), 0.5}, {}});
  return t;
}

SimConfig default_sim_config(std::uint64_t seed) {
  SimConfig c;
  c.seed = seed;
  c.attributes = default_attributes();
  c.truth = default_truth();
  return c;
}

std::vector<std::string> coded_columns(const SimConfig& config) {
  std::vector<std::string> cols{"branded"};
  for (const auto& a : config.attributes) {
    if (a.levels.empty()) {
      cols.push_back(a.name);
      continue;
    }
    for (const auto& l : a.levels) {
      if (l != a.reference) cols.push_back(dummy_column_name(a.name, l));
    }
  }
  return cols;
}

LongCsvSchema sim_schema(const SimConfig& config) {
  LongCsvSchema s;
  s.attributes.push_back("branded");
  for (const auto& a : config.attributes) {
    s.attributes.push_back(a.name);
    if (!a.levels.empty()) s.categorical.push_back(a.name);
  }
  return s;
}

CodingPlan sim_coding(const SimConfig& config) {
  CodingPlan plan;
  for (const auto& a : config.attributes) {
    if (!a.levels.empty()) plan.push_back({a.name, CodingRule::Kind::Dummy, a.reference});
  }
  return plan;
}

namespace {

const TrueDistribution* find_truth(const SimConfig& config, const std::string& name) {
  for (const auto& t : config.truth) {
    if (t.coefficient() == name) return &t;
  }
  return nullptr;
}

bool is_price(const std::string& name) { return name == "price"; }

ModelSpec build_spec(const SimConfig& config, Family family, bool wtp) {
  ModelSpec spec;
  spec.space = wtp ? Space::Wtp : Space::Preference;
  for (const auto& col : coded_columns(config)) {
    CoefficientSpec c;
    c.attribute = col;
    c.mixing.coefficient = col;
    c.mixing.family = family;
    const TrueDistribution* t = find_truth(config, col);
    const double mean = t ? t->mean() : 0.0;
    // Sign of the support for the one-signed families: the expected sign of the preference,
    // flipped in WTP space where the (negative) price coefficient scales every term.
    c.mixing.positive = wtp ? mean < 0.0 : mean >= 0.0;
    if (wtp && is_price(col)) {
      c.mixing.family = Family::Lognormal;
      c.mixing.positive = false;
      c.follow_family = false;
      spec.price_coefficient = col;
    }
    spec.coefficients.push_back(c);
  }
  return spec;
}

}  // namespace

ModelSpec sim_model_spec(const SimConfig& config, Family family) { return build_spec(config, family, false); }

ModelSpec sim_wtp_spec(const SimConfig& config, Family family) { return build_spec(config, family, true); }

SimOutput generate(const SimConfig& config) {
  if (config.n_persons == 0 || config.n_tasks == 0 || config.alternatives.size() < 2) {
    throw Error(ErrorCode::InvalidLevels, "simulation needs persons, tasks and at least two alternatives");
  }
  for (const auto& a : config.attributes) {
    if (a.levels.empty() && a.values.empty()) throw Error(ErrorCode::InvalidLevels, "attribute '" + a.name + "' has no levels");
    if (!a.levels.empty() && std::find(a.levels.begin(), a.levels.end(), a.reference) == a.levels.end()) {
      throw Error(ErrorCode::InvalidLevels, "attribute '" + a.name + "' has no level '" + a.reference + "'");
    }
  }
  const auto cols = coded_columns(config);
  std::vector<const TrueDistribution*> truth;
  for (const auto& c : cols) {
    const TrueDistribution* t = find_truth(config, c);
    if (!t) throw Error(ErrorCode::InvalidSpec, "no true distribution for '" + c + "'");
    truth.push_back(t);
  }

  SimOutput out;
  out.coefficient_names = cols;
  ChoiceDataset& ds = out.dataset;
  ds.attribute_names.push_back("branded");
  ds.attribute_levels.emplace_back();
  for (const auto& a : config.attributes) {
    ds.attribute_names.push_back(a.name);
    ds.attribute_levels.push_back(a.levels);
  }
  for (const auto& l : config.alternatives) {
    if (std::find(ds.alternative_labels.begin(), ds.alternative_labels.end(), l) == ds.alternative_labels.end()) {
      ds.alternative_labels.push_back(l);
    }
  }

  Rng rng(config.seed);
  const std::size_t J = config.alternatives.size();
  std::vector<double> v(J);
  for (std::size_t n = 0; n < config.n_persons; ++n) {
    std::vector<double> beta;
    for (const auto* t : truth) beta.push_back(t->sample(rng));
    PanelPerson person;
    person.id = std::to_string(n + 1);
    for (std::size_t t = 0; t < config.n_tasks; ++t) {
      Task task;
      for (std::size_t j = 0; j < J; ++j) {
        Alternative alt;
        alt.label = config.alternatives[j];
        const double branded = alt.label == "branded" ? 1.0 : 0.0;
        alt.x.push_back(branded);
        double util = beta[0] * branded;
        std::size_t col = 1;
        for (const auto& a : config.attributes) {
          if (a.levels.empty()) {
            const double x = a.values[rng.index(a.values.size())];
            alt.x.push_back(x);
            util += beta[col++] * x;
            continue;
          }
          const std::size_t li = rng.index(a.levels.size());
          alt.x.push_back(static_cast<double>(li));
          for (const auto& l : a.levels) {
            if (l == a.reference) continue;
            if (l == a.levels[li]) util += beta[col];
            ++col;
          }
        }
        v[j] = util;
        task.alternatives.push_back(std::move(alt));
      }
      const auto p = mnl_prob(v);
      const double u = rng.uniform();
      double acc = 0.0;
      task.chosen = J - 1;
      for (std::size_t j = 0; j < J; ++j) {
        acc += p[j];
        if (u <= acc) {
          task.chosen = j;
          break;
        }
      }
      person.tasks.push_back(std::move(task));
    }
    ds.persons.push_back(std::move(person));
    out.betas.push_back(std::move(beta));
  }
  validate(ds);
  return out;
}

std::string truth_table_csv(const SimOutput& out) {
  std::string s = "person";
  for (const auto& c : out.coefficient_names) s += "," + c;
  s += "\n";
  for (std::size_t n = 0; n < out.betas.size(); ++n) {
    s += out.dataset.persons[n].id;
    for (double b : out.betas[n]) s += "," + io::format_double(b);
    s += "\n";
  }
  return s;
}

UnconditionalDraws sample_truth(const SimConfig& config, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw Error(ErrorCode::ZeroCount, "n_samples must be >= 1");
  UnconditionalDraws out{"truth", n_samples, {}};
  for (const auto& t : config.truth) out.coefficients.push_back({t.coefficient(), {}});
  Rng rng(seed);
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (std::size_t k = 0; k < config.truth.size(); ++k) out.coefficients[k].values.push_back(config.truth[k].sample(rng));
  }
  return out;
}

std::string density_csv(const std::vector<DensityGrid>& grids) {
  std::string s = "coefficient,bin,center,lower,upper,density\n";
  for (const auto& g : grids) {
    for (std::size_t b = 0; b < g.n_bins(); ++b) {
      const double lo = g.lower + static_cast<double>(b) * g.width;
      s += io::csv_field(g.coefficient) + "," + std::to_string(b) + "," + io::format_double(g.center(b)) + "," +
           io::format_double(lo) + "," + io::format_double(lo + g.width) + "," + io::format_double(g.density[b]) + "\n";
    }
  }
  return s;
}

}  // namespace mixl
