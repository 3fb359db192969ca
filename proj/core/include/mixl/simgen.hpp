#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mixl/data.hpp"
#include "mixl/draws.hpp"
#include "mixl/mixing.hpp"
#include "mixl/models.hpp"
#include "mixl/postest.hpp"

namespace mixl {

struct NormalComponent {
  double weight = 1.0;
  double mean = 0.0;
  double sd = 1.0;
};

/// Generating distribution of one coefficient: a library family at fixed parameters, or a
/// finite normal mixture when `mixture` is non-empty.
struct TrueDistribution {
  MixingSpec mixing;
  std::vector<double> params;
  std::vector<NormalComponent> mixture;

  const std::string& coefficient() const { return mixing.coefficient; }
  double sample(Rng& rng) const;
  double mean() const;
};

struct SimAttribute {
  std::string name;
  /// Level names for categorical attributes; empty for numeric ones.
  std::vector<std::string> levels;
  /// Numeric levels; for categorical attributes, unused.
  std::vector<double> values;
  /// Reference level of a categorical attribute; the others become dummy columns.
  std::string reference;
};

struct SimConfig {
  std::size_t n_persons = 1000;
  std::size_t n_tasks = 10;
  std::uint64_t seed = 1;
  /// Alternative labels per task; a "branded" 0/1 attribute marks labels equal to "branded".
  std::vector<std::string> alternatives{"branded", "branded", "unbranded", "unbranded"};
  std::vector<SimAttribute> attributes;
  /// One entry per utility coefficient: "branded" and the coded attribute columns.
  std::vector<TrueDistribution> truth;
};

/// Country {domestic, foreign}, characteristic {standard, fast_acting, double_strength},
/// side_effects {1, 2, 3, 4}, price {2, 4, 6, 8, 10}.
std::vector<SimAttribute> default_attributes();

/// Implementation-defined generating distributions:
///   branded                         0.5 N(-1, 0.5^2) + 0.5 N(1, 0.5^2)
///   country_foreign                 N(-0.8, 0.6^2)
///   characteristic_fast_acting      U(0.2, 1.4)
///   characteristic_double_strength  N(0.5, 0.4^2)
///   side_effects                    asymmetric triangular on [-1.5, 0], mode -0.25
///   price                           -exp(N(ln 0.2, 0.5^2))
std::vector<TrueDistribution> default_truth();

SimConfig default_sim_config(std::uint64_t seed = 1);

/// Coded utility columns in coefficient order, e.g. branded, country_foreign, ...
std::vector<std::string> coded_columns(const SimConfig& config);

/// Schema and coding that load the generated CSV back into the estimation columns.
LongCsvSchema sim_schema(const SimConfig& config);
CodingPlan sim_coding(const SimConfig& config);

/// Preference-space spec with one term per coded column, all following the family override.
ModelSpec sim_model_spec(const SimConfig& config, Family family = Family::Normal);
/// WTP-space spec: negative lognormal price, `family` for the other terms.
ModelSpec sim_wtp_spec(const SimConfig& config, Family family = Family::Normal);

struct SimOutput {
  /// Raw dataset with categorical attributes (what the CSV holds).
  ChoiceDataset dataset;
  /// Per-person coefficients, person-major, aligned with `coded_columns`.
  std::vector<std::vector<double>> betas;
  std::vector<std::string> coefficient_names;
};

/// Throws InvalidLevels on empty level sets, InvalidSpec when the truth does not cover
/// every coded column.
SimOutput generate(const SimConfig& config);

/// person,<coefficient...>
std::string truth_table_csv(const SimOutput& out);

/// Fresh samples of each true distribution, for density comparison.
UnconditionalDraws sample_truth(const SimConfig& config, std::size_t n_samples, std::uint64_t seed);

/// coefficient,bin,center,lower,upper,density
std::string density_csv(const std::vector<DensityGrid>& grids);

}  // namespace mixl
