#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixl/data.hpp"
#include "mixl/draws.hpp"
#include "mixl/mixing.hpp"

namespace mixl {

enum class Space { Preference, Wtp };

/// One utility term. Stated data: `attribute` names a dataset column, or it is empty and
/// `asc_label` names the alternative that receives the constant. RP data: `outcome` is
/// "cig" or "ecig" and `attribute` names a covariate (empty for the outcome's constant).
struct CoefficientSpec {
  MixingSpec mixing;
  std::string attribute;
  std::string asc_label;
  std::string outcome;
  /// Whether a family override (e.g. `--family`) applies to this coefficient.
  bool follow_family = true;

  const std::string& name() const { return mixing.coefficient; }
  bool operator==(const CoefficientSpec&) const = default;
};

/// Dual binary logit for revealed cigarette / e-cigarette use with a shared error component.
struct RpBlock {
  std::vector<std::string> covariates;
  bool operator==(const RpBlock&) const = default;
};

struct ModelSpec {
  std::vector<CoefficientSpec> coefficients;
  Space space = Space::Preference;
  /// WTP space only: the coefficient that scales the whole utility; its attribute is the price column.
  std::string price_coefficient;
  std::optional<RpBlock> rp;

  bool operator==(const ModelSpec&) const = default;
};

inline constexpr const char* kRhoParameter = "rho.sigma";

/// Position of every coefficient's parameters and draw dimensions.
struct ParameterLayout {
  std::vector<std::string> names;
  std::vector<std::size_t> offset;     // per coefficient
  std::vector<std::size_t> first_dim;  // per coefficient; npos for fixed
  std::size_t n_dims = 0;
  std::size_t rho_param = static_cast<std::size_t>(-1);
  std::size_t rho_dim = static_cast<std::size_t>(-1);

  std::size_t size() const { return names.size(); }
};

/// Throws InvalidSpec when names repeat, a term is malformed or WTP space lacks a
/// sign-constrained price coefficient.
void validate_spec(const ModelSpec& spec);
ParameterLayout layout(const ModelSpec& spec);
/// Replaces the family of every coefficient with follow_family set.
ModelSpec with_family(const ModelSpec& spec, Family family);
/// Same spec with every coefficient fixed (the MNL special case).
ModelSpec as_fixed(const ModelSpec& spec);

/// MLHS uniform draws for every dimension of a spec plus their normal transform.
struct SimulationDraws {
  std::size_t n_persons = 0;
  std::size_t n_draws = 0;
  std::size_t n_dims = 0;
  DrawBlock uniform;
  DrawBlock normal;
};

/// With no random dimensions the result carries a single empty draw per person.
SimulationDraws make_simulation_draws(const ModelSpec& spec, std::size_t n_persons, std::size_t n_draws,
                                      std::uint64_t seed);

/// Softmax with max-subtraction.
std::vector<double> mnl_prob(std::span<const double> utilities);

/// Utilities of one task given realized coefficients. Throws MissingCoefficient.
std::vector<double> build_utility(const ModelSpec& spec, const std::vector<std::string>& attribute_names,
                                  const Task& task, const std::map<std::string, double>& coeffs);

struct LikelihoodResult {
  double ll = 0.0;
  std::vector<double> person_prob;
  /// Persons whose simulated probability was raised to the 1e-300 floor.
  std::size_t n_floored = 0;
};

inline constexpr double kProbabilityFloor = 1e-300;

struct ShareTable {
  std::vector<std::string> labels;
  std::vector<std::string> groups;
  std::vector<double> shares;
};

/// Dataset and draws bound to a spec; evaluates the simulated likelihood for any parameter vector.
class CompiledModel {
 public:
  /// Throws SpecDataMismatch or DrawDimensionMismatch.
  CompiledModel(const ModelSpec& spec, const ChoiceDataset& dataset, const SimulationDraws& draws);

  LikelihoodResult evaluate(std::span<const double> params) const;
  double log_likelihood(std::span<const double> params) const;
  /// Average simulated probability per alternative label (per outcome for RP data).
  ShareTable shares(std::span<const double> params) const;

  const ParameterLayout& parameter_layout() const { return layout_; }
  std::size_t n_persons() const { return n_persons_; }

 private:
  struct Coef {
    MixingSpec mixing;
    std::size_t offset;
    const double* draws;  // base pointer of the block this coefficient reads, or null
    std::size_t dim;
    std::size_t dims;
  };

  void realize_coefficients(std::span<const double> params, std::size_t person, std::size_t draw,
                            double* beta) const;
  double person_log_prob(std::span<const double> params, std::size_t person, std::vector<double>& scratch) const;

  ModelSpec spec_;
  ParameterLayout layout_;
  std::vector<Coef> coefs_;
  std::size_t n_persons_ = 0;
  std::size_t n_draws_ = 1;
  std::size_t n_dims_ = 0;
  bool rp_ = false;
  std::size_t price_index_ = static_cast<std::size_t>(-1);
  std::vector<std::string> labels_;

  // Stated panel design, flattened: person -> tasks -> alternatives -> K coefficient columns.
  std::vector<std::size_t> person_task_begin_;
  std::vector<std::size_t> task_alt_begin_;
  std::vector<std::size_t> task_chosen_;
  std::vector<std::size_t> alt_label_;
  std::vector<double> design_;

  // RP design: per person two K-vectors (cig, ecig) and the outcome indicators.
  std::vector<double> rp_design_;
  std::vector<double> rp_c_;
  std::vector<double> rp_e_;
  const double* rho_draws_ = nullptr;
};

LikelihoodResult mixed_panel_ll(const ModelSpec& spec, const ChoiceDataset& dataset, const SimulationDraws& draws,
                                std::span<const double> params);
LikelihoodResult rp_pair_ll(const ModelSpec& spec, const ChoiceDataset& dataset, const SimulationDraws& draws,
                            std::span<const double> params);

}  // namespace mixl
