#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mixl {

enum class DatasetMode { StatedPanel, RpPair };

struct Alternative {
  std::string label;
  /// Aligned with ChoiceDataset::attribute_names. Categorical attributes hold a level index.
  std::vector<double> x;

  bool operator==(const Alternative&) const = default;
};

struct Task {
  std::vector<Alternative> alternatives;
  std::size_t chosen = 0;

  bool operator==(const Task&) const = default;
};

struct PanelPerson {
  std::string id;
  std::vector<Task> tasks;
  /// Person-level values; in rp_pair mode this holds the outcome indicators and Z_n.
  std::map<std::string, double> covariates;

  bool operator==(const PanelPerson&) const = default;
};

/// Long-format panel of persons x tasks x alternatives. Treated as immutable once built.
struct ChoiceDataset {
  std::vector<PanelPerson> persons;
  std::vector<std::string> attribute_names;
  /// One entry per attribute: empty for numeric columns, level names (first-appearance order)
  /// for categorical columns.
  std::vector<std::vector<std::string>> attribute_levels;
  /// Distinct alternative labels in order of first appearance.
  std::vector<std::string> alternative_labels;
  std::vector<std::string> covariate_names;
  DatasetMode mode = DatasetMode::StatedPanel;

  bool operator==(const ChoiceDataset&) const = default;

  /// Throws UnknownAttribute.
  std::size_t attribute_index(const std::string& name) const;
  bool is_categorical(std::size_t attribute) const { return !attribute_levels[attribute].empty(); }
  std::size_t n_tasks() const;
};

/// Checks the panel invariants; throws the matching data error.
void validate(const ChoiceDataset& dataset);

struct LongCsvSchema {
  std::string person = "person";
  std::string task = "task";
  std::string alternative = "alternative";
  std::string chosen = "chosen";
  std::vector<std::string> attributes;
  /// Subset of `attributes` whose cells are level names rather than numbers.
  std::vector<std::string> categorical;
};

ChoiceDataset load_long_csv(const std::filesystem::path& path, const LongCsvSchema& schema);

/// Inverse of load_long_csv: one row per alternative, categorical cells written as level names.
std::string to_long_csv(const ChoiceDataset& dataset, const LongCsvSchema& schema = {});
void write_long_csv(const ChoiceDataset& dataset, const std::filesystem::path& path,
                    const LongCsvSchema& schema = {});

/// Revealed-preference file: one row per person with two 0/1 outcome columns and covariates.
struct RpCsvSchema {
  std::string person = "person";
  std::string cig = "cig";
  std::string ecig = "ecig";
  std::vector<std::string> covariates;
};

/// Outcome indicators are stored as covariates named "c" and "e".
ChoiceDataset load_rp_csv(const std::filesystem::path& path, const RpCsvSchema& schema);

inline constexpr const char* kCigIndicator = "c";
inline constexpr const char* kEcigIndicator = "e";

struct CodingRule {
  enum class Kind { Continuous, Dummy };
  std::string attribute;
  Kind kind = Kind::Continuous;
  std::string reference;
};

using CodingPlan = std::vector<CodingRule>;

/// Name of the indicator column emitted for `level` of a dummy-coded attribute.
std::string dummy_column_name(const std::string& attribute, const std::string& level);

/// Replaces each dummy-coded attribute with L-1 indicator columns in place.
ChoiceDataset apply_coding(const ChoiceDataset& dataset, const CodingPlan& plan);

}  // namespace mixl
