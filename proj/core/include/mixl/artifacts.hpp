#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mixl/averaging.hpp"
#include "mixl/data.hpp"
#include "mixl/estimation.hpp"
#include "mixl/models.hpp"

namespace mixl {

inline constexpr int kSchemaVersion = 1;

/// How to read a dataset: the column layout plus the coding applied after loading.
struct DataSource {
  DatasetMode mode = DatasetMode::StatedPanel;
  LongCsvSchema long_schema;
  RpCsvSchema rp_schema;
  CodingPlan coding;
};

/// Model spec file: data layout, coding and coefficients.
struct ModelConfig {
  DataSource data;
  ModelSpec spec;
};

/// Throws InvalidArtifact on malformed or wrong-version documents and InvalidSpec on bad model terms.
ModelConfig parse_model_config(const std::string& json_text);
std::string model_config_json(const ModelConfig& config);
ModelConfig load_model_config(const std::filesystem::path& path);

/// Loads and codes the dataset described by `source`.
ChoiceDataset load_dataset(const std::filesystem::path& path, const DataSource& source);

struct FitArtifact {
  FitResult fit;
  std::optional<DataSource> data;
};

std::string fit_json(const FitResult& fit, const std::optional<DataSource>& data = std::nullopt);
FitArtifact parse_fit(const std::string& json_text);
void write_fit(const std::filesystem::path& path, const FitResult& fit,
               const std::optional<DataSource>& data = std::nullopt);
FitArtifact read_fit(const std::filesystem::path& path);

std::string ma_json(const MAResult& ma);
MAResult parse_ma(const std::string& json_text);
void write_ma(const std::filesystem::path& path, const MAResult& ma);
MAResult read_ma(const std::filesystem::path& path);

/// "fit" or "ma", from the artifact's "kind" field. Throws InvalidArtifact.
std::string artifact_kind(const std::filesystem::path& path);

}  // namespace mixl
