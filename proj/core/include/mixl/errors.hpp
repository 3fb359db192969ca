#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixl {

enum class ErrorCode {
  // data
  MissingColumn,
  NonNumericAttribute,
  MissingAttributeValue,
  TaskWithoutChoice,
  TaskWithMultipleChoices,
  TooFewAlternatives,
  DuplicatePerson,
  UnknownLevel,
  UnknownAttribute,
  MissingIndicator,
  InvalidLevels,
  Io,
  // draws / mixing
  ZeroCount,
  WrongKind,
  ArityMismatch,
  WrongDrawKind,
  DegenerateSupport,
  ModeOutOfSupport,
  // models
  InvalidSpec,
  MissingCoefficient,
  DrawDimensionMismatch,
  SpecDataMismatch,
  // estimation
  NonFiniteObjectiveAtStart,
  NoImprovingStep,
  // averaging
  PersonSetMismatch,
  MissingPersonLikelihoods,
  NonPositiveLikelihood,
  TooFewModels,
  ConstituentMismatch,
  // post-estimation
  NotWTPSpace,
  DegenerateRange,
  GridMismatch,
  // artifacts / cli
  InvalidArtifact,
  Usage,
};

std::string_view to_string(ErrorCode code);

/// Coarse grouping used to pick process exit codes.
enum class ErrorCategory { Usage, Data, Estimation };

ErrorCategory category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mixl
