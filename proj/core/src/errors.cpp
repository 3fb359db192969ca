#include "mixl/errors.hpp"

namespace mixl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonNumericAttribute: return "NonNumericAttribute";
    case ErrorCode::MissingAttributeValue: return "MissingAttributeValue";
    case ErrorCode::TaskWithoutChoice: return "TaskWithoutChoice";
    case ErrorCode::TaskWithMultipleChoices: return "TaskWithMultipleChoices";
    case ErrorCode::TooFewAlternatives: return "TooFewAlternatives";
    case ErrorCode::DuplicatePerson: return "DuplicatePerson";
    case ErrorCode::UnknownLevel: return "UnknownLevel";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::MissingIndicator: return "MissingIndicator";
    case ErrorCode::InvalidLevels: return "InvalidLevels";
    case ErrorCode::Io: return "Io";
    case ErrorCode::ZeroCount: return "ZeroCount";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::WrongDrawKind: return "WrongDrawKind";
    case ErrorCode::DegenerateSupport: return "DegenerateSupport";
    case ErrorCode::ModeOutOfSupport: return "ModeOutOfSupport";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::MissingCoefficient: return "MissingCoefficient";
    case ErrorCode::DrawDimensionMismatch: return "DrawDimensionMismatch";
    case ErrorCode::SpecDataMismatch: return "SpecDataMismatch";
    case ErrorCode::NonFiniteObjectiveAtStart: return "NonFiniteObjectiveAtStart";
    case ErrorCode::NoImprovingStep: return "NoImprovingStep";
    case ErrorCode::PersonSetMismatch: return "PersonSetMismatch";
    case ErrorCode::MissingPersonLikelihoods: return "MissingPersonLikelihoods";
    case ErrorCode::NonPositiveLikelihood: return "NonPositiveLikelihood";
    case ErrorCode::TooFewModels: return "TooFewModels";
    case ErrorCode::ConstituentMismatch: return "ConstituentMismatch";
    case ErrorCode::NotWTPSpace: return "NotWTPSpace";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidArtifact: return "InvalidArtifact";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
      return ErrorCategory::Usage;
    case ErrorCode::NonFiniteObjectiveAtStart:
    case ErrorCode::NoImprovingStep:
    case ErrorCode::NonPositiveLikelihood:
    case ErrorCode::TooFewModels:
      return ErrorCategory::Estimation;
    default:
      return ErrorCategory::Data;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace mixl
