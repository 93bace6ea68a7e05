#include "common/errors.hpp"

namespace dcmsg {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::AllRowsDeleted: return "AllRowsDeleted";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IncompleteData: return "IncompleteData";
    case ErrorCode::NonPositiveForLog: return "NonPositiveForLog";
    case ErrorCode::NonFiniteUtility: return "NonFiniteUtility";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::NoCostCoefficient: return "NoCostCoefficient";
    case ErrorCode::TooFewModels: return "TooFewModels";
    case ErrorCode::NoLatentClassModels: return "NoLatentClassModels";
    case ErrorCode::UnknownDataset: return "UnknownDataset";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::UnknownModelId: return "UnknownModelId";
    case ErrorCode::ModelPending: return "ModelPending";
    case ErrorCode::EmptyReport: return "EmptyReport";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::NoTransitions: return "NoTransitions";
    case ErrorCode::NoModels: return "NoModels";
    case ErrorCode::DegenerateGroups: return "DegenerateGroups";
  }
  return "Unknown";
}

}  // namespace dcmsg
