#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dcmsg {

// Every fault raised by the core carries one of these codes. The C API maps
// them one-to-one onto dcm_status values, the HTTP layer onto status codes.
enum class ErrorCode {
  InvalidArgument,
  Io,
  MalformedFile,
  EmptyDataset,
  UnknownVariable,
  ArityMismatch,
  ZeroVariance,
  AllRowsDeleted,
  UnknownTask,
  InvalidConfig,
  InvalidSpec,
  IncompleteData,
  NonPositiveForLog,
  NonFiniteUtility,
  NonFiniteObjective,
  SingularHessian,
  NoCostCoefficient,
  TooFewModels,
  NoLatentClassModels,
  UnknownDataset,
  UnknownSession,
  SessionClosed,
  UnknownAction,
  UnknownModelId,
  ModelPending,
  EmptyReport,
  SchemaMismatch,
  NoTransitions,
  NoModels,
  DegenerateGroups,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace dcmsg
