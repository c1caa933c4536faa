#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mimir {

enum class ErrorCode {
  EmptyInput,
  IoError,
  SchemaError,
  EmptyCorpus,
  EngineError,
  EmptyQueue,
  ContractViolation,
  TransportFatal,
  EmptyPage,
  EmptyBenchmark,
  UnknownTag,
  EmptyVocabulary,
  EmptyClass,
  LengthMismatch,
  InvalidSpec,
  RegionMissing,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Domain error carrying a machine-readable code. Per-link crawl failures are
// outcomes, not errors, and never surface as this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mimir
