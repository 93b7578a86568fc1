#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phosml {

enum class Errc {
  Io,
  Parse,
  Config,
  MissingColumn,
  BadLevel,
  OutOfRange,
  DuplicateId,
  MissingTarget,
  EmptyMatrix,
  TooFewSamples,
  KTooLarge,
  InvalidParam,
  SingularKernel,
  NonFinite,
  ColumnMismatch,
  Unsupported,
  EmptyFold,
  LengthMismatch,
  ConstantTruth,
  NonPositive,
  NonPositiveFrequency,
  VersionMismatch,
};

std::string_view errc_name(Errc code);

// All library failures are reported through this type; code() is stable and
// what() names the offending row/column/parameter where one exists.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace phosml
