#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace physid {

enum class Errc {
  FileNotFound,
  MalformedMesh,
  DegenerateMesh,
  NonFiniteInput,
  NonFiniteState,
  InvalidParameter,
  EmptyMask,
  InvalidImage,
  ClientUnavailable,
  ResponseParseFailure,
  StageTimeout,
  InconsistentResult,
  EmptyInput,
  WeightMismatch,
  DimensionMismatch,
  MalformedMessage,
  SessionLimitExceeded,
};

std::string_view to_string(Errc code);

// Single exception type for the engine; callers switch on code().
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code),
        detail_(detail) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
  Errc code_;
  std::string detail_;
};

} // namespace physid
