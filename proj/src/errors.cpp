#include "physid/errors.hpp"

namespace physid {

std::string_view to_string(Errc code) {
  switch (code) {
  case Errc::FileNotFound: return "FileNotFound";
  case Errc::MalformedMesh: return "MalformedMesh";
  case Errc::DegenerateMesh: return "DegenerateMesh";
  case Errc::NonFiniteInput: return "NonFiniteInput";
  case Errc::NonFiniteState: return "NonFiniteState";
  case Errc::InvalidParameter: return "InvalidParameter";
  case Errc::EmptyMask: return "EmptyMask";
  case Errc::InvalidImage: return "InvalidImage";
  case Errc::ClientUnavailable: return "ClientUnavailable";
  case Errc::ResponseParseFailure: return "ResponseParseFailure";
  case Errc::StageTimeout: return "StageTimeout";
  case Errc::InconsistentResult: return "InconsistentResult";
  case Errc::EmptyInput: return "EmptyInput";
  case Errc::WeightMismatch: return "WeightMismatch";
  case Errc::DimensionMismatch: return "DimensionMismatch";
  case Errc::MalformedMessage: return "MalformedMessage";
  case Errc::SessionLimitExceeded: return "SessionLimitExceeded";
  }
  return "Unknown";
}

} // namespace physid
