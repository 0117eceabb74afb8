#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lessketch {

enum class Errc {
  NotPositiveDefinite,
  RankDeficient,
  LengthNotPowerOfTwo,
  SketchTooLarge,
  SketchSmallerThanD,
  ZeroProbabilityRow,
  AllReplicasFailed,
  DimensionMismatch,
  LawNotIndependent,
  ConditioningTooRare,
  BaselineDiverged,
  ShapeInvalid,
  InvalidArgument,
  ParseError,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::LengthNotPowerOfTwo: return "LengthNotPowerOfTwo";
    case Errc::SketchTooLarge: return "SketchTooLarge";
    case Errc::SketchSmallerThanD: return "SketchSmallerThanD";
    case Errc::ZeroProbabilityRow: return "ZeroProbabilityRow";
    case Errc::AllReplicasFailed: return "AllReplicasFailed";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::LawNotIndependent: return "LawNotIndependent";
    case Errc::ConditioningTooRare: return "ConditioningTooRare";
    case Errc::BaselineDiverged: return "BaselineDiverged";
    case Errc::ShapeInvalid: return "ShapeInvalid";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool condition, Errc code, const char* message) {
  if (!condition) throw Error(code, message);
}

}  // namespace lessketch
