#ifndef CARTANKIT_ERROR_HPP
#define CARTANKIT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace cartankit {

enum class ErrorKind {
  NonSquareMatrix,
  DimensionOverflow,
  NotASubalgebra,
  NumericalRankAmbiguity,
  NotAbelian,
  SeedOutsideAlgebra,
  UnknownUnit,
  UnknownArrow,
  NotASubgroupoid,
  InvalidGroupoid,
  InvalidCocycle,
  TwistMismatch,
  DegreeMismatch,
  FactorizationPropertyFails,
  OutsideAmbient,
  NotANormalizer,
  NotRegular,
  NotInvariant,
  NotCovering,
  NonUniquePseudoExpectation,
  NotInDomain,
  NoConditionalExpectation,
  NotAMasa,
  SourceVanishes,
  NotComposable,
  CoverNotCertified,
  IncompleteEnumeration,
  NotNested,
  EnvelopeAbsent,
  InvalidState,
  ParseError,
  InvalidOption,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSquareMatrix: return "NonSquareMatrix";
    case ErrorKind::DimensionOverflow: return "DimensionOverflow";
    case ErrorKind::NotASubalgebra: return "NotASubalgebra";
    case ErrorKind::NumericalRankAmbiguity: return "NumericalRankAmbiguity";
    case ErrorKind::NotAbelian: return "NotAbelian";
    case ErrorKind::SeedOutsideAlgebra: return "SeedOutsideAlgebra";
    case ErrorKind::UnknownUnit: return "UnknownUnit";
    case ErrorKind::UnknownArrow: return "UnknownArrow";
    case ErrorKind::NotASubgroupoid: return "NotASubgroupoid";
    case ErrorKind::InvalidGroupoid: return "InvalidGroupoid";
    case ErrorKind::InvalidCocycle: return "InvalidCocycle";
    case ErrorKind::TwistMismatch: return "TwistMismatch";
    case ErrorKind::DegreeMismatch: return "DegreeMismatch";
    case ErrorKind::FactorizationPropertyFails: return "FactorizationPropertyFails";
    case ErrorKind::OutsideAmbient: return "OutsideAmbient";
    case ErrorKind::NotANormalizer: return "NotANormalizer";
    case ErrorKind::NotRegular: return "NotRegular";
    case ErrorKind::NotInvariant: return "NotInvariant";
    case ErrorKind::NotCovering: return "NotCovering";
    case ErrorKind::NonUniquePseudoExpectation: return "NonUniquePseudoExpectation";
    case ErrorKind::NotInDomain: return "NotInDomain";
    case ErrorKind::NoConditionalExpectation: return "NoConditionalExpectation";
    case ErrorKind::NotAMasa: return "NotAMasa";
    case ErrorKind::SourceVanishes: return "SourceVanishes";
    case ErrorKind::NotComposable: return "NotComposable";
    case ErrorKind::CoverNotCertified: return "CoverNotCertified";
    case ErrorKind::IncompleteEnumeration: return "IncompleteEnumeration";
    case ErrorKind::NotNested: return "NotNested";
    case ErrorKind::EnvelopeAbsent: return "EnvelopeAbsent";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidOption: return "InvalidOption";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cartankit

#endif  // CARTANKIT_ERROR_HPP
