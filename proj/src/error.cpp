#include "phosml/error.hpp"

namespace phosml {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
    case Errc::Config: return "Config";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::BadLevel: return "BadLevel";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::MissingTarget: return "MissingTarget";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::InvalidParam: return "InvalidParam";
    case Errc::SingularKernel: return "SingularKernel";
    case Errc::NonFinite: return "NonFinite";
    case Errc::ColumnMismatch: return "ColumnMismatch";
    case Errc::Unsupported: return "Unsupported";
    case Errc::EmptyFold: return "EmptyFold";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ConstantTruth: return "ConstantTruth";
    case Errc::NonPositive: return "NonPositive";
    case Errc::NonPositiveFrequency: return "NonPositiveFrequency";
    case Errc::VersionMismatch: return "VersionMismatch";
  }
  return "Unknown";
}

}  // namespace phosml
