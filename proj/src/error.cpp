#include "lsh/error.hpp"

namespace lsh {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::NodeOutOfRange: return "NodeOutOfRange";
    case ErrorKind::NegativeTime: return "NegativeTime";
    case ErrorKind::SamePair: return "SamePair";
    case ErrorKind::EndBeforeHistory: return "EndBeforeHistory";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::ZeroSlope: return "ZeroSlope";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::UnstableProcess: return "UnstableProcess";
    case ErrorKind::TooFewEvents: return "TooFewEvents";
    case ErrorKind::EmptyTest: return "EmptyTest";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::Io: return "Io";
    case ErrorKind::DegenerateTimes: return "DegenerateTimes";
    case ErrorKind::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorKind::DimensionNot2: return "DimensionNot2";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string &message,
             std::optional<std::size_t> index)
    : std::runtime_error(message), kind_(kind), index_(index) {}

}  // namespace lsh
