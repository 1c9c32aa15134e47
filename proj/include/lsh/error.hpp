#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lsh {

enum class ErrorKind {
  InvalidArgument,
  EmptyInput,
  SelfLoop,
  NodeOutOfRange,
  NegativeTime,
  SamePair,
  EndBeforeHistory,
  NonFinite,
  DimensionTooLarge,
  ZeroSlope,
  ShapeMismatch,
  UnstableProcess,
  TooFewEvents,
  EmptyTest,
  SingleClass,
  WindowTooLarge,
  ParseError,
  Io,
  DegenerateTimes,
  SchemaVersionMismatch,
  DimensionNot2,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the ErrorKind variants.
/// `index` holds the offending position (event index, line number, pair
/// index) when the variant has one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
};

}  // namespace lsh
