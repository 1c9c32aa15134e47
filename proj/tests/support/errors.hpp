#pragma once

#include <optional>

#include "lsh/error.hpp"

namespace lsh::testing {

/// The ErrorKind thrown by `fn`, or nullopt if it returned normally.
template <typename Fn>
std::optional<ErrorKind> error_kind(Fn &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace lsh::testing
