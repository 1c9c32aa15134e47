#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lsh/core.hpp"

namespace lsh::cli {

/// Parses "3600", "90s", "15m", "8h", "243d", "2w", "1y" into seconds.
double parse_duration_seconds(const std::string &text);

/// Comma-separated decays. A token is either a positive number (a decay in
/// model time units) or a time-scale name (second, minute, hour, day, week,
/// month, year). Names become 1 / (scale in model units), which requires the
/// real-world duration covered by `span_units` model time units.
KernelSpec parse_kernel(const std::string &text, std::optional<double> duration_seconds,
                        double span_units);

/// Entry point behind the `lsh` executable. Returns the process exit code;
/// errors go to stderr as "error [Variant]: message".
int run(const std::vector<std::string> &args);

}  // namespace lsh::cli
