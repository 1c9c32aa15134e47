#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lsh/core.hpp"
#include "lsh/estimation.hpp"

namespace lsh {

/// How to read an event table.
struct DatasetManifest {
  std::filesystem::path path;
  std::array<int, 3> columns{0, 1, 2};  // sender, receiver, time
  char delimiter{','};
  /// Affine rescaling of the times onto [0, target]; unset keeps raw times.
  std::optional<double> rescale_target{1000.0};
};

struct RescaleInfo {
  double t_min{0.0};
  double t_max{0.0};
  double target{1000.0};
};

struct Dataset {
  EventSequence events;
  std::vector<std::string> labels;  // labels[id] is the original node name
  std::optional<RescaleInfo> rescale;
};

/// Parses `sender<delim>receiver<delim>time` rows. A first row whose time
/// field is not numeric is treated as a header. Node labels get dense ids in
/// sorted order (numeric order when every label is an integer). Errors name
/// the 1-based line: ParseError for malformed rows, SelfLoop, NegativeTime.
Dataset read_events(const DatasetManifest &manifest);

/// Same as read_events on in-memory text; `source` only labels messages.
Dataset parse_events(const std::string &text, const DatasetManifest &manifest,
                     const std::string &source = "<memory>");

/// t -> target (t - t_min) / (t_max - t_min); the horizon becomes target.
/// DegenerateTimes when all times coincide. Identity if the events already
/// span exactly [0, target].
EventSequence rescale_times(const EventSequence &events, double target);

/// Writes sender,receiver,time rows with a header, using the labels if given.
void write_events_csv(const std::filesystem::path &path, const EventSequence &events,
                      const std::vector<std::string> &labels = {});

/// Provenance of a fit stored next to the numbers.
struct DatasetInfo {
  std::string source;
  std::vector<std::string> labels;
  std::optional<RescaleInfo> rescale;
  std::optional<double> duration;  // real-world span the kernel names refer to
  double train_fraction{1.0};
  double horizon{0.0};
};

struct FitDocument {
  FitResult result;
  KernelSpec kernel;
  FitConfig config;
  std::optional<DatasetInfo> dataset;
};

inline constexpr const char *kFitSchema = "lsh-fit/1";
inline constexpr const char *kEvalSchema = "lsh-eval/1";

/// Canonical JSON with shortest round-trip decimals, so reading it back
/// reproduces every double bit for bit.
nlohmann::json fit_to_json(const FitDocument &doc);
/// SchemaVersionMismatch (with the JSON path) on a wrong schema tag or a
/// missing / mistyped field.
FitDocument fit_from_json(const nlohmann::json &j);

void write_fit(const std::filesystem::path &path, const FitDocument &doc);
FitDocument read_fit(const std::filesystem::path &path);

/// Writes `body` with a "schema" member prepended, pretty-printed.
void write_json(const std::filesystem::path &path, const nlohmann::json &body);
nlohmann::json read_json(const std::filesystem::path &path);

std::string slope_name(SlopeConstraint c);          // "pos" | "neg" | "free"
SlopeConstraint parse_slope(const std::string &s);  // InvalidArgument otherwise
std::string mode_name(IntegrationMode m);           // "horizon" | "paper"
IntegrationMode parse_mode(const std::string &s);

/// Standalone SVG (800 x 800, 40 px margin). Points are mapped by one uniform
/// scale s = 720 / max(x range, y range) and centered, with y pointing up:
/// px = 40 + (x - x_min) s + (720 - x_range s) / 2,
/// py = 760 - (y - y_min) s - (720 - y_range s) / 2.
/// Highlighted pairs are drawn as lines under the points. DimensionNot2 unless
/// Z has two columns.
std::string render_latent_scatter(const Eigen::MatrixXd &z,
                                  const std::vector<std::string> &labels,
                                  const std::vector<std::pair<NodeId, NodeId>> &highlights);
void emit_latent_scatter(const Eigen::MatrixXd &z, const std::vector<std::string> &labels,
                         const std::vector<std::pair<NodeId, NodeId>> &highlights,
                         const std::filesystem::path &path);

}  // namespace lsh
