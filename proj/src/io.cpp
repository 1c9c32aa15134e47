#include "lsh/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace lsh {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(std::string_view s) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delimiter, start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

double rescale_value(double t, double t_min, double t_max, double target) {
  if (t_min == 0.0 && t_max == target) return t;
  return target * ((t - t_min) / (t_max - t_min));
}

[[noreturn]] void parse_error(const std::string &source, std::size_t line,
                              const std::string &what, ErrorKind kind = ErrorKind::ParseError) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw Error(kind, msg.str(), line);
}

// Field access that reports the JSON path of whatever is missing.
const json &member(const json &j, const std::string &key, const std::string &path) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorKind::SchemaVersionMismatch, "missing field " + path + "/" + key);
  return j.at(key);
}

double number(const json &j, const std::string &key, const std::string &path) {
  const json &v = member(j, key, path);
  if (!v.is_number())
    throw Error(ErrorKind::SchemaVersionMismatch, "expected a number at " + path + "/" + key);
  return v.get<double>();
}

template <typename T>
T typed(const json &j, const std::string &key, const std::string &path) {
  const json &v = member(j, key, path);
  try {
    return v.get<T>();
  } catch (const json::exception &) {
    throw Error(ErrorKind::SchemaVersionMismatch, "wrong type at " + path + "/" + key);
  }
}

Eigen::VectorXd vector_from(const json &j, const std::string &key, const std::string &path) {
  const auto values = typed<std::vector<double>>(j, key, path);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json vector_to(const Eigen::VectorXd &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json params_to_json(const ModelParams &p) {
  json z = json::array();
  for (Eigen::Index r = 0; r < p.z.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < p.z.cols(); ++c) row.push_back(p.z(r, c));
    z.push_back(std::move(row));
  }
  return {{"z", z},
          {"theta1", p.theta1},
          {"theta2", p.theta2},
          {"alpha1", p.alpha1},
          {"alpha2", p.alpha2},
          {"delta", vector_to(p.delta)},
          {"gamma", vector_to(p.gamma)}};
}

ModelParams params_from_json(const json &j, const std::string &path) {
  ModelParams p;
  const auto rows = typed<std::vector<std::vector<double>>>(j, "z", path);
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  p.z.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != d)
      throw Error(ErrorKind::SchemaVersionMismatch, "ragged rows at " + path + "/z");
    for (std::size_t c = 0; c < d; ++c)
      p.z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  p.theta1 = number(j, "theta1", path);
  p.theta2 = number(j, "theta2", path);
  p.alpha1 = number(j, "alpha1", path);
  p.alpha2 = number(j, "alpha2", path);
  p.delta = vector_from(j, "delta", path);
  p.gamma = vector_from(j, "gamma", path);
  try {
    p.validate();
  } catch (const Error &e) {
    throw Error(ErrorKind::SchemaVersionMismatch, path + ": " + e.what());
  }
  return p;
}

json rescale_to_json(const std::optional<RescaleInfo> &r) {
  if (!r) return nullptr;
  return {{"t_min", r->t_min}, {"t_max", r->t_max}, {"target", r->target}};
}

std::optional<RescaleInfo> rescale_from_json(const json &j, const std::string &path) {
  const json &v = member(j, "rescale", path);
  if (v.is_null()) return std::nullopt;
  const std::string sub = path + "/rescale";
  return RescaleInfo{number(v, "t_min", sub), number(v, "t_max", sub), number(v, "target", sub)};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string xml_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace

Dataset parse_events(const std::string &text, const DatasetManifest &manifest,
                     const std::string &source) {
  const auto [cs, cr, ct] = manifest.columns;
  if (std::min({cs, cr, ct}) < 0)
    throw Error(ErrorKind::InvalidArgument, "column indices must be nonnegative");
  const auto needed = static_cast<std::size_t>(std::max({cs, cr, ct})) + 1;
  if (manifest.rescale_target && !(*manifest.rescale_target > 0.0))
    throw Error(ErrorKind::InvalidArgument, "rescale target must be positive");

  struct Row {
    std::string sender, receiver;
    double time;
    std::size_t line;
  };
  std::vector<Row> rows;
  bool seen_content = false;
  std::istringstream in(text);
  std::string raw_line;
  for (std::size_t line_no = 1; std::getline(in, raw_line); ++line_no) {
    const std::string_view line = trim(raw_line);
    if (line.empty()) continue;
    const auto fields = split_fields(line, manifest.delimiter);
    const bool first = !seen_content;
    seen_content = true;
    if (fields.size() < needed) {
      std::ostringstream msg;
      msg << "expected at least " << needed << " fields, found " << fields.size();
      parse_error(source, line_no, msg.str());
    }
    const auto time = parse_double(fields[ct]);
    if (!time) {
      if (first) continue;  // header
      parse_error(source, line_no, "time '" + std::string(fields[ct]) + "' is not a number");
    }
    if (!std::isfinite(*time)) parse_error(source, line_no, "time is not finite");
    if (fields[cs].empty() || fields[cr].empty())
      parse_error(source, line_no, "empty node label");
    if (fields[cs] == fields[cr])
      parse_error(source, line_no, "self loop on node '" + std::string(fields[cs]) + "'",
                  ErrorKind::SelfLoop);
    rows.push_back({std::string(fields[cs]), std::string(fields[cr]), *time, line_no});
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyInput, source + ": no events");

  Dataset data;
  {
    std::vector<std::string> labels;
    for (const Row &r : rows) {
      labels.push_back(r.sender);
      labels.push_back(r.receiver);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    const bool numeric = std::all_of(labels.begin(), labels.end(),
                                     [](const std::string &s) { return parse_integer(s).has_value(); });
    if (numeric)
      std::stable_sort(labels.begin(), labels.end(), [](const std::string &a, const std::string &b) {
        return *parse_integer(a) < *parse_integer(b);
      });
    data.labels = std::move(labels);
  }
  std::unordered_map<std::string, NodeId> ids;
  for (std::size_t i = 0; i < data.labels.size(); ++i)
    ids.emplace(data.labels[i], static_cast<NodeId>(i));

  std::optional<double> horizon;
  double t_min = rows.front().time, t_max = rows.front().time;
  for (const Row &r : rows) {
    t_min = std::min(t_min, r.time);
    t_max = std::max(t_max, r.time);
  }
  if (manifest.rescale_target) {
    if (t_min == t_max)
      throw Error(ErrorKind::DegenerateTimes, source + ": all timestamps are equal");
    data.rescale = RescaleInfo{t_min, t_max, *manifest.rescale_target};
    horizon = *manifest.rescale_target;
  }

  std::vector<Event> raw;
  raw.reserve(rows.size());
  for (const Row &r : rows) {
    const double t = data.rescale ? rescale_value(r.time, t_min, t_max, data.rescale->target)
                                  : r.time;
    raw.push_back({ids.at(r.sender), ids.at(r.receiver), t});
  }
  try {
    data.events = validate_events(std::move(raw), static_cast<int>(data.labels.size()), horizon);
  } catch (const Error &e) {
    if (e.index() && *e.index() < rows.size())
      parse_error(source, rows[*e.index()].line, e.what(), e.kind());
    throw;
  }
  return data;
}

Dataset read_events(const DatasetManifest &manifest) {
  return parse_events(read_file(manifest.path), manifest, manifest.path.string());
}

EventSequence rescale_times(const EventSequence &events, double target) {
  if (!(target > 0.0) || !std::isfinite(target))
    throw Error(ErrorKind::InvalidArgument, "rescale target must be positive");
  if (events.empty()) throw Error(ErrorKind::EmptyInput, "no events to rescale");
  const double t_min = events[0].time;
  const double t_max = events[events.size() - 1].time;
  if (t_min == t_max) throw Error(ErrorKind::DegenerateTimes, "all timestamps are equal");
  std::vector<Event> out(events.events().begin(), events.events().end());
  for (Event &e : out) e.time = rescale_value(e.time, t_min, t_max, target);
  return validate_events(std::move(out), events.n_nodes(), target);
}

void write_events_csv(const std::filesystem::path &path, const EventSequence &events,
                      const std::vector<std::string> &labels) {
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(events.n_nodes()))
    throw Error(ErrorKind::ShapeMismatch, "label count differs from the node count");
  std::string text = "sender,receiver,time\n";
  char buf[64];
  for (const Event &e : events.events()) {
    text += labels.empty() ? std::to_string(e.sender) : labels[e.sender];
    text += ',';
    text += labels.empty() ? std::to_string(e.receiver) : labels[e.receiver];
    text += ',';
    const auto res = std::to_chars(buf, buf + sizeof buf, e.time);
    text.append(buf, res.ptr);
    text += '\n';
  }
  write_file(path, text);
}

std::string slope_name(SlopeConstraint c) {
  switch (c) {
    case SlopeConstraint::Positive: return "pos";
    case SlopeConstraint::Negative: return "neg";
    case SlopeConstraint::Unconstrained: return "free";
  }
  return "free";
}

SlopeConstraint parse_slope(const std::string &s) {
  if (s == "pos") return SlopeConstraint::Positive;
  if (s == "neg") return SlopeConstraint::Negative;
  if (s == "free") return SlopeConstraint::Unconstrained;
  throw Error(ErrorKind::InvalidArgument, "slope must be pos, neg or free, got '" + s + "'");
}

std::string mode_name(IntegrationMode m) {
  return m == IntegrationMode::Horizon ? "horizon" : "paper";
}

IntegrationMode parse_mode(const std::string &s) {
  if (s == "horizon") return IntegrationMode::Horizon;
  if (s == "paper") return IntegrationMode::PaperPerPair;
  throw Error(ErrorKind::InvalidArgument, "mode must be horizon or paper, got '" + s + "'");
}

nlohmann::json fit_to_json(const FitDocument &doc) {
  const FitConfig &c = doc.config;
  json trace = json::array();
  for (const TracePoint &t : doc.result.trace)
    trace.push_back({{"outer_iter", t.outer_iter}, {"nll", t.nll}});
  json j = {
      {"schema", kFitSchema},
      {"params", params_to_json(doc.result.params)},
      {"kernel", {{"betas", doc.kernel.betas()}, {"weights", doc.kernel.weights()}}},
      {"config",
       {{"dim", c.dim},
        {"constraint", slope_name(c.constraint)},
        {"s_theta", c.s_theta},
        {"s_z", c.s_z},
        {"max_outer", c.max_outer},
        {"rel_tol", c.rel_tol},
        {"seed", c.seed},
        {"mode", mode_name(c.mode)},
        {"fixed",
         {{"z", c.fixed.z},
          {"theta1", c.fixed.theta1},
          {"theta2", c.fixed.theta2},
          {"alpha", c.fixed.alpha},
          {"effects", c.fixed.effects}}}}},
      {"trace", trace},
      {"converged", doc.result.converged},
      {"outer_iters", doc.result.outer_iters},
      {"warnings", doc.result.warnings},
  };
  if (doc.dataset) {
    const DatasetInfo &d = *doc.dataset;
    j["dataset"] = {{"source", d.source},
                    {"labels", d.labels},
                    {"rescale", rescale_to_json(d.rescale)},
                    {"duration", d.duration ? json(*d.duration) : json(nullptr)},
                    {"train_fraction", d.train_fraction},
                    {"horizon", d.horizon}};
  }
  return j;
}

FitDocument fit_from_json(const nlohmann::json &j) {
  const auto schema = typed<std::string>(j, "schema", "");
  if (schema != kFitSchema)
    throw Error(ErrorKind::SchemaVersionMismatch,
                "schema is '" + schema + "', expected '" + kFitSchema + "'");
  FitDocument doc;
  doc.result.params = params_from_json(member(j, "params", ""), "/params");

  const json &kernel = member(j, "kernel", "");
  try {
    doc.kernel = KernelSpec::make(typed<std::vector<double>>(kernel, "betas", "/kernel"),
                                  typed<std::vector<double>>(kernel, "weights", "/kernel"));
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::SchemaVersionMismatch) throw;
    throw Error(ErrorKind::SchemaVersionMismatch, std::string("/kernel: ") + e.what());
  }

  const json &config = member(j, "config", "");
  FitConfig &c = doc.config;
  c.dim = typed<int>(config, "dim", "/config");
  c.s_theta = typed<int>(config, "s_theta", "/config");
  c.s_z = typed<int>(config, "s_z", "/config");
  c.max_outer = typed<int>(config, "max_outer", "/config");
  c.rel_tol = number(config, "rel_tol", "/config");
  c.seed = typed<std::uint64_t>(config, "seed", "/config");
  try {
    c.constraint = parse_slope(typed<std::string>(config, "constraint", "/config"));
    c.mode = parse_mode(typed<std::string>(config, "mode", "/config"));
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::SchemaVersionMismatch) throw;
    throw Error(ErrorKind::SchemaVersionMismatch, std::string("/config: ") + e.what());
  }
  const json &fixed = member(config, "fixed", "/config");
  c.fixed.z = typed<bool>(fixed, "z", "/config/fixed");
  c.fixed.theta1 = typed<bool>(fixed, "theta1", "/config/fixed");
  c.fixed.theta2 = typed<bool>(fixed, "theta2", "/config/fixed");
  c.fixed.alpha = typed<bool>(fixed, "alpha", "/config/fixed");
  c.fixed.effects = typed<bool>(fixed, "effects", "/config/fixed");

  const json &trace = member(j, "trace", "");
  if (!trace.is_array()) throw Error(ErrorKind::SchemaVersionMismatch, "/trace is not an array");
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const std::string path = "/trace/" + std::to_string(i);
    doc.result.trace.push_back(
        {typed<int>(trace[i], "outer_iter", path), number(trace[i], "nll", path)});
  }
  doc.result.converged = typed<bool>(j, "converged", "");
  doc.result.outer_iters = typed<int>(j, "outer_iters", "");
  doc.result.warnings = typed<std::vector<std::string>>(j, "warnings", "");

  if (j.contains("dataset")) {
    const json &d = j.at("dataset");
    DatasetInfo info;
    info.source = typed<std::string>(d, "source", "/dataset");
    info.labels = typed<std::vector<std::string>>(d, "labels", "/dataset");
    info.rescale = rescale_from_json(d, "/dataset");
    const json &duration = member(d, "duration", "/dataset");
    if (!duration.is_null()) info.duration = number(d, "duration", "/dataset");
    info.train_fraction = number(d, "train_fraction", "/dataset");
    info.horizon = number(d, "horizon", "/dataset");
    doc.dataset = std::move(info);
  }
  return doc;
}

void write_fit(const std::filesystem::path &path, const FitDocument &doc) {
  write_file(path, fit_to_json(doc).dump(2) + "\n");
}

FitDocument read_fit(const std::filesystem::path &path) { return fit_from_json(read_json(path)); }

void write_json(const std::filesystem::path &path, const nlohmann::json &body) {
  write_file(path, body.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path &path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

std::string render_latent_scatter(const Eigen::MatrixXd &z,
                                  const std::vector<std::string> &labels,
                                  const std::vector<std::pair<NodeId, NodeId>> &highlights) {
  if (z.cols() != 2) {
    std::ostringstream msg;
    msg << "scatter plots need d = 2, got d = " << z.cols() << "; refit with --dim 2";
    throw Error(ErrorKind::DimensionNot2, msg.str());
  }
  const Eigen::Index n = z.rows();
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(n))
    throw Error(ErrorKind::ShapeMismatch, "label count differs from the node count");

  constexpr double size = 800.0, margin = 40.0, inner = size - 2.0 * margin;
  const double x_min = n ? z.col(0).minCoeff() : 0.0, x_range = n ? z.col(0).maxCoeff() - x_min : 0.0;
  const double y_min = n ? z.col(1).minCoeff() : 0.0, y_range = n ? z.col(1).maxCoeff() - y_min : 0.0;
  const double span = std::max(x_range, y_range);
  const double scale = span > 0.0 ? inner / span : 1.0;
  auto px = [&](Eigen::Index i) {
    return margin + (z(i, 0) - x_min) * scale + (inner - x_range * scale) / 2.0;
  };
  auto py = [&](Eigen::Index i) {
    return size - margin - (z(i, 1) - y_min) * scale - (inner - y_range * scale) / 2.0;
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
         "viewBox=\"0 0 800 800\">\n"
      << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  if (!highlights.empty()) {
    svg << "<g stroke=\"#d62728\" stroke-width=\"1.5\" stroke-opacity=\"0.8\">\n";
    for (const auto &[u, v] : highlights) {
      if (u < 0 || v < 0 || u >= n || v >= n)
        throw Error(ErrorKind::NodeOutOfRange, "highlighted pair references a missing node");
      svg << "<line x1=\"" << fmt(px(u)) << "\" y1=\"" << fmt(py(u)) << "\" x2=\""
          << fmt(px(v)) << "\" y2=\"" << fmt(py(v)) << "\"/>\n";
    }
    svg << "</g>\n";
  }
  svg << "<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string label =
        labels.empty() ? std::to_string(i) : labels[static_cast<std::size_t>(i)];
    svg << "<circle cx=\"" << fmt(px(i)) << "\" cy=\"" << fmt(py(i))
        << "\" r=\"4\" fill=\"#1f77b4\"/>\n"
        << "<text x=\"" << fmt(px(i) + 6.0) << "\" y=\"" << fmt(py(i) - 6.0) << "\">"
        << xml_escape(label) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void emit_latent_scatter(const Eigen::MatrixXd &z, const std::vector<std::string> &labels,
                         const std::vector<std::pair<NodeId, NodeId>> &highlights,
                         const std::filesystem::path &path) {
  write_file(path, render_latent_scatter(z, labels, highlights));
}

}  // namespace lsh
