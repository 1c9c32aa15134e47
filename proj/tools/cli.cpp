#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsh/estimation.hpp"
#include "lsh/evaluation.hpp"
#include "lsh/io.hpp"
#include "lsh/parallel.hpp"
#include "lsh/simulation.hpp"

namespace lsh::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char *kVersion = "1.0.0";

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    out.push_back(first == std::string::npos ? "" : item.substr(first, last - first + 1));
  }
  return out;
}

std::optional<double> to_number(const std::string &s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<double> parse_numbers(const std::string &text, const std::string &flag) {
  std::vector<double> out;
  for (const std::string &item : split_list(text)) {
    const auto v = to_number(item);
    if (!v) throw Error(ErrorKind::InvalidArgument, flag + ": '" + item + "' is not a number");
    out.push_back(*v);
  }
  return out;
}

json metadata(const std::string &command, const json &flags, std::uint64_t seed) {
  return {{"schema", "lsh-run/1"},
          {"command", command},
          {"seed", seed},
          {"flags", flags},
          {"versions",
           {{"lsh", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}}}};
}

fs::path meta_path(const fs::path &out) {
  fs::path p = out;
  return p.replace_extension(".meta.json");
}

void ensure_parent(const fs::path &path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

double model_span(const DatasetInfo &info) {
  return info.rescale ? info.rescale->target : info.horizon;
}

// Reloads the events a fit was trained on, with the same id assignment.
Dataset load_matching_events(const std::string &path, const FitDocument &doc) {
  DatasetManifest manifest;
  manifest.path = path;
  manifest.rescale_target = std::nullopt;
  if (doc.dataset && doc.dataset->rescale) manifest.rescale_target = doc.dataset->rescale->target;
  Dataset data = read_events(manifest);
  if (doc.dataset && !doc.dataset->labels.empty() && data.labels != doc.dataset->labels)
    throw Error(ErrorKind::ShapeMismatch,
                path + ": node labels differ from those stored in the fit");
  if (data.events.n_nodes() != doc.result.params.n_nodes())
    throw Error(ErrorKind::ShapeMismatch, path + ": node count differs from the fit");
  return data;
}

std::string events_source(const std::string &flag, const FitDocument &doc) {
  if (!flag.empty()) return flag;
  if (doc.dataset && !doc.dataset->source.empty()) return doc.dataset->source;
  throw Error(ErrorKind::InvalidArgument, "--events is required (the fit records no source)");
}

struct SimulateArgs {
  int nodes{20};
  int dim{2};
  double horizon{100.0};
  double theta1{1.0};
  double theta2{-3.2};
  double alpha1{0.01};
  double alpha2{0.02};
  std::string sigmas{"1"};
  std::string kernel{"0.1,1,10"};
  std::string duration;
  std::uint64_t seed{0};
  std::size_t max_events{10'000'000};
  std::string out;
};

void run_simulate(const SimulateArgs &a) {
  GenConfig config;
  config.n_nodes = a.nodes;
  config.dim = a.dim;
  config.horizon = a.horizon;
  config.theta1 = a.theta1;
  config.theta2 = a.theta2;
  config.alpha1 = a.alpha1;
  config.alpha2 = a.alpha2;
  const auto sig = parse_numbers(a.sigmas, "--sigmas");
  if (sig.size() == 1) {
    config.sigma_z = config.sigma_delta = config.sigma_gamma = sig[0];
  } else if (sig.size() == 3) {
    config.sigma_z = sig[0];
    config.sigma_delta = sig[1];
    config.sigma_gamma = sig[2];
  } else {
    throw Error(ErrorKind::InvalidArgument, "--sigmas takes one value or three (z,delta,gamma)");
  }
  const std::optional<double> duration =
      a.duration.empty() ? std::nullopt : std::optional(parse_duration_seconds(a.duration));
  config.kernel = parse_kernel(a.kernel, duration, a.horizon);
  config.seed = a.seed;
  config.max_events_per_pair = a.max_events;

  const ModelParams truth = sample_params(config);
  const EventSequence events = simulate_network(config, truth);

  const fs::path dir = a.out;
  fs::create_directories(dir);
  write_events_csv(dir / "events.csv", events);

  FitDocument doc;
  doc.result.params = truth;
  doc.kernel = config.kernel;
  doc.config.dim = a.dim;
  doc.config.seed = a.seed;
  DatasetInfo info;
  info.source = (dir / "events.csv").string();
  info.horizon = config.horizon;
  if (duration) info.duration = duration;
  doc.dataset = info;
  write_fit(dir / "true_fit.json", doc);

  const json flags = {{"nodes", a.nodes},         {"dim", a.dim},
                      {"horizon", a.horizon},     {"theta1", a.theta1},
                      {"theta2", a.theta2},       {"alpha1", a.alpha1},
                      {"alpha2", a.alpha2},       {"sigmas", a.sigmas},
                      {"kernel", a.kernel},       {"duration", a.duration},
                      {"max_events", a.max_events}, {"out", a.out}};
  json meta = metadata("simulate", flags, a.seed);
  meta["events"] = events.size();
  meta["kernel_betas"] = config.kernel.betas();
  write_json(dir / "metadata.json", meta);
  std::cout << "simulate: " << events.size() << " events over " << a.nodes << " nodes -> "
            << dir.string() << "\n";
}

struct FitArgs {
  std::string events;
  int dim{2};
  std::string slope{"free"};
  std::string kernel{"hour,day,week"};
  std::string duration;
  std::string steps{"2,2"};
  double tol{1e-6};
  int max_outer{500};
  std::string mode{"horizon"};
  std::uint64_t seed{0};
  std::string rescale{"1000"};
  double train_fraction{1.0};
  std::string out{"fit.json"};
};

void run_fit(const FitArgs &a) {
  const auto steps = parse_numbers(a.steps, "--steps");
  if (steps.size() != 2)
    throw Error(ErrorKind::InvalidArgument, "--steps takes two values: theta,z");
  for (double s : steps)
    if (!(s >= 1.0) || s != std::floor(s))
      throw Error(ErrorKind::InvalidArgument, "step sizes must be >= 1");

  DatasetManifest manifest;
  manifest.path = a.events;
  if (a.rescale == "none") {
    manifest.rescale_target = std::nullopt;
  } else {
    const auto target = to_number(a.rescale);
    if (!target) throw Error(ErrorKind::InvalidArgument, "--rescale takes a number or 'none'");
    manifest.rescale_target = *target;
  }
  const Dataset data = read_events(manifest);
  for (const std::string &w : data.events.warnings()) std::cerr << "warning: " << w << "\n";

  DatasetInfo info;
  info.source = a.events;
  info.labels = data.labels;
  info.rescale = data.rescale;
  info.train_fraction = a.train_fraction;
  info.horizon = data.events.horizon();
  if (!a.duration.empty()) info.duration = parse_duration_seconds(a.duration);
  const KernelSpec kernel = parse_kernel(a.kernel, info.duration, model_span(info));

  EventSequence train = data.events;
  if (a.train_fraction < 1.0) train = split_events(data.events, {a.train_fraction}).train;
  else if (!(a.train_fraction == 1.0))
    throw Error(ErrorKind::InvalidArgument, "--train-fraction must lie in (0, 1]");

  FitConfig config;
  config.dim = a.dim;
  config.constraint = parse_slope(a.slope);
  config.s_theta = static_cast<int>(steps[0]);
  config.s_z = static_cast<int>(steps[1]);
  config.rel_tol = a.tol;
  config.max_outer = a.max_outer;
  config.mode = parse_mode(a.mode);
  config.seed = a.seed;

  FitDocument doc;
  doc.result = fit(train, kernel, config);
  doc.kernel = kernel;
  doc.config = config;
  doc.dataset = info;
  for (const std::string &w : doc.result.warnings) std::cerr << "warning: " << w << "\n";

  const fs::path out = a.out;
  ensure_parent(out);
  write_fit(out, doc);
  const json flags = {{"events", a.events},   {"dim", a.dim},
                      {"slope", a.slope},     {"kernel", a.kernel},
                      {"duration", a.duration}, {"steps", a.steps},
                      {"tol", a.tol},         {"max_outer", a.max_outer},
                      {"mode", a.mode},       {"rescale", a.rescale},
                      {"train_fraction", a.train_fraction}, {"out", a.out}};
  json meta = metadata("fit", flags, a.seed);
  meta["kernel_betas"] = kernel.betas();
  meta["train_events"] = train.size();
  write_json(meta_path(out), meta);
  std::cout << "fit: nll " << doc.result.trace.back().nll << " after "
            << doc.result.outer_iters << " outer iterations"
            << (doc.result.converged ? " (converged)" : " (not converged)") << " -> "
            << out.string() << "\n";
}

struct EvalArgs {
  std::string fit{"fit.json"};
  std::string events;
  std::optional<double> train_fraction;
  std::string out{"results.json"};
};

Split split_for(const Dataset &data, const FitDocument &doc, std::optional<double> fraction) {
  const double f = fraction ? *fraction : (doc.dataset ? doc.dataset->train_fraction : 0.7);
  return split_events(data.events, {f});
}

void run_eval(const EvalArgs &a) {
  const FitDocument doc = read_fit(a.fit);
  const std::string source = events_source(a.events, doc);
  const Dataset data = load_matching_events(source, doc);
  const Split split = split_for(data, doc, a.train_fraction);
  const double ll = test_loglik_per_event(doc.result.params, doc.kernel, split.train,
                                          split.test, data.events.horizon());
  json body = {{"schema", kEvalSchema},
               {"command", "eval"},
               {"test_loglik_per_event", ll},
               {"n_train", split.train.size()},
               {"n_test", split.test.size()},
               {"split_time", split.split_time},
               {"horizon", data.events.horizon()}};
  const fs::path out = a.out;
  ensure_parent(out);
  write_json(out, body);
  write_json(meta_path(out),
             metadata("eval", {{"fit", a.fit}, {"events", source}, {"out", a.out}},
                      doc.config.seed));
  std::cout << "eval: test log-likelihood per event " << ll << " over " << split.test.size()
            << " events\n";
}

struct PredictArgs {
  std::string fit{"fit.json"};
  std::string events;
  std::size_t points{100};
  std::string window{"auto:14d"};
  std::string duration;
  std::optional<double> train_fraction;
  std::uint64_t seed{0};
  std::string out{"predict.json"};
  std::string table;
};

double resolve_window(const std::string &text, const FitDocument &doc,
                      const std::string &duration_flag, json &note) {
  if (text.rfind("auto:", 0) == 0) {
    std::optional<double> duration;
    if (!duration_flag.empty()) duration = parse_duration_seconds(duration_flag);
    else if (doc.dataset && doc.dataset->duration) duration = doc.dataset->duration;
    if (!duration)
      throw Error(ErrorKind::InvalidArgument,
                  "--window auto:<len> needs --duration or a fit with a recorded duration");
    if (!doc.dataset) throw Error(ErrorKind::InvalidArgument, "the fit records no dataset span");
    const double len = parse_duration_seconds(text.substr(5));
    const double span = model_span(*doc.dataset);
    note = {{"window_real_seconds", len}, {"duration_seconds", *duration}, {"span_units", span}};
    return span * len / *duration;
  }
  const auto v = to_number(text);
  if (!v) throw Error(ErrorKind::InvalidArgument, "--window takes a number or auto:<duration>");
  return *v;
}

void run_predict(const PredictArgs &a) {
  const FitDocument doc = read_fit(a.fit);
  const std::string source = events_source(a.events, doc);
  const Dataset data = load_matching_events(source, doc);
  const Split split = split_for(data, doc, a.train_fraction);
  json conversion = nullptr;
  const double window = resolve_window(a.window, doc, a.duration, conversion);
  const LinkPredictionResult r =
      dynamic_link_prediction(doc.result.params, doc.kernel, data.events, split.split_time,
                              data.events.horizon(), a.points, window, a.seed);

  json points = json::array();
  for (const PointAuc &p : r.points)
    points.push_back({{"time", p.time}, {"auc", p.skipped ? json(nullptr) : json(p.auc)}});
  json body = {{"schema", kEvalSchema}, {"command", "predict"},
               {"mean_auc", r.mean_auc},  {"std_auc", r.std_auc},
               {"skipped", r.skipped},    {"window", window},
               {"window_conversion", conversion}, {"split_time", split.split_time},
               {"points", points}};
  const fs::path out = a.out;
  ensure_parent(out);
  write_json(out, body);
  if (!a.table.empty()) {
    std::ofstream csv(a.table);
    if (!csv) throw Error(ErrorKind::Io, "cannot write " + a.table);
    csv << "time,auc\n";
    char buf[64];
    for (const PointAuc &p : r.points) {
      auto res = std::to_chars(buf, buf + sizeof buf, p.time);
      csv.write(buf, res.ptr - buf);
      csv << ',';
      if (!p.skipped) {
        res = std::to_chars(buf, buf + sizeof buf, p.auc);
        csv.write(buf, res.ptr - buf);
      }
      csv << '\n';
    }
  }
  write_json(meta_path(out), metadata("predict",
                                      {{"fit", a.fit},
                                       {"events", source},
                                       {"points", a.points},
                                       {"window", a.window},
                                       {"duration", a.duration},
                                       {"table", a.table},
                                       {"out", a.out}},
                                      a.seed));
  std::cout << "predict: mean AUC " << r.mean_auc << " (std " << r.std_auc << ") over "
            << r.points.size() - r.skipped << " windows of length " << window << "\n";
}

struct PpcArgs {
  std::string fit{"fit.json"};
  std::string events;
  std::size_t sims{15};
  std::optional<double> horizon;
  std::uint64_t seed{0};
  std::size_t max_events{10'000'000};
  std::string out{"ppc.json"};
};

void run_ppc(const PpcArgs &a) {
  const FitDocument doc = read_fit(a.fit);
  std::optional<PpcStats> actual;
  double horizon = doc.dataset ? doc.dataset->horizon : 0.0;
  std::string source = a.events;
  if (source.empty() && doc.dataset) source = doc.dataset->source;
  if (!source.empty() && fs::exists(source)) {
    const Dataset data = load_matching_events(source, doc);
    actual = ppc_stats(data.events);
    horizon = data.events.horizon();
  }
  if (a.horizon) horizon = *a.horizon;
  if (!(horizon > 0.0))
    throw Error(ErrorKind::InvalidArgument, "--horizon is required when the fit records none");

  const PpcEnsemble e =
      ppc_ensemble(doc.result.params, doc.kernel, horizon, a.sims, a.seed, a.max_events);
  const std::map<std::string, std::pair<double, double PpcStats::*>> stats = {
      {"transitivity", {e.mean.transitivity, &PpcStats::transitivity}},
      {"reciprocity", {e.mean.reciprocity, &PpcStats::reciprocity}},
      {"avg_clustering", {e.mean.avg_clustering, &PpcStats::avg_clustering}},
      {"mean_degree", {e.mean.mean_degree, &PpcStats::mean_degree}}};
  json body = {{"schema", kEvalSchema}, {"command", "ppc"}, {"n_sims", a.sims},
               {"horizon", horizon}};
  json counts = json::array();
  for (const PpcStats &s : e.samples) counts.push_back(s.event_count);
  body["statistics"]["event_count"] = {
      {"actual", actual ? json(actual->event_count) : json(nullptr)},
      {"mean", e.mean.event_count},
      {"samples", counts}};
  for (const auto &[name, entry] : stats) {
    json samples = json::array();
    for (const PpcStats &s : e.samples) samples.push_back(s.*entry.second);
    body["statistics"][name] = {{"actual", actual ? json((*actual).*entry.second) : json(nullptr)},
                                {"mean", entry.first},
                                {"samples", samples}};
  }
  const fs::path out = a.out;
  ensure_parent(out);
  write_json(out, body);
  write_json(meta_path(out), metadata("ppc",
                                      {{"fit", a.fit},
                                       {"events", source},
                                       {"sims", a.sims},
                                       {"horizon", horizon},
                                       {"max_events", a.max_events},
                                       {"out", a.out}},
                                      a.seed));
  std::cout << "ppc: mean event count " << e.mean.event_count << " over " << a.sims
            << " simulations\n";
}

struct ScatterArgs {
  std::string fit{"fit.json"};
  std::string events;
  std::size_t top{0};
  std::string out{"scatter.svg"};
};

void run_scatter(const ScatterArgs &a) {
  const FitDocument doc = read_fit(a.fit);
  std::vector<std::pair<NodeId, NodeId>> highlights;
  if (a.top > 0) {
    const Dataset data = load_matching_events(events_source(a.events, doc), doc);
    std::map<std::pair<NodeId, NodeId>, std::size_t> counts;
    for (const Event &e : data.events.events()) ++counts[{e.sender, e.receiver}];
    std::vector<std::pair<std::size_t, std::pair<NodeId, NodeId>>> ranked;
    for (const auto &[pair, c] : counts) ranked.push_back({c, pair});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto &x, const auto &y) { return x.first > y.first; });
    for (std::size_t i = 0; i < std::min(a.top, ranked.size()); ++i)
      highlights.push_back(ranked[i].second);
  }
  const std::vector<std::string> labels =
      doc.dataset ? doc.dataset->labels : std::vector<std::string>{};
  const fs::path out = a.out;
  ensure_parent(out);
  emit_latent_scatter(doc.result.params.z, labels, highlights, out);
  write_json(meta_path(out),
             metadata("scatter", {{"fit", a.fit}, {"events", a.events}, {"top", a.top},
                                  {"out", a.out}},
                      doc.config.seed));
  std::cout << "scatter: " << doc.result.params.n_nodes() << " nodes -> " << out.string()
            << "\n";
}

}  // namespace

double parse_duration_seconds(const std::string &text) {
  static const std::map<std::string, double> units = {
      {"s", 1.0}, {"m", 60.0}, {"h", 3600.0}, {"d", 86400.0}, {"w", 604800.0},
      {"y", 365.0 * 86400.0}};
  std::string number = text;
  double scale = 1.0;
  if (!text.empty() && std::isalpha(static_cast<unsigned char>(text.back()))) {
    const auto it = units.find(text.substr(text.size() - 1));
    if (it == units.end())
      throw Error(ErrorKind::InvalidArgument, "unknown duration unit in '" + text + "'");
    scale = it->second;
    number = text.substr(0, text.size() - 1);
  }
  const auto v = to_number(number);
  if (!v || !(*v > 0.0) || !std::isfinite(*v))
    throw Error(ErrorKind::InvalidArgument, "duration '" + text + "' is not a positive length");
  return *v * scale;
}

KernelSpec parse_kernel(const std::string &text, std::optional<double> duration_seconds,
                        double span_units) {
  static const std::map<std::string, double> scales = {
      {"second", 1.0},       {"minute", 60.0},          {"hour", 3600.0},
      {"day", 86400.0},      {"week", 7.0 * 86400.0},   {"month", 30.0 * 86400.0},
      {"year", 365.0 * 86400.0}};
  std::vector<double> betas;
  for (const std::string &item : split_list(text)) {
    if (const auto v = to_number(item)) {
      betas.push_back(*v);
      continue;
    }
    const auto it = scales.find(item);
    if (it == scales.end())
      throw Error(ErrorKind::InvalidArgument, "--kernel: unknown decay '" + item + "'");
    if (!duration_seconds)
      throw Error(ErrorKind::InvalidArgument,
                  "--kernel '" + item + "' needs --duration (real-world span of the data)");
    // One model time unit covers duration / span seconds.
    betas.push_back(*duration_seconds / (span_units * it->second));
  }
  return KernelSpec::uniform(std::move(betas));
}

int run(const std::vector<std::string> &args) {
  CLI::App app{"Latent space Hawkes models for relational event networks", "lsh"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0: LSH_THREADS or all cores)");
  app.set_version_flag("--version", kVersion);

  SimulateArgs sim;
  auto *s = app.add_subcommand("simulate", "simulate a network from the generative model");
  s->add_option("--nodes", sim.nodes, "number of nodes")->capture_default_str();
  s->add_option("--dim", sim.dim, "latent dimension")->capture_default_str();
  s->add_option("--horizon", sim.horizon, "observation window T")->capture_default_str();
  s->add_option("--theta1", sim.theta1)->capture_default_str();
  s->add_option("--theta2", sim.theta2)->capture_default_str();
  s->add_option("--alpha1", sim.alpha1)->capture_default_str();
  s->add_option("--alpha2", sim.alpha2)->capture_default_str();
  s->add_option("--sigmas", sim.sigmas, "sd of z,delta,gamma (one value or three)")
      ->capture_default_str();
  s->add_option("--kernel", sim.kernel, "decays or time-scale names")->capture_default_str();
  s->add_option("--duration", sim.duration, "real-world length of the horizon, e.g. 30d");
  s->add_option("--seed", sim.seed)->capture_default_str();
  s->add_option("--max-events", sim.max_events, "event cap per pair")->capture_default_str();
  s->add_option("--out", sim.out, "output directory")->required();

  FitArgs fa;
  auto *f = app.add_subcommand("fit", "fit the model by alternating minimization");
  f->add_option("--events", fa.events, "events CSV")->required();
  f->add_option("--dim", fa.dim)->capture_default_str();
  f->add_option("--slope", fa.slope, "pos, neg or free")->capture_default_str();
  f->add_option("--kernel", fa.kernel, "decays or time-scale names")->capture_default_str();
  f->add_option("--duration", fa.duration, "real-world span of the data, e.g. 243d");
  f->add_option("--steps", fa.steps, "iterations per theta and z block")->capture_default_str();
  f->add_option("--tol", fa.tol, "relative NLL improvement to stop at")->capture_default_str();
  f->add_option("--max-outer", fa.max_outer)->capture_default_str();
  f->add_option("--mode", fa.mode, "compensator range: horizon or paper")->capture_default_str();
  f->add_option("--seed", fa.seed)->capture_default_str();
  f->add_option("--rescale", fa.rescale, "time span target or 'none'")->capture_default_str();
  f->add_option("--train-fraction", fa.train_fraction, "fit on this leading share of events")
      ->capture_default_str();
  f->add_option("--out", fa.out)->capture_default_str();

  EvalArgs ea;
  auto *e = app.add_subcommand("eval", "test log-likelihood per event");
  e->add_option("--fit", ea.fit)->capture_default_str();
  e->add_option("--events", ea.events, "events CSV (default: the fit's source)");
  e->add_option("--train-fraction", ea.train_fraction, "override the fit's split");
  e->add_option("--out", ea.out)->capture_default_str();

  PredictArgs pa;
  auto *p = app.add_subcommand("predict", "dynamic link prediction AUC");
  p->add_option("--fit", pa.fit)->capture_default_str();
  p->add_option("--events", pa.events, "events CSV (default: the fit's source)");
  p->add_option("--points", pa.points, "sampled time points")->capture_default_str();
  p->add_option("--window", pa.window, "model units or auto:<duration>")->capture_default_str();
  p->add_option("--duration", pa.duration, "real-world span of the data");
  p->add_option("--train-fraction", pa.train_fraction, "override the fit's split");
  p->add_option("--seed", pa.seed)->capture_default_str();
  p->add_option("--out", pa.out)->capture_default_str();
  p->add_option("--table", pa.table, "per-point CSV");

  PpcArgs ca;
  auto *c = app.add_subcommand("ppc", "posterior predictive network statistics");
  c->add_option("--fit", ca.fit)->capture_default_str();
  c->add_option("--events", ca.events, "observed events for the actual column");
  c->add_option("--sims", ca.sims)->capture_default_str();
  c->add_option("--horizon", ca.horizon, "simulation horizon (default: the data's)");
  c->add_option("--seed", ca.seed)->capture_default_str();
  c->add_option("--max-events", ca.max_events)->capture_default_str();
  c->add_option("--out", ca.out)->capture_default_str();

  ScatterArgs sa;
  auto *g = app.add_subcommand("scatter", "SVG of 2-D latent positions");
  g->add_option("--fit", sa.fit)->capture_default_str();
  g->add_option("--events", sa.events, "events CSV for highlighted pairs");
  g->add_option("--top", sa.top, "highlight the most frequent ordered pairs")
      ->capture_default_str();
  g->add_option("--out", sa.out)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &err) {
    return app.exit(err);
  }

  try {
    if (threads > 0) set_thread_count(threads);
    if (s->parsed()) run_simulate(sim);
    if (f->parsed()) run_fit(fa);
    if (e->parsed()) run_eval(ea);
    if (p->parsed()) run_predict(pa);
    if (c->parsed()) run_ppc(ca);
    if (g->parsed()) run_scatter(sa);
  } catch (const Error &err) {
    std::cerr << "error [" << to_string(err.kind()) << "]: " << err.what() << "\n";
    return 1;
  } catch (const std::exception &err) {
    std::cerr << "error [Io]: " << err.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace lsh::cli
