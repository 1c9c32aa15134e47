#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>

#include <gtest/gtest.h>

#include "lsh/error.hpp"
#include "lsh/io.hpp"
#include "support/errors.hpp"
#include "support/oracles.hpp"

using namespace lsh;
using lsh::testing::error_kind;
namespace fs = std::filesystem;

namespace {

DatasetManifest raw_manifest() {
  DatasetManifest m;
  m.rescale_target.reset();
  return m;
}

fs::path scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / "lsh_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(ParseEvents, LabelsAndTimes) {
  const Dataset d = parse_events("a,b,1.5\nb,a,2.0\n", raw_manifest());
  EXPECT_EQ(d.events.n_nodes(), 2);
  ASSERT_EQ(d.events.size(), 2u);
  EXPECT_EQ(d.labels, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.events[0], (Event{0, 1, 1.5}));
  EXPECT_EQ(d.events[1], (Event{1, 0, 2.0}));
  EXPECT_FALSE(d.rescale.has_value());
}

TEST(ParseEvents, HeaderBlankLinesAndNumericLabels) {
  const Dataset d =
      parse_events("src,dst,ts\n\n10,2,3.0\n2,10,4.0\n\n", raw_manifest());
  EXPECT_EQ(d.labels, (std::vector<std::string>{"2", "10"}));
  EXPECT_EQ(d.events[0], (Event{1, 0, 3.0}));
}

TEST(ParseEvents, ColumnOrderAndDelimiter) {
  DatasetManifest m = raw_manifest();
  m.delimiter = '\t';
  m.columns = {1, 2, 0};  // time sits in the first column
  const Dataset d = parse_events("5.0\tx\ty\n", m);
  EXPECT_EQ(d.labels, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(d.events[0], (Event{0, 1, 5.0}));
}

TEST(ParseEvents, ErrorsNameTheLine) {
  try {
    parse_events("a,a,1.0\n", raw_manifest());
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::SelfLoop);
    EXPECT_EQ(e.index(), 1u);
  }
  try {
    parse_events("a,b,1.0\nb,c,oops\n", raw_manifest(), "data.csv");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_EQ(e.index(), 2u);
    EXPECT_NE(std::string(e.what()).find("data.csv:2"), std::string::npos);
  }
  EXPECT_EQ(error_kind([] { parse_events("a,b\n", raw_manifest()); }), ErrorKind::ParseError);
  EXPECT_EQ(error_kind([] { parse_events("a,b,-1\n", raw_manifest()); }), ErrorKind::NegativeTime);
  EXPECT_EQ(error_kind([] { parse_events("", raw_manifest()); }), ErrorKind::EmptyInput);
  DatasetManifest missing;
  missing.path = scratch("does_not_exist.csv");
  EXPECT_EQ(error_kind([&] { read_events(missing); }), ErrorKind::Io);
}

TEST(RescaleTimes, WorkedExamples) {
  const EventSequence a = validate_events({{0, 1, 0.0}, {1, 0, 500.0}}, 2);
  const EventSequence ra = rescale_times(a, 1000.0);
  EXPECT_EQ(ra[0].time, 0.0);
  EXPECT_EQ(ra[1].time, 1000.0);
  EXPECT_EQ(ra.horizon(), 1000.0);

  const Dataset d = parse_events("a,b,10\nb,a,20\na,b,30\n", DatasetManifest{});
  EXPECT_EQ(d.events[0].time, 0.0);
  EXPECT_EQ(d.events[1].time, 500.0);
  EXPECT_EQ(d.events[2].time, 1000.0);
  ASSERT_TRUE(d.rescale.has_value());
  EXPECT_EQ(d.rescale->t_min, 10.0);
  EXPECT_EQ(d.rescale->t_max, 30.0);

  EXPECT_EQ(error_kind([] { parse_events("a,b,4\nb,a,4\n", DatasetManifest{}); }),
            ErrorKind::DegenerateTimes);
}

TEST(RescaleTimes, OrderPreservingAndIdempotent) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const EventSequence s = oracle::random_events(rng, 5, 50, 37.0);
    const EventSequence once = rescale_times(s, 1000.0);
    const EventSequence twice = rescale_times(once, 1000.0);
    ASSERT_EQ(once.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(once[i], twice[i]);
      EXPECT_GE(once[i].time, 0.0);
      EXPECT_LE(once[i].time, 1000.0);
      if (i > 0) EXPECT_LE(once[i - 1].time, once[i].time);
    }
  }
}

TEST(EventsCsv, RoundTrip) {
  std::mt19937_64 rng(2);
  const EventSequence s = oracle::random_events(rng, 4, 60, 9.0);
  const fs::path path = scratch("round_trip.csv");
  write_events_csv(path, s);
  DatasetManifest m = raw_manifest();
  m.path = path;
  const Dataset d = read_events(m);
  ASSERT_EQ(d.events.size(), s.size());
  // Labels are "0".."3" and sort numerically, so ids survive unchanged.
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(d.events[i], s[i]);
}

TEST(FitJson, RoundTripIsBitExact) {
  std::mt19937_64 rng(3);
  FitDocument doc;
  doc.result.params = oracle::random_params(rng, 5, 3, -1.0);
  doc.result.params.theta2 = 0.1 + 1e-17;
  doc.result.trace = {{0, 123.456789}, {1, 100.0 / 3.0}, {2, 98.76543210987654}};
  doc.result.converged = true;
  doc.result.outer_iters = 2;
  doc.result.warnings = {"something happened"};
  doc.kernel = KernelSpec::make({0.1, 1.0 / 3.0}, {0.25, 0.75});
  doc.config.dim = 3;
  doc.config.constraint = SlopeConstraint::Negative;
  doc.config.mode = IntegrationMode::PaperPerPair;
  doc.config.seed = 0xfeedfacecafebeefULL;
  doc.config.fixed.alpha = true;
  doc.dataset = DatasetInfo{"x.csv", {"a", "b", "c", "d", "e"}, RescaleInfo{1.0, 7.5, 1000.0},
                            86400.0 * 243, 0.7, 700.0};

  const fs::path path = scratch("fit.json");
  write_fit(path, doc);
  const FitDocument back = read_fit(path);
  const ModelParams &p = doc.result.params, &q = back.result.params;
  for (Eigen::Index i = 0; i < p.z.size(); ++i) EXPECT_TRUE(same_bits(p.z.data()[i], q.z.data()[i]));
  for (Eigen::Index i = 0; i < p.delta.size(); ++i) {
    EXPECT_TRUE(same_bits(p.delta[i], q.delta[i]));
    EXPECT_TRUE(same_bits(p.gamma[i], q.gamma[i]));
  }
  EXPECT_TRUE(same_bits(p.theta1, q.theta1));
  EXPECT_TRUE(same_bits(p.theta2, q.theta2));
  EXPECT_TRUE(same_bits(p.alpha1, q.alpha1));
  EXPECT_TRUE(same_bits(p.alpha2, q.alpha2));
  ASSERT_EQ(back.result.trace.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.result.trace[i].outer_iter, static_cast<int>(i));
    EXPECT_TRUE(same_bits(back.result.trace[i].nll, doc.result.trace[i].nll));
  }
  EXPECT_EQ(back.kernel.betas(), doc.kernel.betas());
  EXPECT_EQ(back.config.constraint, SlopeConstraint::Negative);
  EXPECT_EQ(back.config.mode, IntegrationMode::PaperPerPair);
  EXPECT_EQ(back.config.seed, doc.config.seed);
  EXPECT_TRUE(back.config.fixed.alpha);
  EXPECT_FALSE(back.config.fixed.z);
  ASSERT_TRUE(back.dataset.has_value());
  EXPECT_EQ(back.dataset->labels, doc.dataset->labels);
  EXPECT_EQ(back.dataset->duration, doc.dataset->duration);
  EXPECT_EQ(back.result.warnings, doc.result.warnings);
  EXPECT_EQ(fit_to_json(back).dump(), fit_to_json(doc).dump());
}

TEST(FitJson, SchemaErrorsCarryThePath) {
  FitDocument doc;
  doc.result.params = ModelParams::zeros(2, 2);
  doc.kernel = KernelSpec::uniform({1.0});
  nlohmann::json j = fit_to_json(doc);
  j["params"].erase("theta1");
  try {
    fit_from_json(j);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaVersionMismatch);
    EXPECT_NE(std::string(e.what()).find("/params/theta1"), std::string::npos);
  }
  nlohmann::json wrong = fit_to_json(doc);
  wrong["schema"] = "lsh-fit/0";
  EXPECT_EQ(error_kind([&] { fit_from_json(wrong); }), ErrorKind::SchemaVersionMismatch);
  nlohmann::json typed = fit_to_json(doc);
  typed["params"]["alpha1"] = "big";
  EXPECT_EQ(error_kind([&] { fit_from_json(typed); }), ErrorKind::SchemaVersionMismatch);

  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << "{ not json";
  EXPECT_EQ(error_kind([&] { read_fit(bad); }), ErrorKind::ParseError);
}

TEST(Names, RoundTrip) {
  for (auto c : {SlopeConstraint::Positive, SlopeConstraint::Negative, SlopeConstraint::Unconstrained})
    EXPECT_EQ(parse_slope(slope_name(c)), c);
  for (auto m : {IntegrationMode::Horizon, IntegrationMode::PaperPerPair})
    EXPECT_EQ(parse_mode(mode_name(m)), m);
  EXPECT_EQ(error_kind([] { parse_slope("up"); }), ErrorKind::InvalidArgument);
}

TEST(Scatter, DocumentedTransform) {
  Eigen::MatrixXd z(3, 2);
  z << 0.0, 0.0, 2.0, 0.0, 1.0, 1.0;
  const std::string svg = render_latent_scatter(z, {"p", "q", "r"}, {});
  // x range 2, y range 1: s = 360, y offset (720 - 360) / 2 = 180.
  EXPECT_NE(svg.find("cx=\"40.000\" cy=\"580.000\""), std::string::npos) << svg;
  EXPECT_NE(svg.find("cx=\"760.000\" cy=\"580.000\""), std::string::npos);
  EXPECT_NE(svg.find("cx=\"400.000\" cy=\"220.000\""), std::string::npos);
  EXPECT_NE(svg.find(">q<"), std::string::npos);
  EXPECT_EQ(svg.find("<line"), std::string::npos);
  const std::regex circle("<circle");
  EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), circle), std::sregex_iterator()),
            3);
  EXPECT_NE(svg.find("width=\"800\""), std::string::npos);
}

TEST(Scatter, HighlightsDeterministicAndValidated) {
  Eigen::MatrixXd z(3, 2);
  z << 0.0, 0.0, 2.0, 0.0, 1.0, 1.0;
  const std::string a = render_latent_scatter(z, {"p", "q", "r"}, {{0, 2}});
  EXPECT_EQ(a, render_latent_scatter(z, {"p", "q", "r"}, {{0, 2}}));
  ASSERT_NE(a.find("<line"), std::string::npos);
  EXPECT_LT(a.find("<line"), a.find("<circle"));
  EXPECT_EQ(error_kind([&] { render_latent_scatter(Eigen::MatrixXd::Zero(3, 3), {}, {}); }),
            ErrorKind::DimensionNot2);
  EXPECT_EQ(error_kind([&] { render_latent_scatter(z, {}, {{0, 3}}); }), ErrorKind::NodeOutOfRange);
  EXPECT_EQ(error_kind([&] { render_latent_scatter(z, {"p"}, {}); }), ErrorKind::ShapeMismatch);

  const fs::path path = scratch("scatter.svg");
  emit_latent_scatter(z, {"p", "q", "r"}, {{0, 2}}, path);
  std::ifstream in(path);
  const std::string written((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(written, a);
}
