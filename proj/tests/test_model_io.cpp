#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "erfit/bench.hpp"
#include "erfit/errors.hpp"
#include "erfit/model_io.hpp"
#include "oracles.hpp"

using namespace erfit;

namespace {

core::FittedModel small_model() {
  const Matrix x = oracle::gaussian(400, 2, 1);
  const auto lib = basis::build_polynomial_library(x, 2);
  Matrix y(400, 2);
  y.col(0) = 0.1 + lib.phi.col(1).array() / 3.0;
  y.col(1) = -2.5 * lib.phi.col(4);
  EstimatorConfig cfg;
  cfg.shuffle_count = 30;
  cfg.rng_seed = 0xfeedfacecafebeefull;
  auto m = core::fit_library(y, lib, estimators::KsgEstimator(cfg), false);
  m.var_names = {"u", "v"};
  m.degree = 2;
  m.config = cfg;
  return m;
}

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_SUITE("model_io") {

TEST_CASE("model JSON round trip is exact") {
  const auto m = small_model();
  const auto text = io::model_to_json(m);
  const auto back = io::model_from_json(text);
  CHECK(same_bits(back.beta, m.beta));
  CHECK(back.supports == m.supports);
  CHECK(back.terms == m.terms);
  CHECK(back.var_names == m.var_names);
  CHECK(back.config == m.config);
  CHECK(back.diagnostics == m.diagnostics);
  CHECK(io::model_to_json(back) == text);

  const Matrix pts = oracle::gaussian(20, 2, 9);
  for (Index i = 0; i < pts.rows(); ++i) {
    const Vector s = pts.row(i).transpose();
    CHECK(same_bits(core::evaluate_model(back, s), core::evaluate_model(m, s)));
  }
}

TEST_CASE("model JSON carries the documented fields") {
  const auto text = io::model_to_json(small_model());
  for (const char* key : {"\"version\"", "\"config\"", "\"terms\"", "\"beta\"", "\"equations\"", "\"traces\""}) {
    CHECK(text.find(key) != std::string::npos);
  }
}

TEST_CASE("malformed model JSON is a parse error") {
  CHECK_THROWS_AS(io::model_from_json("{"), ParseError);
  CHECK_THROWS_AS(io::model_from_json("{\"version\": 1}"), ParseError);
  auto text = io::model_to_json(small_model());
  text.replace(text.find("\"version\": 1"), 12, "\"version\": 9");
  CHECK_THROWS_AS(io::model_from_json(text), ParseError);
}

TEST_CASE("custom terms keep their label but cannot be evaluated after loading") {
  core::FittedModel m;
  m.terms = {basis::TermDescriptor::custom("sin(x)", [](std::span<const double> s) { return std::sin(s[0]); })};
  m.var_names = {"x"};
  m.beta = Matrix::Ones(1, 1);
  m.supports = {core::SupportSet({0})};
  m.diagnostics.resize(1);
  const auto back = io::model_from_json(io::model_to_json(m));
  CHECK(back.terms[0].label == "sin(x)");
  CHECK_THROWS_AS(core::evaluate_model(back, std::vector<double>{1.0}), InvalidInput);
}

TEST_CASE("CSV round trip") {
  const Matrix v = oracle::gaussian(50, 3, 4) * 1e3;
  const std::vector<std::string> names{"a", "b", "c"};
  const auto t = io::parse_csv(io::format_csv(names, v));
  CHECK(t.names == names);
  CHECK(same_bits(t.values, v));
}

TEST_CASE("CSV parsing") {
  auto t = io::parse_csv("1,2\n3,4\n");
  CHECK(t.names == std::vector<std::string>{"x1", "x2"});
  CHECK(t.values(1, 0) == 3.0);

  t = io::parse_csv("# comment\nx, y\r\n 1.5 , -2e-3\n\n+3,4\n");
  CHECK(t.names == std::vector<std::string>{"x", "y"});
  CHECK(t.values(0, 1) == -2e-3);
  CHECK(t.values(1, 0) == 3.0);

  auto line_of = [](const std::string& text) {
    try {
      io::parse_csv(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("x,y\n1,2\n3\n") == 3);
  CHECK(line_of("x,y\n1,2\n3,abc\n") == 3);
  CHECK(line_of("x,y\n1,2\n3,nan\n") == 3);
  CHECK(line_of("x,y\n") != 0);
  CHECK(line_of("x,,y\n1,2,3\n") == 1);
}

TEST_CASE("metadata and run config round trip") {
  const auto spec = bench::make_system(bench::SystemName::van_der_pol);
  io::SeriesMetadata meta;
  meta.dt = 0.01;
  meta.system = "van_der_pol";
  meta.params = spec.params;
  meta.seed = 7;
  meta.var_names = {"x", "y"};
  meta.truth = bench::system_truth(spec);
  const auto back = io::metadata_from_json(io::metadata_to_json(meta));
  CHECK(back.dt == meta.dt);
  CHECK(back.system == meta.system);
  CHECK(back.seed == meta.seed);
  CHECK(back.params == meta.params);
  CHECK(same_bits(back.truth->coefficients, meta.truth->coefficients));

  io::RunConfig rc;
  rc.estimator.rng_seed = 123;
  rc.estimator.alpha = 0.9;
  rc.degree = 3;
  rc.mode = Mode::flow;
  rc.dt = 0.02;
  rc.input = "in.csv";
  rc.output = "out.json";
  rc.derivatives = "d.csv";
  rc.var_names = {"p", "q"};
  CHECK(io::run_config_from_json(io::run_config_to_json(rc)) == rc);
  CHECK_THROWS_AS(io::run_config_from_json("[]"), ParseError);

  CHECK(io::metadata_path("dir/lorenz.csv") == std::filesystem::path("dir/lorenz.meta.json"));
}

}  // TEST_SUITE
