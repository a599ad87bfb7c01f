#include <doctest.h>

#include "erfit/bench.hpp"
#include "erfit/errors.hpp"
#include "oracles.hpp"

using namespace erfit;
using bench::SystemName;

namespace {

double max_gap(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Truth evaluated through the library ordering must equal the direct formulas.
void check_truth_consistent(const bench::SystemSpec& spec) {
  const auto truth = bench::system_truth(spec);
  const auto terms = basis::polynomial_terms(spec.dims, truth.degree);
  const Matrix pts = oracle::uniform(20, static_cast<Index>(spec.dims), 5);
  for (Index i = 0; i < pts.rows(); ++i) {
    const Vector s = pts.row(i).transpose();
    const Vector phi = basis::evaluate_terms(terms, std::span<const double>(s.data(), static_cast<std::size_t>(s.size())));
    const Vector via_library = truth.coefficients.transpose() * phi;
    CHECK((via_library - bench::system_rhs(spec, s)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("system names round trip") {
  for (auto n : {SystemName::lorenz, SystemName::rossler, SystemName::van_der_pol, SystemName::logistic_map,
                 SystemName::coupled_logistic_network, SystemName::coupled_lorenz_network}) {
    CHECK(bench::parse_system_name(bench::to_string(n)) == n);
  }
  CHECK_THROWS_AS(bench::parse_system_name("duffing"), InvalidInput);
}

TEST_CASE("dimensions are consistent with the system") {
  CHECK(bench::make_system(SystemName::lorenz).dims == 3);
  CHECK(bench::make_system(SystemName::van_der_pol).dims == 2);
  CHECK(bench::make_system(SystemName::logistic_map).kind == Mode::map);
  CHECK(bench::make_system(SystemName::coupled_logistic_network, 7).dims == 7);
  CHECK(bench::make_system(SystemName::coupled_lorenz_network, 4).dims == 12);
  CHECK(bench::ring_adjacency(5)[0] == std::vector<std::size_t>{1, 4});
}

TEST_CASE("truth matrices agree with the vector fields") {
  for (auto n : {SystemName::lorenz, SystemName::rossler, SystemName::van_der_pol, SystemName::logistic_map}) {
    check_truth_consistent(bench::make_system(n));
  }
  check_truth_consistent(bench::make_system(SystemName::coupled_logistic_network, 6));
  check_truth_consistent(bench::make_system(SystemName::coupled_lorenz_network, 3));
  CHECK(bench::system_truth(bench::make_system(SystemName::van_der_pol)).degree == 3);
}

TEST_CASE("logistic map iterates") {
  const auto ts = bench::simulate(bench::make_system(SystemName::logistic_map), Vector::Constant(1, 0.3), 5, 1.0, 0, 0);
  CHECK(ts.mode == Mode::map);
  CHECK_FALSE(ts.dt.has_value());
  const double expected[] = {0.3, 0.84, 0.5376, 0.99434496, 0.02249224209039338};
  for (Index i = 0; i < 5; ++i) CHECK(ts.data(i, 0) == doctest::Approx(expected[i]).epsilon(1e-8));
}

TEST_CASE("zero vector field keeps the state") {
  const Vector x0 = Vector::LinSpaced(3, 1, 3);
  const auto ts = bench::simulate([](const Vector& x) { return Vector::Zero(x.size()); }, Mode::flow, x0, 50, 0.1, 0, 0);
  for (Index i = 0; i < 50; ++i) CHECK(ts.data.row(i) == x0.transpose());
}

TEST_CASE("RK4 matches the longhand oracle and converges at fourth order") {
  const auto spec = bench::make_system(SystemName::lorenz);
  const Vector x0 = bench::default_initial_condition(spec);
  const auto coarse = bench::simulate(spec, x0, 101, 0.01, 0, 0);
  const auto ref = oracle::rk4(oracle::lorenz, x0, 0.01, 100);
  for (Index i = 0; i <= 100; ++i) CHECK((coarse.data.row(i).transpose() - ref[static_cast<std::size_t>(i)]).cwiseAbs().maxCoeff() < 1e-9);

  const auto half = bench::simulate(spec, x0, 201, 0.005, 0, 0);
  const auto quarter = bench::simulate(spec, x0, 401, 0.0025, 0, 0);
  const auto fine = oracle::rk4(oracle::lorenz, x0, 0.0001, 10000);
  const Vector end = fine.back();
  const double e1 = (coarse.data.row(100).transpose() - end).cwiseAbs().maxCoeff();
  const double e2 = (half.data.row(200).transpose() - end).cwiseAbs().maxCoeff();
  const double e4 = (quarter.data.row(400).transpose() - end).cwiseAbs().maxCoeff();
  CHECK(e1 / e2 >= 10.0);
  CHECK(e1 / e2 <= 24.0);
  CHECK(e2 / e4 >= 10.0);
  CHECK(e2 / e4 <= 24.0);

  // Coarse vs half-step gap over one time unit; frozen from an independent
  // NumPy RK4 run from the same initial condition.
  double gap = 0;
  for (Index i = 0; i <= 100; ++i) gap = std::max(gap, (coarse.data.row(i) - half.data.row(2 * i)).cwiseAbs().maxCoeff());
  CHECK(gap == doctest::Approx(1.1033919579084284e-4).epsilon(1e-6));
}

TEST_CASE("observation noise is seeded and scaled per channel") {
  const auto spec = bench::make_system(SystemName::rossler);
  const Vector x0 = bench::default_initial_condition(spec);
  const auto clean = bench::simulate(spec, x0, 2000, 0.05, 0.0, 0);
  const auto a = bench::simulate(spec, x0, 2000, 0.05, 0.1, 42);
  const auto b = bench::simulate(spec, x0, 2000, 0.05, 0.1, 42);
  const auto c = bench::simulate(spec, x0, 2000, 0.05, 0.1, 43);
  CHECK((a.data.array() == b.data.array()).all());
  CHECK(max_gap(a.data, c.data) > 0);
  for (Index j = 0; j < 3; ++j) {
    const Vector diff = a.data.col(j) - clean.data.col(j);
    const double sd_noise = std::sqrt(diff.squaredNorm() / 2000.0);
    const auto col = clean.data.col(j);
    const double sd_signal = std::sqrt((col.array() - col.mean()).square().mean());
    CHECK(sd_noise / sd_signal == doctest::Approx(0.1).epsilon(0.1));
  }
}

TEST_CASE("uncoupled networks reduce to isolated systems") {
  auto net = bench::make_system(SystemName::coupled_logistic_network, 4);
  net.params["coupling"] = 0.0;
  const Vector x0 = bench::default_initial_condition(net);
  const auto ts = bench::simulate(net, x0, 200, 1.0, 0, 0);
  const auto single = bench::make_system(SystemName::logistic_map);
  for (Index i = 0; i < 4; ++i) {
    const auto iso = bench::simulate(single, Vector::Constant(1, x0(i)), 200, 1.0, 0, 0);
    CHECK((ts.data.col(i).array() == iso.data.col(0).array()).all());
  }

  auto lnet = bench::make_system(SystemName::coupled_lorenz_network, 3);
  lnet.params["coupling"] = 0.0;
  const Vector y0 = bench::default_initial_condition(lnet);
  const auto lts = bench::simulate(lnet, y0, 300, 0.01, 0, 0);
  const auto lorenz = bench::make_system(SystemName::lorenz);
  for (Index i = 0; i < 3; ++i) {
    const auto iso = bench::simulate(lorenz, y0.segment(3 * i, 3), 300, 0.01, 0, 0);
    CHECK(max_gap(lts.data.middleCols(3 * i, 3), iso.data) == 0.0);
  }
}

TEST_CASE("divergence is reported with the step") {
  const auto f = [](const Vector& x) { Vector d = x.array().square(); return d; };
  try {
    bench::simulate(f, Mode::map, Vector::Constant(1, 10.0), 50, 1.0, 0, 0);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
  CHECK_THROWS_AS(bench::simulate(bench::make_system(SystemName::lorenz), Vector::Zero(2), 10, 0.01, 0, 0), ShapeError);
  CHECK_THROWS_AS(bench::simulate(bench::make_system(SystemName::lorenz), Vector::Zero(3), 1, 0.01, 0, 0), InvalidInput);
}

TEST_CASE("scoring") {
  const auto truth = bench::system_truth(bench::make_system(SystemName::lorenz)).coefficients;
  auto s = bench::score_support_recovery(truth, truth);
  CHECK(s.true_positives == 7);
  CHECK(s.false_positives == 0);
  CHECK(s.false_negatives == 0);
  CHECK(s.coefficient_rel_error == 0.0);

  s = bench::score_support_recovery(Matrix::Zero(truth.rows(), truth.cols()), truth);
  CHECK(s.false_negatives == 7);
  CHECK(s.coefficient_rel_error == 1.0);

  Matrix extra = truth;
  extra(9, 0) = 0.01;
  s = bench::score_support_recovery(extra, truth);
  CHECK(s.false_positives == 1);
  CHECK(s.true_positives == 7);
  CHECK(s.false_negatives == 0);

  CHECK_THROWS_AS(bench::score_support_recovery(Matrix::Zero(3, 3), truth), ShapeError);
}

TEST_CASE("truth embeds into a larger library") {
  const auto truth = bench::system_truth(bench::make_system(SystemName::lorenz));
  const auto terms3 = basis::polynomial_terms(3, 3);
  const Matrix e = bench::embed_truth(truth, 3, terms3);
  CHECK(e.rows() == 20);
  CHECK((e.topRows(10) - truth.coefficients).cwiseAbs().maxCoeff() == 0.0);
  CHECK(e.bottomRows(10).isZero());
  CHECK_THROWS_AS(bench::embed_truth(truth, 3, basis::polynomial_terms(3, 1)), ShapeError);
}

}  // TEST_SUITE
