#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "erfit/bench.hpp"
#include "erfit/er_core.hpp"
#include "erfit/errors.hpp"
#include "erfit/model_io.hpp"

namespace erfit::cli {
namespace fs = std::filesystem;

namespace {

struct SimulateArgs {
  std::string system;
  std::size_t n = 0;
  double dt = 0.01;
  std::uint64_t seed = 0;
  std::string output;
  double noise = 0.0;
  std::size_t nodes = 10;
  std::optional<double> coupling;
  std::vector<double> x0;
  std::string derivatives_out;
};

struct FitArgs {
  std::string input;
  std::string output = "model.json";
  std::string config;
  std::string run_config_out;
  unsigned degree = 2;
  std::string mode;
  double dt = 0.0;
  std::string derivatives;
  unsigned knn = 2;
  unsigned shuffles = 100;
  double alpha = 0.95;
  std::uint64_t seed = 0;
  bool skip_forward = false;
  double jitter = 1e-10;
  std::vector<std::string> var_names;
};

struct EvalArgs {
  std::string model;
  std::string output = "prediction.csv";
  std::vector<double> x0;
  double horizon = 1.0;
  double dt = 0.0;
  std::string compare;
};

struct ScoreArgs {
  std::string model;
  std::string truth;
};

bench::SystemSpec spec_from_metadata(const io::SeriesMetadata& meta, std::size_t dims) {
  if (!meta.system) throw InvalidInput("metadata does not name a system");
  const auto name = bench::parse_system_name(*meta.system);
  std::size_t nodes = dims;
  if (name == bench::SystemName::coupled_lorenz_network) nodes = dims / 3;
  auto spec = bench::make_system(name, nodes);
  for (const auto& [k, v] : meta.params) spec.params[k] = v;
  if (spec.dims != dims) throw ShapeError("metadata system does not match the data's column count");
  return spec;
}

Matrix exact_rates(const bench::SystemSpec& spec, const Matrix& states) {
  Matrix out(states.rows(), states.cols());
  for (Index r = 0; r < states.rows(); ++r) out.row(r) = bench::system_rhs(spec, states.row(r).transpose()).transpose();
  return out;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  auto spec = bench::make_system(bench::parse_system_name(a.system), a.nodes);
  if (a.coupling) {
    if (!spec.params.count("coupling")) throw InvalidInput(a.system + " has no coupling parameter");
    spec.params["coupling"] = *a.coupling;
  }
  const std::size_t n = a.n ? a.n : (spec.kind == Mode::map ? 1000 : 5000);
  Vector x0 = bench::default_initial_condition(spec);
  if (!a.x0.empty()) {
    if (a.x0.size() != spec.dims) throw InvalidInput("--x0 needs " + std::to_string(spec.dims) + " values");
    x0 = Eigen::Map<const Vector>(a.x0.data(), static_cast<Index>(a.x0.size()));
  }
  const auto ts = bench::simulate(spec, x0, n, a.dt, a.noise, a.seed);
  const fs::path path = a.output.empty() ? fs::path(a.system + ".csv") : fs::path(a.output);
  io::write_csv(path, ts.var_names, ts.data);

  io::SeriesMetadata meta;
  meta.mode = ts.mode;
  meta.dt = ts.dt;
  meta.system = bench::to_string(spec.name);
  meta.params = spec.params;
  meta.seed = a.seed;
  meta.noise = a.noise;
  meta.var_names = ts.var_names;
  meta.truth = ts.truth;
  io::save_metadata(io::metadata_path(path), meta);

  if (!a.derivatives_out.empty()) {
    if (spec.kind == Mode::map) throw InvalidInput("--derivatives-out applies to flows only");
    io::write_csv(a.derivatives_out, ts.var_names, exact_rates(spec, ts.data));
  }
  out << "wrote " << path.string() << " (" << n << " x " << spec.dims << ")\n";
  return kOk;
}

fs::path default_run_config_path(const fs::path& model_path) {
  auto p = model_path;
  p.replace_extension(".run.json");
  return p;
}

int cmd_fit(const FitArgs& a, const CLI::App& sub, std::ostream& out) {
  io::RunConfig rc;
  if (!a.config.empty()) rc = io::run_config_from_json(io::read_text(a.config));
  auto given = [&](const char* flag) { return sub.count(flag) > 0; };
  if (given("--input")) rc.input = a.input;
  if (given("--output") || a.config.empty()) rc.output = a.output;
  if (given("--degree") || a.config.empty()) rc.degree = a.degree;
  if (given("--skip-forward")) rc.skip_forward = a.skip_forward;
  if (given("--knn") || a.config.empty()) rc.estimator.knn_k = a.knn;
  if (given("--shuffles") || a.config.empty()) rc.estimator.shuffle_count = a.shuffles;
  if (given("--alpha") || a.config.empty()) rc.estimator.alpha = a.alpha;
  if (given("--seed") || a.config.empty()) rc.estimator.rng_seed = a.seed;
  if (given("--jitter") || a.config.empty()) rc.estimator.jitter_scale = a.jitter;
  if (given("--derivatives")) rc.derivatives = a.derivatives;
  if (rc.input.empty()) throw InvalidInput("--input is required");

  const auto table = io::read_csv(rc.input);
  const auto meta = io::load_metadata_if_present(rc.input);

  if (given("--mode")) {
    rc.mode = parse_mode(a.mode);
  } else if (a.config.empty()) {
    rc.mode = meta ? meta->mode : Mode::flow;
  }
  if (given("--dt")) {
    rc.dt = a.dt;
  } else if (a.config.empty() && meta) {
    rc.dt = meta->dt;
  }
  if (given("--var-names")) {
    rc.var_names = a.var_names;
  } else if (a.config.empty()) {
    rc.var_names = table.names;
  }
  if (rc.mode == Mode::map) rc.dt.reset();

  std::optional<Matrix> supplied;
  if (rc.mode == Mode::map) {
    if (rc.derivatives) throw InvalidInput("--derivatives applies to flow mode only");
    rc.estimator.derivative_method = DerivativeMethod::none_map_mode;
  } else if (rc.derivatives) {
    rc.estimator.derivative_method = DerivativeMethod::user_supplied;
    if (*rc.derivatives == "exact") {
      if (!meta) throw InvalidInput("--derivatives exact needs the input's metadata sidecar");
      supplied = exact_rates(spec_from_metadata(*meta, static_cast<std::size_t>(table.values.cols())), table.values);
    } else {
      supplied = io::read_csv(*rc.derivatives).values;
    }
  } else {
    rc.estimator.derivative_method = DerivativeMethod::central_difference;
    if (!rc.dt) throw InvalidInput("flow mode needs --dt, a metadata sidecar with dt, or --derivatives");
  }

  TimeSeries ts;
  ts.data = table.values;
  ts.mode = rc.mode;
  ts.dt = rc.dt;
  ts.var_names = rc.var_names;
  const auto model = core::erfit(ts, rc.estimator, rc.degree, rc.skip_forward, supplied);

  io::save_model(rc.output, model);
  io::write_text(default_run_config_path(rc.output), io::run_config_to_json(rc));
  for (const auto& line : core::render_equations(model)) out << line << '\n';
  return kOk;
}

int cmd_eval(const EvalArgs& a, const CLI::App& sub, std::ostream& out) {
  const auto model = io::load_model(a.model);
  std::optional<io::CsvTable> compare;
  if (!a.compare.empty()) compare = io::read_csv(a.compare);

  Vector x0;
  if (!a.x0.empty()) {
    x0 = Eigen::Map<const Vector>(a.x0.data(), static_cast<Index>(a.x0.size()));
  } else if (compare) {
    x0 = compare->values.row(0).transpose();
  } else {
    throw InvalidInput("eval needs --x0 or --compare");
  }
  if (x0.size() != model.dims()) {
    throw ShapeError("model has " + std::to_string(model.dims()) + " state variables, initial condition has " +
                     std::to_string(x0.size()));
  }
  if (a.horizon < 0) throw InvalidInput("--horizon must be >= 0");

  double dt = 1.0;
  std::size_t steps = 0;
  if (model.mode == Mode::flow) {
    dt = a.dt;
    if (sub.count("--dt") == 0) {
      const auto meta = compare ? io::load_metadata_if_present(a.compare) : std::nullopt;
      dt = meta && meta->dt ? *meta->dt : 0.01;
    }
    if (!(dt > 0)) throw InvalidInput("--dt must be > 0");
    steps = static_cast<std::size_t>(std::llround(a.horizon / dt));
  } else {
    steps = static_cast<std::size_t>(std::llround(a.horizon));
  }

  auto rhs = [&model](const Vector& s) { return core::evaluate_model(model, s); };
  TimeSeries traj;
  if (steps == 0) {
    traj.data = x0.transpose();
  } else {
    traj = bench::simulate(rhs, model.mode, x0, steps + 1, dt, 0.0, 0);
  }

  std::vector<std::string> names{model.mode == Mode::flow ? "t" : "n"};
  names.insert(names.end(), model.var_names.begin(), model.var_names.end());
  const Index d = model.dims();
  Matrix table(traj.data.rows(), d + 1 + (compare ? 1 : 0));
  table.col(0) = Vector::LinSpaced(traj.data.rows(), 0.0, static_cast<double>(steps)) * (model.mode == Mode::flow ? dt : 1.0);
  table.middleCols(1, d) = traj.data;
  if (compare) {
    if (compare->values.cols() != d) throw ShapeError("compare file has a different number of variables");
    if (compare->values.rows() < traj.data.rows()) {
      throw ShapeError("compare file has " + std::to_string(compare->values.rows()) + " rows, need " +
                       std::to_string(traj.data.rows()));
    }
    names.push_back("error");
    for (Index r = 0; r < traj.data.rows(); ++r) {
      table(r, d + 1) = (traj.data.row(r) - compare->values.row(r)).cwiseAbs().maxCoeff();
    }
  }
  io::write_csv(a.output, names, table);
  out << "wrote " << a.output << " (" << table.rows() << " rows)";
  if (compare) out << ", max error " << table.col(d + 1).maxCoeff();
  out << '\n';
  return kOk;
}

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const auto model = io::load_model(a.model);
  fs::path meta_path = a.truth;
  if (meta_path.extension() != ".json") meta_path = io::metadata_path(meta_path);
  const auto meta = io::metadata_from_json(io::read_text(meta_path));
  if (!meta.truth) throw InvalidInput(meta_path.string() + " carries no ground truth");
  const Matrix truth = bench::embed_truth(*meta.truth, static_cast<std::size_t>(model.dims()), model.terms);
  const auto s = bench::score_support_recovery(model, truth);
  out << "true_positives " << s.true_positives << '\n'
      << "false_positives " << s.false_positives << '\n'
      << "false_negatives " << s.false_negatives << '\n'
      << "coefficient_rel_error " << s.coefficient_rel_error << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse model discovery from trajectory data", "erfit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a benchmark trajectory (CSV + .meta.json sidecar)");
  simulate->add_option("--system", sim.system, "lorenz, rossler, van_der_pol, logistic_map, "
                                               "coupled_logistic_network, coupled_lorenz_network")
      ->required();
  simulate->add_option("--n", sim.n, "Number of samples (default 5000 for flows, 1000 for maps)");
  simulate->add_option("--dt", sim.dt, "Sampling interval for flows")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Observation-noise seed")->capture_default_str();
  simulate->add_option("-o,--output", sim.output, "Output CSV (default <system>.csv)");
  simulate->add_option("--noise", sim.noise, "Noise sd as a fraction of each channel's sd")->capture_default_str();
  simulate->add_option("--nodes", sim.nodes, "Node count for networks")->capture_default_str();
  simulate->add_option("--coupling", sim.coupling, "Coupling strength for networks");
  simulate->add_option("--x0", sim.x0, "Initial condition, comma separated")->delimiter(',');
  simulate->add_option("--derivatives-out", sim.derivatives_out, "Also write the exact vector field at each sample");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Recover a sparse model from a trajectory CSV");
  fit->add_option("--input", fa.input, "Trajectory CSV");
  fit->add_option("--output", fa.output, "Model JSON")->capture_default_str();
  fit->add_option("--config", fa.config, "Rerun from a saved run config");
  fit->add_option("--degree", fa.degree, "Maximum monomial degree")->capture_default_str();
  fit->add_option("--mode", fa.mode, "flow or map (default from sidecar, else flow)");
  fit->add_option("--dt", fa.dt, "Sampling interval (default from sidecar)");
  fit->add_option("--derivatives", fa.derivatives, "CSV of precomputed derivatives, or 'exact' to use the sidecar's system");
  fit->add_option("--knn", fa.knn, "k for the nearest-neighbour estimators")->capture_default_str();
  fit->add_option("--shuffles", fa.shuffles, "Shuffles per significance test")->capture_default_str();
  fit->add_option("--alpha", fa.alpha, "Shuffle-test confidence level")->capture_default_str();
  fit->add_option("--seed", fa.seed, "Random seed")->capture_default_str();
  fit->add_flag("--skip-forward", fa.skip_forward, "Backward elimination from the full library only");
  fit->add_option("--jitter", fa.jitter, "Tie-breaking jitter, in column standard deviations")->capture_default_str();
  fit->add_option("--var-names", fa.var_names, "Variable names, comma separated")->delimiter(',');

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Integrate (flow) or iterate (map) a fitted model");
  eval->add_option("--model", ea.model, "Model JSON")->required();
  eval->add_option("--output", ea.output, "Predicted trajectory CSV")->capture_default_str();
  eval->add_option("--x0", ea.x0, "Initial condition, comma separated (default first row of --compare)")
      ->delimiter(',');
  eval->add_option("--horizon", ea.horizon, "Time span (flow) or step count (map)")->capture_default_str();
  eval->add_option("--dt", ea.dt, "Integration step (default from the compare sidecar, else 0.01)");
  eval->add_option("--compare", ea.compare, "Reference trajectory CSV; adds a max-norm error column");

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "Compare a fitted model with a known system");
  score->add_option("--model", sa.model, "Model JSON")->required();
  score->add_option("--truth", sa.truth, "Metadata JSON, or a data CSV whose sidecar carries the truth")->required();

  std::vector<const char*> argv{"erfit"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*fit) return cmd_fit(fa, *fit, out);
    if (*eval) return cmd_eval(ea, *eval, out);
    if (*score) return cmd_score(sa, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ShapeError& e) {
    err << "shape error: " << e.what() << '\n';
    return kShape;
  } catch (const InvalidInput& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace erfit::cli
