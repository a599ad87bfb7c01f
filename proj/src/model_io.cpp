#include "erfit/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "erfit/errors.hpp"

namespace erfit::io {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto& values = j.at("values");
  if (rows < 0 || cols < 0 || static_cast<Index>(values.size()) != rows) throw ParseError("matrix shape mismatch");
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = values.at(r);
    if (static_cast<Index>(row.size()) != cols) throw ParseError("matrix row length mismatch");
    for (Index c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

json config_to_json(const EstimatorConfig& c) {
  return {{"knn_k", c.knn_k},
          {"shuffle_count", c.shuffle_count},
          {"alpha", c.alpha},
          {"rng_seed", c.rng_seed},
          {"jitter_scale", c.jitter_scale},
          {"derivative_method", to_string(c.derivative_method)},
          {"log_base", c.log_base}};
}

EstimatorConfig config_from_json(const json& j) {
  EstimatorConfig c;
  c.knn_k = j.at("knn_k").get<unsigned>();
  c.shuffle_count = j.at("shuffle_count").get<unsigned>();
  c.alpha = j.at("alpha").get<double>();
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  c.jitter_scale = j.at("jitter_scale").get<double>();
  c.derivative_method = parse_derivative_method(j.at("derivative_method").get<std::string>());
  c.log_base = j.at("log_base").get<double>();
  return c;
}

// Infinite or NaN trace values are stored as null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json trace_to_json(const core::ERTrace& t) {
  json records = json::array();
  for (const auto& r : t.records) {
    records.push_back({{"stage", to_string(r.stage)},
                       {"candidate", r.candidate},
                       {"objective", number_or_null(r.objective)},
                       {"tolerance", number_or_null(r.tolerance)},
                       {"halted", r.halted},
                       {"reason", to_string(r.reason)},
                       {"support_size", r.support_size}});
  }
  json out = {{"records", std::move(records)}};
  out["full_library_information"] =
      t.full_library_information ? number_or_null(*t.full_library_information) : json(nullptr);
  return out;
}

core::ERTrace trace_from_json(const json& j) {
  core::ERTrace t;
  for (const auto& r : j.at("records")) {
    core::TraceRecord rec;
    rec.stage = core::parse_stage(r.at("stage").get<std::string>());
    rec.candidate = r.at("candidate").get<Index>();
    rec.objective = number_from(r.at("objective"));
    rec.tolerance = number_from(r.at("tolerance"));
    rec.halted = r.at("halted").get<bool>();
    rec.reason = core::parse_halt_reason(r.at("reason").get<std::string>());
    rec.support_size = r.at("support_size").get<std::size_t>();
    t.records.push_back(rec);
  }
  if (const auto& fl = j.at("full_library_information"); !fl.is_null()) t.full_library_information = fl.get<double>();
  return t;
}

json truth_to_json(const TruthModel& t) { return {{"degree", t.degree}, {"coefficients", matrix_to_json(t.coefficients)}}; }

TruthModel truth_from_json(const json& j) {
  return {j.at("degree").get<unsigned>(), matrix_from_json(j.at("coefficients"))};
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(const std::string& field, double& out) {
  if (field.empty()) return false;
  const char* begin = field.data();
  if (*begin == '+') ++begin;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string model_to_json(const core::FittedModel& m) {
  json terms = json::array();
  for (const auto& t : m.terms) {
    json jt = {{"exponents", t.exponents}};
    if (!t.is_monomial() || !t.label.empty()) jt["label"] = t.label;
    terms.push_back(std::move(jt));
  }
  json beta = json::array();
  for (Index d = 0; d < m.beta.cols(); ++d) {
    for (Index i = 0; i < m.beta.rows(); ++i) {
      if (m.beta(i, d) != 0.0) beta.push_back({d, i, m.beta(i, d)});
    }
  }
  json supports = json::array();
  for (const auto& s : m.supports) supports.push_back(s.indices());
  json traces = json::array();
  for (const auto& diag : m.diagnostics) {
    traces.push_back({{"forward", trace_to_json(diag.forward)},
                      {"backward", trace_to_json(diag.backward)},
                      {"degenerate_target", diag.degenerate_target},
                      {"empty_support", diag.empty_support}});
  }
  json out = {{"version", kModelFormatVersion},
              {"mode", to_string(m.mode)},
              {"degree", m.degree},
              {"skip_forward", m.skip_forward},
              {"var_names", m.var_names},
              {"dims", m.beta.cols()},
              {"term_count", m.beta.rows()},
              {"config", config_to_json(m.config)},
              {"terms", std::move(terms)},
              {"beta", std::move(beta)},
              {"supports", std::move(supports)},
              {"equations", core::render_equations(m)},
              {"traces", std::move(traces)}};
  return out.dump(2) + "\n";
}

core::FittedModel model_from_json(const std::string& text) {
  return guarded("model", [&] {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != kModelFormatVersion) throw ParseError("unsupported model version");
    core::FittedModel m;
    m.mode = parse_mode(j.at("mode").get<std::string>());
    m.degree = j.at("degree").get<unsigned>();
    m.skip_forward = j.at("skip_forward").get<bool>();
    m.var_names = j.at("var_names").get<std::vector<std::string>>();
    m.config = config_from_json(j.at("config"));
    const auto dims = j.at("dims").get<Index>();
    const auto k = j.at("term_count").get<Index>();
    if (dims < 0 || k < 0 || static_cast<Index>(m.var_names.size()) != dims) throw ParseError("model dims mismatch");

    for (const auto& jt : j.at("terms")) {
      basis::TermDescriptor t;
      t.exponents = jt.at("exponents").get<std::vector<unsigned>>();
      if (jt.contains("label")) t.label = jt.at("label").get<std::string>();
      if (t.exponents.empty()) {
        const std::string label = t.label;
        t.evaluator = [label](std::span<const double>) -> double {
          throw InvalidInput("custom term '" + label + "' has no evaluator after loading");
        };
      }
      m.terms.push_back(std::move(t));
    }
    if (static_cast<Index>(m.terms.size()) != k) throw ParseError("term count mismatch");

    m.beta = Matrix::Zero(k, dims);
    for (const auto& triplet : j.at("beta")) {
      const auto d = triplet.at(0).get<Index>();
      const auto i = triplet.at(1).get<Index>();
      if (d < 0 || d >= dims || i < 0 || i >= k) throw ParseError("beta index out of range");
      m.beta(i, d) = triplet.at(2).get<double>();
    }
    for (const auto& s : j.at("supports")) m.supports.emplace_back(s.get<std::vector<Index>>());
    for (const auto& t : j.at("traces")) {
      m.diagnostics.push_back({trace_from_json(t.at("forward")), trace_from_json(t.at("backward")),
                               t.at("degenerate_target").get<bool>(), t.at("empty_support").get<bool>()});
    }
    return m;
  });
}

void save_model(const std::filesystem::path& path, const core::FittedModel& m) { write_text(path, model_to_json(m)); }

core::FittedModel load_model(const std::filesystem::path& path) { return model_from_json(read_text(path)); }

CsvTable parse_csv(const std::string& text) {
  CsvTable out;
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    const auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size() && numeric; ++i) numeric = parse_number(fields[i], row[i]);

    if (!numeric) {
      if (!rows.empty() || !out.names.empty()) throw ParseError("non-numeric field", line_no);
      for (const auto& f : fields) {
        if (f.empty()) throw ParseError("empty column name", line_no);
      }
      out.names = fields;
      width = fields.size();
      continue;
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, got " + std::to_string(row.size()), line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows", line_no);
  if (out.names.empty()) out.names = basis::default_var_names(width);

  out.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) out.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

std::string format_csv(const std::vector<std::string>& names, const Matrix& values) {
  if (static_cast<Index>(names.size()) != values.cols()) throw ShapeError("csv header does not match column count");
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ',';
    out += names[i];
  }
  out += '\n';
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      if (c) out += ',';
      out += format_number(values(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& names, const Matrix& values) {
  write_text(path, format_csv(names, values));
}

std::filesystem::path metadata_path(const std::filesystem::path& data_path) {
  auto p = data_path;
  p.replace_extension(".meta.json");
  return p;
}

std::string metadata_to_json(const SeriesMetadata& meta) {
  json j = {{"mode", to_string(meta.mode)},
            {"params", meta.params},
            {"noise", meta.noise},
            {"var_names", meta.var_names}};
  j["dt"] = meta.dt ? json(*meta.dt) : json(nullptr);
  j["system"] = meta.system ? json(*meta.system) : json(nullptr);
  j["seed"] = meta.seed ? json(*meta.seed) : json(nullptr);
  j["truth"] = meta.truth ? truth_to_json(*meta.truth) : json(nullptr);
  return j.dump(2) + "\n";
}

SeriesMetadata metadata_from_json(const std::string& text) {
  return guarded("metadata", [&] {
    const json j = json::parse(text);
    SeriesMetadata m;
    m.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("dt") && !j["dt"].is_null()) m.dt = j["dt"].get<double>();
    if (j.contains("system") && !j["system"].is_null()) m.system = j["system"].get<std::string>();
    if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("params")) m.params = j["params"].get<std::map<std::string, double>>();
    if (j.contains("noise")) m.noise = j["noise"].get<double>();
    if (j.contains("var_names")) m.var_names = j["var_names"].get<std::vector<std::string>>();
    if (j.contains("truth") && !j["truth"].is_null()) m.truth = truth_from_json(j["truth"]);
    return m;
  });
}

void save_metadata(const std::filesystem::path& path, const SeriesMetadata& meta) {
  write_text(path, metadata_to_json(meta));
}

std::optional<SeriesMetadata> load_metadata_if_present(const std::filesystem::path& data_path) {
  const auto p = metadata_path(data_path);
  if (!std::filesystem::exists(p)) return std::nullopt;
  return metadata_from_json(read_text(p));
}

std::string run_config_to_json(const RunConfig& rc) {
  json j = {{"estimator", config_to_json(rc.estimator)},
            {"degree", rc.degree},
            {"skip_forward", rc.skip_forward},
            {"mode", to_string(rc.mode)},
            {"input", rc.input},
            {"output", rc.output},
            {"var_names", rc.var_names}};
  j["dt"] = rc.dt ? json(*rc.dt) : json(nullptr);
  j["derivatives"] = rc.derivatives ? json(*rc.derivatives) : json(nullptr);
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
  return guarded("run config", [&] {
    const json j = json::parse(text);
    RunConfig rc;
    rc.estimator = config_from_json(j.at("estimator"));
    rc.degree = j.at("degree").get<unsigned>();
    rc.skip_forward = j.at("skip_forward").get<bool>();
    rc.mode = parse_mode(j.at("mode").get<std::string>());
    rc.input = j.at("input").get<std::string>();
    rc.output = j.at("output").get<std::string>();
    rc.var_names = j.at("var_names").get<std::vector<std::string>>();
    if (!j.at("dt").is_null()) rc.dt = j.at("dt").get<double>();
    if (!j.at("derivatives").is_null()) rc.derivatives = j.at("derivatives").get<std::string>();
    return rc;
  });
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidInput("write failed for " + path.string());
}

}  // namespace erfit::io
