#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "erfit/config.hpp"
#include "erfit/er_core.hpp"
#include "erfit/linalg.hpp"
#include "erfit/timeseries.hpp"

namespace erfit::io {

inline constexpr int kModelFormatVersion = 1;

// Models. Doubles are written in shortest round-trip form, so a saved model
// reloads bit-for-bit. Custom (non-monomial) terms keep their label but lose
// their evaluator.
std::string model_to_json(const core::FittedModel& m);
core::FittedModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const core::FittedModel& m);
core::FittedModel load_model(const std::filesystem::path& path);

// CSV trajectories: optional header row of names, then one row per sample.
struct CsvTable {
  std::vector<std::string> names;
  Matrix values;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);
std::string format_csv(const std::vector<std::string>& names, const Matrix& values);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& names, const Matrix& values);

// Sidecar written next to simulated data: "lorenz.csv" -> "lorenz.meta.json".
struct SeriesMetadata {
  Mode mode = Mode::flow;
  std::optional<double> dt;
  std::optional<std::string> system;
  std::map<std::string, double> params;
  std::optional<std::uint64_t> seed;
  double noise = 0.0;
  std::vector<std::string> var_names;
  std::optional<TruthModel> truth;
};

std::filesystem::path metadata_path(const std::filesystem::path& data_path);
std::string metadata_to_json(const SeriesMetadata& meta);
SeriesMetadata metadata_from_json(const std::string& text);
void save_metadata(const std::filesystem::path& path, const SeriesMetadata& meta);
std::optional<SeriesMetadata> load_metadata_if_present(const std::filesystem::path& data_path);

// Everything needed to rerun a fit.
struct RunConfig {
  EstimatorConfig estimator;
  unsigned degree = 2;
  bool skip_forward = false;
  Mode mode = Mode::flow;
  std::optional<double> dt;
  std::string input;
  std::string output;
  std::optional<std::string> derivatives;
  std::vector<std::string> var_names;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

std::string run_config_to_json(const RunConfig& rc);
RunConfig run_config_from_json(const std::string& text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace erfit::io
