#pragma once

#include <cstdint>
#include <string>

namespace erfit {

enum class DerivativeMethod { central_difference, user_supplied, none_map_mode };

std::string to_string(DerivativeMethod m);
DerivativeMethod parse_derivative_method(const std::string& text);

// Knobs shared by the estimators and the search driver. Information values
// are computed in nats; `log_base` only changes how they are reported.
struct EstimatorConfig {
  unsigned knn_k = 2;
  unsigned shuffle_count = 100;
  double alpha = 0.95;
  std::uint64_t rng_seed = 0;
  double jitter_scale = 1e-10;
  DerivativeMethod derivative_method = DerivativeMethod::central_difference;
  double log_base = 2.718281828459045;

  // Throws InvalidInput on out-of-range fields. `rows`, when nonzero, is the
  // sample count the config will be used with.
  void validate(std::size_t rows = 0) const;

  double to_reporting_units(double nats) const;

  friend bool operator==(const EstimatorConfig&, const EstimatorConfig&) = default;
};

}  // namespace erfit
