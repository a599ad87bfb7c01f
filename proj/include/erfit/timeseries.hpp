#pragma once

#include <optional>
#include <string>
#include <vector>

#include "erfit/linalg.hpp"

namespace erfit {

enum class Mode { flow, map };

std::string to_string(Mode m);
Mode parse_mode(const std::string& text);

// Known sparse coefficients of a polynomial system, stored against the full
// polynomial library of `degree` (K x d, graded order).
struct TruthModel {
  unsigned degree = 0;
  Matrix coefficients;
};

struct TimeSeries {
  Matrix data;                       // N x d observations
  Mode mode = Mode::flow;
  std::optional<double> dt;          // sampling interval, flows only
  std::vector<std::string> var_names;
  std::optional<TruthModel> truth;

  Index length() const noexcept { return data.rows(); }
  Index dims() const noexcept { return data.cols(); }
};

}  // namespace erfit
