#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "erfit/basis.hpp"
#include "erfit/config.hpp"
#include "erfit/estimators.hpp"
#include "erfit/linalg.hpp"
#include "erfit/timeseries.hpp"

namespace erfit::core {

// Ordered set of library column indices. Insertion order is kept; removal
// keeps the relative order of the remaining members.
class SupportSet {
 public:
  SupportSet() = default;
  // Throws InvalidInput on duplicates.
  explicit SupportSet(std::vector<Index> indices);
  static SupportSet all(Index k);

  const std::vector<Index>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(Index i) const;

  void add(Index i);
  void remove(Index i);
  SupportSet without(Index i) const;
  // Indices in ascending order.
  std::vector<Index> sorted() const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> indices_;
};

enum class Stage { forward, backward };

enum class HaltReason {
  none,                   // iteration accepted (forward) or removed (backward)
  below_tolerance,        // winner's CMI <= tol (forward)
  information_saturated,  // I_a - I_s < tol (forward)
  loss_above_tolerance,   // smallest loss > tol (backward)
  size_cap,
  exhausted,
  degenerate_target,
};

std::string to_string(Stage s);
std::string to_string(HaltReason r);
Stage parse_stage(const std::string& text);
HaltReason parse_halt_reason(const std::string& text);

struct TraceRecord {
  Stage stage = Stage::forward;
  Index candidate = -1;       // -1 when no candidate was evaluated
  double objective = 0.0;     // CMI of the candidate, nats
  double tolerance = 0.0;     // shuffle-test threshold, nats
  bool halted = false;
  HaltReason reason = HaltReason::none;
  std::size_t support_size = 0;  // after this record

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct ERTrace {
  std::vector<TraceRecord> records;
  std::optional<double> full_library_information;  // I_a, forward only

  friend bool operator==(const ERTrace&, const ERTrace&) = default;
};

struct SelectionResult {
  SupportSet support;
  ERTrace trace;
};

// Greedy CMI growth of the support from the empty set. `stream` separates the
// shuffle-test random streams of independent searches (e.g. target dimensions).
SelectionResult forward_select(const Vector& y, const basis::BasisLibrary& lib, const EstimatorConfig& cfg,
                               std::uint64_t stream = 0);
SelectionResult forward_select(const Vector& y, const basis::BasisLibrary& lib,
                               const estimators::InformationEstimator& est, std::uint64_t stream = 0);

// Greedy CMI pruning of s0.
SelectionResult backward_eliminate(const Vector& y, const basis::BasisLibrary& lib, const SupportSet& s0,
                                   const EstimatorConfig& cfg, std::uint64_t stream = 0);
SelectionResult backward_eliminate(const Vector& y, const basis::BasisLibrary& lib, const SupportSet& s0,
                                   const estimators::InformationEstimator& est, std::uint64_t stream = 0);

struct DimensionDiagnostics {
  ERTrace forward;
  ERTrace backward;
  bool degenerate_target = false;
  bool empty_support = false;

  friend bool operator==(const DimensionDiagnostics&, const DimensionDiagnostics&) = default;
};

struct FittedModel {
  Matrix beta;                              // K x d
  std::vector<SupportSet> supports;         // one per target dimension
  std::vector<basis::TermDescriptor> terms;  // K
  std::vector<std::string> var_names;       // d
  Mode mode = Mode::flow;
  unsigned degree = 0;
  bool skip_forward = false;
  EstimatorConfig config;
  std::vector<DimensionDiagnostics> diagnostics;

  Index dims() const noexcept { return beta.cols(); }
};

struct FitOptions {
  unsigned degree = 2;
  bool skip_forward = false;
  std::optional<Matrix> supplied_derivatives;  // for DerivativeMethod::user_supplied
};

// Full pipeline: targets, polynomial library, per-dimension search and
// least-squares coefficients on the recovered supports.
FittedModel erfit(const TimeSeries& x, const EstimatorConfig& cfg, const FitOptions& opts);
FittedModel erfit(const TimeSeries& x, const EstimatorConfig& cfg, unsigned degree, bool skip_forward,
                  const std::optional<Matrix>& supplied_derivatives = std::nullopt);

// Search and coefficient recovery on a prebuilt library (polynomial or user
// supplied). `targets` is N x d.
FittedModel fit_library(const Matrix& targets, const basis::BasisLibrary& lib,
                        const estimators::InformationEstimator& est, bool skip_forward);

// Phi(state) * beta: the vector field (flow) or next state (map).
Vector evaluate_model(const FittedModel& m, std::span<const double> state);
Vector evaluate_model(const FittedModel& m, const Vector& state);

// "dx/dt = 10*y - 10*x" style lines, one per dimension.
std::vector<std::string> render_equations(const FittedModel& m);

}  // namespace erfit::core
