#include "erfit/er_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "erfit/errors.hpp"

namespace erfit::core {

using estimators::Scaling;
using linalg::Projection;

SupportSet::SupportSet(std::vector<Index> indices) : indices_(std::move(indices)) {
  auto sorted_copy = sorted();
  if (std::adjacent_find(sorted_copy.begin(), sorted_copy.end()) != sorted_copy.end()) {
    throw InvalidInput("support set contains duplicate indices");
  }
}

SupportSet SupportSet::all(Index k) {
  SupportSet s;
  s.indices_.resize(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) s.indices_[static_cast<std::size_t>(i)] = i;
  return s;
}

bool SupportSet::contains(Index i) const { return std::find(indices_.begin(), indices_.end(), i) != indices_.end(); }

void SupportSet::add(Index i) {
  if (contains(i)) throw InvalidInput("index " + std::to_string(i) + " already in support");
  indices_.push_back(i);
}

void SupportSet::remove(Index i) {
  auto it = std::find(indices_.begin(), indices_.end(), i);
  if (it == indices_.end()) throw InvalidInput("index " + std::to_string(i) + " not in support");
  indices_.erase(it);
}

SupportSet SupportSet::without(Index i) const {
  SupportSet s = *this;
  s.remove(i);
  return s;
}

std::vector<Index> SupportSet::sorted() const {
  auto out = indices_;
  std::sort(out.begin(), out.end());
  return out;
}

std::string to_string(Stage s) { return s == Stage::forward ? "forward" : "backward"; }

Stage parse_stage(const std::string& text) {
  if (text == "forward") return Stage::forward;
  if (text == "backward") return Stage::backward;
  throw InvalidInput("unknown stage '" + text + "'");
}

namespace {

constexpr std::pair<HaltReason, const char*> kReasonNames[] = {
    {HaltReason::none, "none"},
    {HaltReason::below_tolerance, "below_tolerance"},
    {HaltReason::information_saturated, "information_saturated"},
    {HaltReason::loss_above_tolerance, "loss_above_tolerance"},
    {HaltReason::size_cap, "size_cap"},
    {HaltReason::exhausted, "exhausted"},
    {HaltReason::degenerate_target, "degenerate_target"},
};

bool is_degenerate(const Vector& y) {
  if (y.size() == 0) return true;
  const double range = y.maxCoeff() - y.minCoeff();
  return range <= 1e-12 * std::max(1.0, y.cwiseAbs().maxCoeff());
}

Projection project_onto(const Matrix& y, const basis::BasisLibrary& lib, const SupportSet& s) {
  if (s.empty()) return Projection::none(y.rows());
  return linalg::ls_project(y, linalg::select_columns(lib.phi, s.indices()));
}

Matrix project_single(const Matrix& y, const basis::BasisLibrary& lib, Index i) {
  return linalg::ls_project(y, lib.phi.col(i)).values();
}

// What column i adds on top of the conditioning support: V(Y, Phi_{base+i}) - V(Y, Phi_base).
// Equal to the single-column projection when base is empty. A projection onto
// the constant column alone is constant and carries no information, so the
// increment is what lets an intercept be scored at all.
Matrix candidate_signal(const Matrix& y, const basis::BasisLibrary& lib, const SupportSet& base, Index i,
                        const Projection& cond) {
  if (cond.empty()) return project_single(y, lib, i);
  SupportSet grown = base;
  grown.add(i);
  return project_onto(y, lib, grown).values() - cond.values();
}

// Target with the conditioning signal removed, in units of the target's
// standard deviation. I(Y; V | Z) = I(Y - Z; V | Z) since the shift is
// invertible once Z is known. Passing the residual instead of Y keeps the
// k-NN counts away from the near-duplicate Y ~ Z coordinates that appear once
// the support reproduces the target; keeping Y's units (rather than
// re-standardizing) leaves a well-explained target looking nearly constant.
Matrix scaled_residual(const Matrix& y, double y_sd, const Projection& cond) {
  if (cond.empty()) return y / y_sd;
  return (y - cond.values()) / y_sd;
}

double std_dev(const Vector& y) {
  const double mean = y.mean();
  return std::sqrt((y.array() - mean).square().sum() / static_cast<double>(y.size()));
}

std::uint64_t salt_for(std::uint64_t stream, Stage stage, std::size_t iteration) {
  return estimators::mix_seed(estimators::mix_seed(stream, stage == Stage::forward ? 1 : 2), iteration);
}

void check_library(const Vector& y, const basis::BasisLibrary& lib) {
  if (y.rows() != lib.phi.rows()) {
    throw ShapeError("target has " + std::to_string(y.rows()) + " rows but library has " +
                     std::to_string(lib.phi.rows()));
  }
}

}  // namespace

std::string to_string(HaltReason r) {
  for (const auto& [reason, name] : kReasonNames) {
    if (reason == r) return name;
  }
  return "none";
}

HaltReason parse_halt_reason(const std::string& text) {
  for (const auto& [reason, name] : kReasonNames) {
    if (text == name) return reason;
  }
  throw InvalidInput("unknown halt reason '" + text + "'");
}

SelectionResult forward_select(const Vector& y, const basis::BasisLibrary& lib, const EstimatorConfig& cfg,
                               std::uint64_t stream) {
  return forward_select(y, lib, estimators::KsgEstimator(cfg), stream);
}

SelectionResult forward_select(const Vector& y, const basis::BasisLibrary& lib,
                               const estimators::InformationEstimator& est, std::uint64_t stream) {
  check_library(y, lib);
  SelectionResult out;
  auto& records = out.trace.records;
  const Index k = lib.size();
  const Index n = y.rows();
  if (k == 0) {
    records.push_back({Stage::forward, -1, 0.0, 0.0, true, HaltReason::exhausted, 0});
    return out;
  }
  if (is_degenerate(y)) {
    records.push_back({Stage::forward, -1, 0.0, 0.0, true, HaltReason::degenerate_target, 0});
    return out;
  }

  const Matrix target = y;
  const double y_sd = std_dev(y);
  const double info_all = est.mutual_information(target, linalg::ls_project(target, lib.phi).values());
  out.trace.full_library_information = info_all;
  double info_support = 0.0;
  const auto cap = static_cast<std::size_t>(std::max<Index>(0, std::min(k, n - 2)));

  for (std::size_t iter = 0;; ++iter) {
    SupportSet& s = out.support;
    if (s.size() >= cap) {
      records.push_back({Stage::forward, -1, 0.0, 0.0, true,
                         static_cast<Index>(s.size()) == k ? HaltReason::exhausted : HaltReason::size_cap,
                         s.size()});
      break;
    }
    const Projection cond = project_onto(target, lib, s);
    const Matrix resid = scaled_residual(target, y_sd, cond);

    Index winner = -1;
    double best = -std::numeric_limits<double>::infinity();
    Matrix winner_signal;
    for (Index i = 0; i < k; ++i) {
      if (s.contains(i)) continue;
      Matrix signal = candidate_signal(target, lib, s, i, cond);
      const double c = est.conditional_mutual_information(resid, signal, cond, Scaling::as_given);
      if (c > best) {
        best = c;
        winner = i;
        winner_signal = std::move(signal);
      }
    }

    const double tol = est.shuffle_tolerance(resid, winner_signal, cond, salt_for(stream, Stage::forward, iter), Scaling::as_given)
            .value;
    if (best <= tol) {
      records.push_back({Stage::forward, winner, best, tol, true, HaltReason::below_tolerance, s.size()});
      break;
    }
    if (info_all - info_support < tol) {
      records.push_back({Stage::forward, winner, best, tol, true, HaltReason::information_saturated, s.size()});
      break;
    }
    s.add(winner);
    info_support = est.mutual_information(target, project_onto(target, lib, s).values());
    records.push_back({Stage::forward, winner, best, tol, false, HaltReason::none, s.size()});
  }
  return out;
}

SelectionResult backward_eliminate(const Vector& y, const basis::BasisLibrary& lib, const SupportSet& s0,
                                   const EstimatorConfig& cfg, std::uint64_t stream) {
  return backward_eliminate(y, lib, s0, estimators::KsgEstimator(cfg), stream);
}

SelectionResult backward_eliminate(const Vector& y, const basis::BasisLibrary& lib, const SupportSet& s0,
                                   const estimators::InformationEstimator& est, std::uint64_t stream) {
  check_library(y, lib);
  for (Index i : s0.indices()) {
    if (i < 0 || i >= lib.size()) throw ShapeError("support index " + std::to_string(i) + " outside library");
  }
  SelectionResult out;
  out.support = s0;
  auto& records = out.trace.records;
  if (s0.empty()) return out;
  if (is_degenerate(y)) {
    out.support = SupportSet();
    records.push_back({Stage::backward, -1, 0.0, 0.0, true, HaltReason::degenerate_target, 0});
    return out;
  }

  const Matrix target = y;
  const double y_sd = std_dev(y);
  for (std::size_t iter = 0; !out.support.empty(); ++iter) {
    SupportSet& s = out.support;
    Index loser = -1;
    double least = std::numeric_limits<double>::infinity();
    Matrix loser_signal;
    Projection loser_cond = Projection::none(target.rows());
    for (Index i : s.sorted()) {
      Projection cond = project_onto(target, lib, s.without(i));
      Matrix signal = candidate_signal(target, lib, s.without(i), i, cond);
      const double loss = est.conditional_mutual_information(scaled_residual(target, y_sd, cond), signal, cond, Scaling::as_given);
      if (loss < least) {
        least = loss;
        loser = i;
        loser_signal = std::move(signal);
        loser_cond = std::move(cond);
      }
    }

    const double tol =
        est.shuffle_tolerance(scaled_residual(target, y_sd, loser_cond), loser_signal, loser_cond,
                             salt_for(stream, Stage::backward, iter), Scaling::as_given)
            .value;
    if (least <= tol) {
      s.remove(loser);
      records.push_back({Stage::backward, loser, least, tol, false, HaltReason::none, s.size()});
    } else {
      records.push_back({Stage::backward, loser, least, tol, true, HaltReason::loss_above_tolerance, s.size()});
      break;
    }
  }
  return out;
}

FittedModel fit_library(const Matrix& targets, const basis::BasisLibrary& lib,
                        const estimators::InformationEstimator& est, bool skip_forward) {
  if (targets.rows() != lib.phi.rows()) {
    throw ShapeError("targets have " + std::to_string(targets.rows()) + " rows but library has " +
                     std::to_string(lib.phi.rows()));
  }
  FittedModel m;
  m.beta = Matrix::Zero(lib.size(), targets.cols());
  m.terms = lib.terms;
  m.var_names = basis::default_var_names(lib.source_dims);
  m.skip_forward = skip_forward;

  for (Index j = 0; j < targets.cols(); ++j) {
    const Vector y = targets.col(j);
    const auto stream = static_cast<std::uint64_t>(j);
    DimensionDiagnostics diag;
    SupportSet support;
    if (is_degenerate(y)) {
      diag.degenerate_target = true;
    } else {
      SupportSet start;
      if (skip_forward) {
        start = SupportSet::all(lib.size());
      } else {
        auto fwd = forward_select(y, lib, est, stream);
        diag.forward = std::move(fwd.trace);
        start = std::move(fwd.support);
      }
      auto bwd = backward_eliminate(y, lib, start, est, stream);
      diag.backward = std::move(bwd.trace);
      support = std::move(bwd.support);
    }
    diag.empty_support = support.empty();
    if (!support.empty()) {
      const Matrix coef = linalg::ls_solve(linalg::select_columns(lib.phi, support.indices()), y);
      for (std::size_t r = 0; r < support.size(); ++r) {
        m.beta(support.indices()[r], j) = coef(static_cast<Index>(r), 0);
      }
    }
    m.supports.push_back(std::move(support));
    m.diagnostics.push_back(std::move(diag));
  }
  return m;
}

FittedModel erfit(const TimeSeries& x, const EstimatorConfig& cfg, const FitOptions& opts) {
  cfg.validate();
  const auto targets = estimators::make_targets(x, cfg, opts.supplied_derivatives);
  const auto lib = basis::build_polynomial_library(targets.states, opts.degree);
  cfg.validate(static_cast<std::size_t>(targets.states.rows()));
  const estimators::KsgEstimator est(cfg);

  FittedModel m = fit_library(targets.rates, lib, est, opts.skip_forward);
  if (!x.var_names.empty()) {
    if (x.var_names.size() != static_cast<std::size_t>(x.dims())) {
      throw ShapeError("expected " + std::to_string(x.dims()) + " variable names, got " +
                       std::to_string(x.var_names.size()));
    }
    m.var_names = x.var_names;
  }
  m.mode = cfg.derivative_method == DerivativeMethod::none_map_mode ? Mode::map : Mode::flow;
  m.degree = opts.degree;
  m.config = cfg;
  return m;
}

FittedModel erfit(const TimeSeries& x, const EstimatorConfig& cfg, unsigned degree, bool skip_forward,
                  const std::optional<Matrix>& supplied_derivatives) {
  return erfit(x, cfg, FitOptions{degree, skip_forward, supplied_derivatives});
}

Vector evaluate_model(const FittedModel& m, std::span<const double> state) {
  if (state.size() != m.var_names.size()) {
    throw ShapeError("model has " + std::to_string(m.var_names.size()) + " state variables, got " +
                     std::to_string(state.size()));
  }
  const Vector row = basis::evaluate_terms(m.terms, state);
  return m.beta.transpose() * row;
}

Vector evaluate_model(const FittedModel& m, const Vector& state) {
  return evaluate_model(m, std::span<const double>(state.data(), static_cast<std::size_t>(state.size())));
}

std::vector<std::string> render_equations(const FittedModel& m) {
  std::vector<std::string> lines;
  for (Index j = 0; j < m.beta.cols(); ++j) {
    const std::string& name = j < static_cast<Index>(m.var_names.size()) ? m.var_names[static_cast<std::size_t>(j)]
                                                                         : "y" + std::to_string(j + 1);
    std::string line = m.mode == Mode::flow ? "d" + name + "/dt = " : name + "[n+1] = ";
    bool first = true;
    for (Index i = 0; i < m.beta.rows(); ++i) {
      const double c = m.beta(i, j);
      if (c == 0.0) continue;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", std::fabs(c));
      if (first) {
        line += c < 0 ? "-" : "";
      } else {
        line += c < 0 ? " - " : " + ";
      }
      line += buf;
      const std::string term = basis::render_term(m.terms[static_cast<std::size_t>(i)], m.var_names);
      if (term != "1") line += "*" + term;
      first = false;
    }
    if (first) line += "0";
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace erfit::core
