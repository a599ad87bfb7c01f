#include "erfit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <span>
#include <string>

#include "erfit/errors.hpp"
#include "erfit/knn.hpp"

namespace erfit {

std::string to_string(Mode m) { return m == Mode::flow ? "flow" : "map"; }

Mode parse_mode(const std::string& text) {
  if (text == "flow") return Mode::flow;
  if (text == "map") return Mode::map;
  throw InvalidInput("unknown mode '" + text + "' (expected flow or map)");
}

std::string to_string(DerivativeMethod m) {
  switch (m) {
    case DerivativeMethod::central_difference: return "central_difference";
    case DerivativeMethod::user_supplied: return "user_supplied";
    case DerivativeMethod::none_map_mode: return "none_map_mode";
  }
  return "central_difference";
}

DerivativeMethod parse_derivative_method(const std::string& text) {
  if (text == "central_difference") return DerivativeMethod::central_difference;
  if (text == "user_supplied") return DerivativeMethod::user_supplied;
  if (text == "none_map_mode") return DerivativeMethod::none_map_mode;
  throw InvalidInput("unknown derivative method '" + text + "'");
}

void EstimatorConfig::validate(std::size_t rows) const {
  if (knn_k < 1) throw InvalidInput("knn_k must be at least 1");
  if (shuffle_count < 1) throw InvalidInput("shuffle_count must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
  if (!(jitter_scale >= 0.0) || !std::isfinite(jitter_scale)) throw InvalidInput("jitter_scale must be >= 0");
  if (!(log_base > 0.0) || log_base == 1.0 || !std::isfinite(log_base)) {
    throw InvalidInput("log_base must be positive and not 1");
  }
  if (rows != 0 && knn_k >= rows) {
    throw InsufficientData("need more than knn_k=" + std::to_string(knn_k) + " samples, got " +
                           std::to_string(rows));
  }
}

double EstimatorConfig::to_reporting_units(double nats) const { return nats / std::log(log_base); }

namespace estimators {

namespace {

using Column = std::vector<double>;

// psi(n) for n = 0..n_max; psi(0) is unused.
std::vector<double> digamma_table(std::size_t n_max) {
  std::vector<double> psi(n_max + 1, 0.0);
  if (n_max >= 1) psi[1] = -0.57721566490153286061;
  for (std::size_t n = 2; n <= n_max; ++n) psi[n] = psi[n - 1] + 1.0 / static_cast<double>(n - 1);
  return psi;
}

std::uint64_t hash_column(const double* v, Index n) {
  std::uint64_t h = 1469598103934665603ull;
  for (Index i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, v + i, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

// Standardize to zero mean and unit variance, then add seeded uniform jitter
// of +-jitter_scale (i.e. jitter_scale column standard deviations) to break
// exact ties. The jitter stream is keyed on the column contents, so a column
// gets the same jitter wherever it appears in an argument list. With
// Scaling::as_given the column is only centered and the jitter unit is 1.
Column prepare(const Matrix& m, Index c, const EstimatorConfig& cfg, Scaling scaling = Scaling::standardize) {
  const Index n = m.rows();
  Column out(static_cast<std::size_t>(n));
  const double* src = m.col(c).data();
  double mean = 0.0;
  for (Index i = 0; i < n; ++i) mean += src[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (Index i = 0; i < n; ++i) ss += (src[i] - mean) * (src[i] - mean);
  const double sd = scaling == Scaling::as_given ? 1.0 : std::sqrt(ss / static_cast<double>(n));

  if (!(sd > 0.0)) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = (src[i] - mean) / sd;
  if (cfg.jitter_scale > 0.0) {
    std::mt19937_64 rng(mix_seed(cfg.rng_seed, hash_column(src, n)));
    std::uniform_real_distribution<double> u(-cfg.jitter_scale, cfg.jitter_scale);
    for (auto& v : out) v += u(rng);
  }
  return out;
}

std::vector<Column> prepare_all(const Matrix& m, const EstimatorConfig& cfg,
                                Scaling scaling = Scaling::standardize) {
  std::vector<Column> cols;
  cols.reserve(static_cast<std::size_t>(m.cols()));
  for (Index c = 0; c < m.cols(); ++c) cols.push_back(prepare(m, c, cfg, scaling));
  return cols;
}

void check_inputs(const Matrix& x, const Matrix& y, const linalg::Projection& z, const EstimatorConfig& cfg) {
  if (x.rows() != y.rows() || (!z.empty() && z.rows() != x.rows())) {
    throw ShapeError("information estimate needs equal row counts (x: " + std::to_string(x.rows()) +
                     ", y: " + std::to_string(y.rows()) + (z.empty() ? "" : ", z: " + std::to_string(z.rows())) +
                     ")");
  }
  if (x.cols() == 0 || y.cols() == 0 || (!z.empty() && z.values().cols() == 0)) {
    throw ShapeError("information estimate needs at least one column per variable");
  }
  cfg.validate(static_cast<std::size_t>(x.rows()));
  linalg::require_finite(x, "estimator input x");
  linalg::require_finite(y, "estimator input y");
  if (!z.empty()) linalg::require_finite(z.values(), "estimator input z");
}

std::vector<std::span<const double>> spans_of(std::initializer_list<const std::vector<Column>*> groups) {
  std::vector<std::span<const double>> out;
  for (const auto* g : groups) {
    for (const auto& c : *g) out.emplace_back(c);
  }
  return out;
}

// Per-sample work shared by every (conditional) estimate: prepared columns
// and the clouds that do not involve the y variable.
class Workspace {
 public:
  Workspace(const Matrix& x, const Matrix& y, const linalg::Projection& z, const EstimatorConfig& cfg,
            Scaling x_scaling)
      : k_(cfg.knn_k),
        n_(static_cast<std::size_t>(x.rows())),
        psi_(digamma_table(n_ + 1)),
        x_(prepare_all(x, cfg, x_scaling)),
        y_(prepare_all(y, cfg)),
        conditional_(!z.empty()) {
    if (conditional_) {
      z_ = prepare_all(z.values(), cfg);
      const auto xz = spans_of({&z_, &x_});
      const auto zz = spans_of({&z_});
      xz_cloud_.emplace(xz);
      z_cloud_.emplace(zz);
    } else {
      const auto xx = spans_of({&x_});
      x_cloud_.emplace(xx);
    }
  }

  const std::vector<Column>& y() const noexcept { return y_; }

  // Estimate with `y_cols` standing in for y (the prepared y or a permutation of it).
  double estimate(const std::vector<Column>& y_cols) const {
    double total = 0.0;
    if (conditional_) {
      const auto joint_spans = spans_of({&z_, &x_, &y_cols});
      const auto yz_spans = spans_of({&z_, &y_cols});
      const knn::PointCloud joint(joint_spans);
      const knn::PointCloud yz(yz_spans);
      for (std::size_t i = 0; i < n_; ++i) {
        const double eps = joint.kth_neighbor_distance(i, k_);
        const std::size_t nxz = xz_cloud_->count_within(i, eps);
        const std::size_t nyz = yz.count_within(i, eps);
        const std::size_t nz = z_cloud_->count_within(i, eps);
        total += psi_[nxz + 1] + psi_[nyz + 1] - psi_[nz + 1];
      }
      return psi_[k_] - total / static_cast<double>(n_);
    }
    const auto joint_spans = spans_of({&x_, &y_cols});
    const auto y_spans = spans_of({&y_cols});
    const knn::PointCloud joint(joint_spans);
    const knn::PointCloud ycloud(y_spans);
    for (std::size_t i = 0; i < n_; ++i) {
      const double eps = joint.kth_neighbor_distance(i, k_);
      const std::size_t nx = x_cloud_->count_within(i, eps);
      const std::size_t ny = ycloud.count_within(i, eps);
      total += psi_[nx + 1] + psi_[ny + 1];
    }
    return psi_[k_] + psi_[n_] - total / static_cast<double>(n_);
  }

 private:
  unsigned k_;
  std::size_t n_;
  std::vector<double> psi_;
  std::vector<Column> x_, y_, z_;
  bool conditional_;
  std::optional<knn::PointCloud> x_cloud_, xz_cloud_, z_cloud_;
};

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Matrix central_difference(const Matrix& x, double dt) {
  if (x.rows() < 3) throw InsufficientData("central differences need at least 3 samples, got " +
                                           std::to_string(x.rows()));
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("sampling interval must be positive");
  const Index n = x.rows() - 2;
  return (x.bottomRows(n) - x.topRows(n)) / (2.0 * dt);
}

Targets make_targets(const TimeSeries& ts, const EstimatorConfig& cfg, const std::optional<Matrix>& supplied) {
  const Matrix& x = ts.data;
  linalg::require_finite(x, "trajectory");
  switch (cfg.derivative_method) {
    case DerivativeMethod::central_difference: {
      if (ts.mode == Mode::map) throw InvalidInput("map-mode data cannot be differentiated; use map targets");
      if (!ts.dt) throw InvalidInput("flow-mode data needs a sampling interval");
      Matrix rates = central_difference(x, *ts.dt);
      return {x.middleRows(1, x.rows() - 2), std::move(rates)};
    }
    case DerivativeMethod::user_supplied: {
      if (!supplied) throw InvalidInput("user_supplied derivatives requested but none given");
      if (supplied->rows() != x.rows() || supplied->cols() != x.cols()) {
        throw ShapeError("supplied derivatives are " + std::to_string(supplied->rows()) + "x" +
                         std::to_string(supplied->cols()) + ", trajectory is " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()));
      }
      linalg::require_finite(*supplied, "supplied derivatives");
      return {x, *supplied};
    }
    case DerivativeMethod::none_map_mode: {
      if (x.rows() < 2) throw InsufficientData("map targets need at least 2 samples");
      return {x.topRows(x.rows() - 1), x.bottomRows(x.rows() - 1)};
    }
  }
  throw InvalidInput("unknown derivative method");
}

double percentile(std::vector<double> samples, double alpha) {
  if (samples.empty()) throw InvalidInput("percentile of an empty sample");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("percentile level must lie in [0, 1]");
  std::sort(samples.begin(), samples.end());
  const double pos = alpha * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, samples.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return samples[lo] + frac * (samples[hi] - samples[lo]);
}

KsgEstimator::KsgEstimator(EstimatorConfig cfg) : cfg_(cfg) { cfg_.validate(); }

double KsgEstimator::estimate_cmi(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                                  Scaling x_scaling) const {
  check_inputs(x, y, z, cfg_);
  const Workspace ws(x, y, z, cfg_, x_scaling);
  return ws.estimate(ws.y());
}

ToleranceEstimate KsgEstimator::estimate_tolerance(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                                                   std::uint64_t salt, Scaling x_scaling) const {
  check_inputs(x, y, z, cfg_);
  const Workspace ws(x, y, z, cfg_, x_scaling);
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const std::uint64_t base = mix_seed(cfg_.rng_seed, salt);

  ToleranceEstimate out;
  out.shuffle_samples.reserve(cfg_.shuffle_count);
  std::vector<std::size_t> perm(n);
  std::vector<Column> shuffled(ws.y().size(), Column(n));
  for (unsigned s = 0; s < cfg_.shuffle_count; ++s) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(base, s));
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t c = 0; c < shuffled.size(); ++c) {
      for (std::size_t i = 0; i < n; ++i) shuffled[c][i] = ws.y()[c][perm[i]];
    }
    out.shuffle_samples.push_back(ws.estimate(shuffled));
  }
  out.value = percentile(out.shuffle_samples, cfg_.alpha);
  return out;
}

double mutual_information(const Matrix& x, const Matrix& y, const EstimatorConfig& cfg) {
  return KsgEstimator(cfg).mutual_information(x, y);
}

double conditional_mutual_information(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                                      const EstimatorConfig& cfg) {
  return KsgEstimator(cfg).conditional_mutual_information(x, y, z);
}

ToleranceEstimate shuffle_tolerance(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                                    const EstimatorConfig& cfg, std::uint64_t salt) {
  return KsgEstimator(cfg).shuffle_tolerance(x, y, z, salt);
}

}  // namespace estimators
}  // namespace erfit
