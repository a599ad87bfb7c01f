#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "erfit/config.hpp"
#include "erfit/linalg.hpp"
#include "erfit/timeseries.hpp"

namespace erfit::estimators {

// Regression targets paired with the state rows they belong to.
struct Targets {
  Matrix states;  // rows aligned with `rates`
  Matrix rates;   // dX/dt for flows, next state for maps
};

// Central differences (x[i+1] - x[i-1]) / (2 dt) on interior rows, paired
// with the interior states. Throws InsufficientData when N < 3.
Matrix central_difference(const Matrix& x, double dt);

// Builds regression targets from a trajectory according to cfg.derivative_method.
// `supplied` is required for user_supplied and must have the same shape as x.
Targets make_targets(const TimeSeries& x, const EstimatorConfig& cfg,
                     const std::optional<Matrix>& supplied = std::nullopt);

struct ToleranceEstimate {
  double value = 0.0;
  std::vector<double> shuffle_samples;  // in shuffle order
};

// Linear-interpolation percentile, alpha in [0, 1]. Samples need not be sorted.
double percentile(std::vector<double> samples, double alpha);

// How the estimator treats the units of the x argument. `standardize` scales
// every column to unit variance; `as_given` only centers x, for callers that
// have already expressed it in meaningful units.
enum class Scaling { standardize, as_given };

// Pluggable (conditional) mutual information backend for the search driver.
class InformationEstimator {
 public:
  virtual ~InformationEstimator() = default;

  // I(x; y | z) in nats; an empty z means plain I(x; y).
  double conditional_mutual_information(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                                        Scaling x_scaling = Scaling::standardize) const {
    return estimate_cmi(x, y, z, x_scaling);
  }

  // Independence threshold for I(x; y | z) from row-permutations of y.
  // `salt` separates the random streams of different call sites.
  ToleranceEstimate shuffle_tolerance(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                                      std::uint64_t salt, Scaling x_scaling = Scaling::standardize) const {
    return estimate_tolerance(x, y, z, salt, x_scaling);
  }

  double mutual_information(const Matrix& x, const Matrix& y) const {
    return estimate_cmi(x, y, linalg::Projection::none(x.rows()), Scaling::standardize);
  }

 protected:
  virtual double estimate_cmi(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                              Scaling x_scaling) const = 0;
  virtual ToleranceEstimate estimate_tolerance(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                                               std::uint64_t salt, Scaling x_scaling) const = 0;
};

// Kraskov-Stoegbauer-Grassberger estimator (first variant, max-norm) and its
// Frenzel-Pompe conditional extension.
class KsgEstimator final : public InformationEstimator {
 public:
  explicit KsgEstimator(EstimatorConfig cfg);

  const EstimatorConfig& config() const noexcept { return cfg_; }

 protected:
  double estimate_cmi(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                      Scaling x_scaling) const override;
  ToleranceEstimate estimate_tolerance(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                                       std::uint64_t salt, Scaling x_scaling) const override;

 private:
  EstimatorConfig cfg_;
};

double mutual_information(const Matrix& x, const Matrix& y, const EstimatorConfig& cfg);
double conditional_mutual_information(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                                      const EstimatorConfig& cfg);
ToleranceEstimate shuffle_tolerance(const Matrix& x, const Matrix& y, const linalg::Projection& z,
                                    const EstimatorConfig& cfg, std::uint64_t salt = 0);

// Seed mixing shared by every randomized step (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace erfit::estimators
