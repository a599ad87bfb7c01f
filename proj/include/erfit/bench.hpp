#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "erfit/basis.hpp"
#include "erfit/er_core.hpp"
#include "erfit/linalg.hpp"
#include "erfit/timeseries.hpp"

namespace erfit::bench {

enum class SystemName { lorenz, rossler, van_der_pol, logistic_map, coupled_logistic_network, coupled_lorenz_network };

std::string to_string(SystemName s);
SystemName parse_system_name(const std::string& text);

struct SystemSpec {
  SystemName name = SystemName::lorenz;
  std::map<std::string, double> params;
  std::size_t dims = 3;
  Mode kind = Mode::flow;
  std::size_t node_count = 1;
  // Networks only: neighbors of each node.
  std::vector<std::vector<std::size_t>> adjacency;

  double param(const std::string& key) const;
};

// Canonical parameters: Lorenz 10/28/(8/3), Roessler 0.2/0.2/5.7, Van der Pol
// mu=2, logistic r=4. Networks default to a ring of `nodes` nodes.
SystemSpec make_system(SystemName name, std::size_t nodes = 10);

// Ring adjacency: node i is coupled to i-1 and i+1 (mod n).
std::vector<std::vector<std::size_t>> ring_adjacency(std::size_t n);

// Right-hand side: dx/dt for flows, the next state for maps.
Vector system_rhs(const SystemSpec& spec, const Vector& state);

// Exact coefficients in the library ordering of the smallest degree that
// holds every term (3 for Van der Pol, 2 otherwise).
TruthModel system_truth(const SystemSpec& spec);

// A state on or near the attractor, used when no initial condition is given.
Vector default_initial_condition(const SystemSpec& spec);

using RightHandSide = std::function<Vector(const Vector&)>;

// Fixed-step RK4 for flows, direct iteration for maps; N samples including x0.
// Observation noise is Gaussian with standard deviation noise_sd times the
// per-channel standard deviation of the clean trajectory.
TimeSeries simulate(const RightHandSide& rhs, Mode kind, const Vector& x0, std::size_t n, double dt,
                    double noise_sd, std::uint64_t seed);
TimeSeries simulate(const SystemSpec& spec, const Vector& x0, std::size_t n, double dt, double noise_sd,
                    std::uint64_t seed);

// Truth re-expressed against an arbitrary list of monomial terms; terms of
// the truth absent from `terms` raise ShapeError.
Matrix embed_truth(const TruthModel& truth, std::size_t dims, std::span<const basis::TermDescriptor> terms);

struct RecoveryScore {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double coefficient_rel_error = 0.0;  // max over true nonzeros of |b_hat - b| / |b|
};

RecoveryScore score_support_recovery(const Matrix& beta, const Matrix& truth);
RecoveryScore score_support_recovery(const core::FittedModel& m, const Matrix& truth);

}  // namespace erfit::bench
