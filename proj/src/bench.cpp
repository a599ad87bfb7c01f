#include "erfit/bench.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "erfit/errors.hpp"

namespace erfit::bench {

namespace {

constexpr std::pair<SystemName, const char*> kSystemNames[] = {
    {SystemName::lorenz, "lorenz"},
    {SystemName::rossler, "rossler"},
    {SystemName::van_der_pol, "van_der_pol"},
    {SystemName::logistic_map, "logistic_map"},
    {SystemName::coupled_logistic_network, "coupled_logistic_network"},
    {SystemName::coupled_lorenz_network, "coupled_lorenz_network"},
};

// Accumulates monomial coefficients per target dimension.
class PolynomialBuilder {
 public:
  PolynomialBuilder(std::size_t dims, unsigned degree)
      : dims_(dims), degree_(degree), terms_(basis::polynomial_terms(dims, degree)) {
    coef_ = Matrix::Zero(static_cast<Index>(terms_.size()), static_cast<Index>(dims));
  }

  // Adds `value` * prod x_v^p for (v, p) in `powers` to equation `dim`.
  void add(std::size_t dim, std::initializer_list<std::pair<std::size_t, unsigned>> powers, double value) {
    std::vector<unsigned> e(dims_, 0);
    for (const auto& [v, p] : powers) e[v] += p;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (terms_[i].exponents == e) {
        coef_(static_cast<Index>(i), static_cast<Index>(dim)) += value;
        return;
      }
    }
    throw ShapeError("term outside the truth library");
  }

  TruthModel finish() const { return {degree_, coef_}; }

 private:
  std::size_t dims_;
  unsigned degree_;
  std::vector<basis::TermDescriptor> terms_;
  Matrix coef_;
};

double logistic(double r, double x) { return r * x * (1.0 - x); }

std::vector<std::size_t> neighbors_of(const SystemSpec& spec, std::size_t node) {
  if (node >= spec.adjacency.size()) return {};
  std::set<std::size_t> uniq(spec.adjacency[node].begin(), spec.adjacency[node].end());
  uniq.erase(node);
  return {uniq.begin(), uniq.end()};
}

std::vector<std::string> var_names_for(const SystemSpec& spec) {
  switch (spec.name) {
    case SystemName::lorenz:
    case SystemName::rossler: return {"x", "y", "z"};
    case SystemName::van_der_pol: return {"x", "y"};
    case SystemName::logistic_map: return {"x"};
    case SystemName::coupled_logistic_network: return basis::default_var_names(spec.dims);
    case SystemName::coupled_lorenz_network: {
      std::vector<std::string> names;
      for (std::size_t i = 0; i < spec.node_count; ++i) {
        for (const char* c : {"x", "y", "z"}) names.push_back(c + std::to_string(i + 1));
      }
      return names;
    }
  }
  return basis::default_var_names(spec.dims);
}

}  // namespace

std::string to_string(SystemName s) {
  for (const auto& [name, text] : kSystemNames) {
    if (name == s) return text;
  }
  return "lorenz";
}

SystemName parse_system_name(const std::string& text) {
  for (const auto& [name, t] : kSystemNames) {
    if (text == t) return name;
  }
  throw InvalidInput("unknown system '" + text + "'");
}

double SystemSpec::param(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw InvalidInput("system " + to_string(name) + " has no parameter '" + key + "'");
  return it->second;
}

std::vector<std::vector<std::size_t>> ring_adjacency(std::size_t n) {
  std::vector<std::vector<std::size_t>> adj(n);
  if (n < 2) return adj;
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::size_t> nb{(i + n - 1) % n, (i + 1) % n};
    adj[i].assign(nb.begin(), nb.end());
  }
  return adj;
}

SystemSpec make_system(SystemName name, std::size_t nodes) {
  SystemSpec s;
  s.name = name;
  switch (name) {
    case SystemName::lorenz:
      s.params = {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}};
      s.dims = 3;
      break;
    case SystemName::rossler:
      s.params = {{"a", 0.2}, {"b", 0.2}, {"c", 5.7}};
      s.dims = 3;
      break;
    case SystemName::van_der_pol:
      s.params = {{"mu", 2.0}};
      s.dims = 2;
      break;
    case SystemName::logistic_map:
      s.params = {{"r", 4.0}};
      s.dims = 1;
      s.kind = Mode::map;
      break;
    case SystemName::coupled_logistic_network:
      if (nodes == 0) throw InvalidInput("network needs at least one node");
      s.params = {{"r", 4.0}, {"coupling", 0.3}};
      s.node_count = nodes;
      s.dims = nodes;
      s.kind = Mode::map;
      s.adjacency = ring_adjacency(nodes);
      break;
    case SystemName::coupled_lorenz_network:
      if (nodes == 0) throw InvalidInput("network needs at least one node");
      s.params = {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}, {"coupling", 0.5}};
      s.node_count = nodes;
      s.dims = 3 * nodes;
      s.adjacency = ring_adjacency(nodes);
      break;
  }
  return s;
}

Vector system_rhs(const SystemSpec& spec, const Vector& x) {
  if (x.size() != static_cast<Index>(spec.dims)) {
    throw ShapeError(to_string(spec.name) + " expects " + std::to_string(spec.dims) + " state variables, got " +
                     std::to_string(x.size()));
  }
  Vector out(x.size());
  switch (spec.name) {
    case SystemName::lorenz: {
      const double sigma = spec.param("sigma"), rho = spec.param("rho"), beta = spec.param("beta");
      out << sigma * (x(1) - x(0)), x(0) * (rho - x(2)) - x(1), x(0) * x(1) - beta * x(2);
      break;
    }
    case SystemName::rossler: {
      const double a = spec.param("a"), b = spec.param("b"), c = spec.param("c");
      out << -x(1) - x(2), x(0) + a * x(1), b + x(2) * (x(0) - c);
      break;
    }
    case SystemName::van_der_pol: {
      const double mu = spec.param("mu");
      out << x(1), mu * (1.0 - x(0) * x(0)) * x(1) - x(0);
      break;
    }
    case SystemName::logistic_map:
      out(0) = logistic(spec.param("r"), x(0));
      break;
    case SystemName::coupled_logistic_network: {
      const double r = spec.param("r"), eps = spec.param("coupling");
      for (std::size_t i = 0; i < spec.node_count; ++i) {
        const auto nb = neighbors_of(spec, i);
        double mean_nb = 0.0;
        for (std::size_t j : nb) mean_nb += logistic(r, x(static_cast<Index>(j)));
        const double own = logistic(r, x(static_cast<Index>(i)));
        out(static_cast<Index>(i)) =
            nb.empty() ? own : (1.0 - eps) * own + eps * mean_nb / static_cast<double>(nb.size());
      }
      break;
    }
    case SystemName::coupled_lorenz_network: {
      const double sigma = spec.param("sigma"), rho = spec.param("rho"), beta = spec.param("beta");
      const double c = spec.param("coupling");
      for (std::size_t i = 0; i < spec.node_count; ++i) {
        const auto b = static_cast<Index>(3 * i);
        double diffusion = 0.0;
        for (std::size_t j : neighbors_of(spec, i)) diffusion += x(static_cast<Index>(3 * j)) - x(b);
        out(b) = sigma * (x(b + 1) - x(b)) + c * diffusion;
        out(b + 1) = x(b) * (rho - x(b + 2)) - x(b + 1);
        out(b + 2) = x(b) * x(b + 1) - beta * x(b + 2);
      }
      break;
    }
  }
  return out;
}

TruthModel system_truth(const SystemSpec& spec) {
  switch (spec.name) {
    case SystemName::lorenz: {
      const double sigma = spec.param("sigma"), rho = spec.param("rho"), beta = spec.param("beta");
      PolynomialBuilder p(3, 2);
      p.add(0, {{1, 1}}, sigma);
      p.add(0, {{0, 1}}, -sigma);
      p.add(1, {{0, 1}}, rho);
      p.add(1, {{1, 1}}, -1.0);
      p.add(1, {{0, 1}, {2, 1}}, -1.0);
      p.add(2, {{0, 1}, {1, 1}}, 1.0);
      p.add(2, {{2, 1}}, -beta);
      return p.finish();
    }
    case SystemName::rossler: {
      const double a = spec.param("a"), b = spec.param("b"), c = spec.param("c");
      PolynomialBuilder p(3, 2);
      p.add(0, {{1, 1}}, -1.0);
      p.add(0, {{2, 1}}, -1.0);
      p.add(1, {{0, 1}}, 1.0);
      p.add(1, {{1, 1}}, a);
      p.add(2, {}, b);
      p.add(2, {{0, 1}, {2, 1}}, 1.0);
      p.add(2, {{2, 1}}, -c);
      return p.finish();
    }
    case SystemName::van_der_pol: {
      const double mu = spec.param("mu");
      PolynomialBuilder p(2, 3);
      p.add(0, {{1, 1}}, 1.0);
      p.add(1, {{1, 1}}, mu);
      p.add(1, {{0, 2}, {1, 1}}, -mu);
      p.add(1, {{0, 1}}, -1.0);
      return p.finish();
    }
    case SystemName::logistic_map: {
      const double r = spec.param("r");
      PolynomialBuilder p(1, 2);
      p.add(0, {{0, 1}}, r);
      p.add(0, {{0, 2}}, -r);
      return p.finish();
    }
    case SystemName::coupled_logistic_network: {
      const double r = spec.param("r"), eps = spec.param("coupling");
      PolynomialBuilder p(spec.dims, 2);
      for (std::size_t i = 0; i < spec.node_count; ++i) {
        const auto nb = neighbors_of(spec, i);
        const double self = nb.empty() ? 1.0 : 1.0 - eps;
        p.add(i, {{i, 1}}, self * r);
        p.add(i, {{i, 2}}, -self * r);
        for (std::size_t j : nb) {
          const double w = eps / static_cast<double>(nb.size());
          p.add(i, {{j, 1}}, w * r);
          p.add(i, {{j, 2}}, -w * r);
        }
      }
      return p.finish();
    }
    case SystemName::coupled_lorenz_network: {
      const double sigma = spec.param("sigma"), rho = spec.param("rho"), beta = spec.param("beta");
      const double c = spec.param("coupling");
      PolynomialBuilder p(spec.dims, 2);
      for (std::size_t i = 0; i < spec.node_count; ++i) {
        const std::size_t x = 3 * i, y = x + 1, z = x + 2;
        const auto nb = neighbors_of(spec, i);
        p.add(x, {{y, 1}}, sigma);
        p.add(x, {{x, 1}}, -sigma - c * static_cast<double>(nb.size()));
        for (std::size_t j : nb) p.add(x, {{3 * j, 1}}, c);
        p.add(y, {{x, 1}}, rho);
        p.add(y, {{y, 1}}, -1.0);
        p.add(y, {{x, 1}, {z, 1}}, -1.0);
        p.add(z, {{x, 1}, {y, 1}}, 1.0);
        p.add(z, {{z, 1}}, -beta);
      }
      return p.finish();
    }
  }
  throw InvalidInput("unknown system");
}

Vector default_initial_condition(const SystemSpec& spec) {
  Vector x0(static_cast<Index>(spec.dims));
  switch (spec.name) {
    case SystemName::lorenz: x0 << -8.0, 7.0, 27.0; break;
    case SystemName::rossler: x0 << 1.0, 1.0, 0.0; break;
    case SystemName::van_der_pol: x0 << 2.0, 0.0; break;
    case SystemName::logistic_map: x0 << 0.3; break;
    case SystemName::coupled_logistic_network:
      for (Index i = 0; i < x0.size(); ++i) x0(i) = 0.1 + 0.8 * std::fmod(0.618033988749895 * (i + 1), 1.0);
      break;
    case SystemName::coupled_lorenz_network:
      for (std::size_t i = 0; i < spec.node_count; ++i) {
        const auto b = static_cast<Index>(3 * i);
        const double shift = static_cast<double>(i) * 0.5;
        x0(b) = -8.0 + shift;
        x0(b + 1) = 7.0 - shift;
        x0(b + 2) = 27.0;
      }
      break;
  }
  return x0;
}

TimeSeries simulate(const RightHandSide& rhs, Mode kind, const Vector& x0, std::size_t n, double dt,
                    double noise_sd, std::uint64_t seed) {
  if (n < 2) throw InvalidInput("simulation needs at least 2 samples");
  if (kind == Mode::flow && !(dt > 0.0 && std::isfinite(dt))) throw InvalidInput("flow simulation needs dt > 0");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw InvalidInput("noise level must be >= 0");
  if (!x0.allFinite()) throw InvalidInput("initial condition contains non-finite entries");

  TimeSeries ts;
  ts.mode = kind;
  if (kind == Mode::flow) ts.dt = dt;
  ts.data.resize(static_cast<Index>(n), x0.size());
  Vector x = x0;
  ts.data.row(0) = x.transpose();
  for (std::size_t step = 1; step < n; ++step) {
    if (kind == Mode::flow) {
      const Vector k1 = rhs(x);
      const Vector k2 = rhs(x + 0.5 * dt * k1);
      const Vector k3 = rhs(x + 0.5 * dt * k2);
      const Vector k4 = rhs(x + dt * k3);
      x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      x = rhs(x);
    }
    if (!x.allFinite()) throw DivergenceError("trajectory diverged at step " + std::to_string(step));
    ts.data.row(static_cast<Index>(step)) = x.transpose();
  }

  if (noise_sd > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index c = 0; c < ts.data.cols(); ++c) {
      const auto col = ts.data.col(c);
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      for (Index i = 0; i < ts.data.rows(); ++i) ts.data(i, c) += noise_sd * sd * normal(rng);
    }
  }
  ts.var_names = basis::default_var_names(static_cast<std::size_t>(x0.size()));
  return ts;
}

TimeSeries simulate(const SystemSpec& spec, const Vector& x0, std::size_t n, double dt, double noise_sd,
                    std::uint64_t seed) {
  if (x0.size() != static_cast<Index>(spec.dims)) {
    throw ShapeError(to_string(spec.name) + " needs an initial condition of length " + std::to_string(spec.dims));
  }
  auto ts = simulate([&spec](const Vector& x) { return system_rhs(spec, x); }, spec.kind, x0, n, dt, noise_sd,
                     seed);
  ts.var_names = var_names_for(spec);
  ts.truth = system_truth(spec);
  return ts;
}

Matrix embed_truth(const TruthModel& truth, std::size_t dims, std::span<const basis::TermDescriptor> terms) {
  const auto source = basis::polynomial_terms(dims, truth.degree);
  if (truth.coefficients.rows() != static_cast<Index>(source.size()) ||
      truth.coefficients.cols() != static_cast<Index>(dims)) {
    throw ShapeError("truth matrix does not match its declared library");
  }
  Matrix out = Matrix::Zero(static_cast<Index>(terms.size()), static_cast<Index>(dims));
  for (Index i = 0; i < truth.coefficients.rows(); ++i) {
    for (Index j = 0; j < truth.coefficients.cols(); ++j) {
      const double v = truth.coefficients(i, j);
      if (v == 0.0) continue;
      const auto& e = source[static_cast<std::size_t>(i)].exponents;
      auto it = std::find_if(terms.begin(), terms.end(),
                             [&](const basis::TermDescriptor& t) { return t.is_monomial() && t.exponents == e; });
      if (it == terms.end()) throw ShapeError("library lacks a term of the true model");
      out(static_cast<Index>(it - terms.begin()), j) = v;
    }
  }
  return out;
}

RecoveryScore score_support_recovery(const Matrix& beta, const Matrix& truth) {
  if (beta.rows() != truth.rows() || beta.cols() != truth.cols()) {
    throw ShapeError("score: model is " + std::to_string(beta.rows()) + "x" + std::to_string(beta.cols()) +
                     ", truth is " + std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()));
  }
  RecoveryScore s;
  for (Index j = 0; j < beta.cols(); ++j) {
    for (Index i = 0; i < beta.rows(); ++i) {
      const bool est = beta(i, j) != 0.0;
      const bool tru = truth(i, j) != 0.0;
      if (est && tru) ++s.true_positives;
      if (est && !tru) ++s.false_positives;
      if (!est && tru) ++s.false_negatives;
      if (tru) {
        s.coefficient_rel_error =
            std::max(s.coefficient_rel_error, std::fabs(beta(i, j) - truth(i, j)) / std::fabs(truth(i, j)));
      }
    }
  }
  return s;
}

RecoveryScore score_support_recovery(const core::FittedModel& m, const Matrix& truth) {
  return score_support_recovery(m.beta, truth);
}

}  // namespace erfit::bench
