#pragma once

#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "fraglump/integrator.hpp"
#include "fraglump/network.hpp"

namespace fraglump {

/// Finite CTMC over count-vector states with sparse off-diagonal weights
/// w(x,y) and an initial distribution.
struct MarkovGraph {
  std::vector<std::vector<long>> states;
  std::vector<std::string> labels;
  std::vector<std::vector<std::pair<int, double>>> edges;  // sorted by target
  std::vector<double> pi0;

  int find_state(const std::vector<long>& x) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i] == x) return static_cast<int>(i);
    return -1;
  }

  double weight(int x, int y) const {
    for (const auto& [to, w] : edges.at(x))
      if (to == y) return w;
    return 0.0;
  }

  double exit_rate(int x) const {
    double s = 0;
    for (const auto& [to, w] : edges.at(x)) s += w;
    return s;
  }

  std::size_t size() const { return states.size(); }
};

namespace detail {

inline std::string state_label(const ReactionNetwork& net,
                               const std::vector<long>& x) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) continue;
    if (!first) out += ",";
    first = false;
    if (x[i] != 1) out += std::to_string(x[i]);
    out += net.species[i].name;
  }
  out += "}";
  return out;
}

struct VecHash {
  std::size_t operator()(const std::vector<long>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (long x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9E3779B97F4A7C15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace detail

/// Breadth-first closure of x0 under positive-propensity reactions, with
/// the generator weights w(x, x + nu_j) summed over reactions.
inline MarkovGraph build_ctmc(const ReactionNetwork& net,
                              const std::vector<long>& x0,
                              std::size_t state_cap = 100000) {
  if (x0.size() != net.species.size())
    throw std::invalid_argument("build_ctmc: state dimension mismatch");
  for (long v : x0)
    if (v < 0) throw std::invalid_argument("build_ctmc: negative count");
  MarkovGraph chain;
  std::unordered_map<std::vector<long>, int, detail::VecHash> index;
  chain.states.push_back(x0);
  index.emplace(x0, 0);
  for (std::size_t head = 0; head < chain.states.size(); ++head) {
    std::vector<long> x = chain.states[head];
    std::map<int, double> row;
    for (std::size_t j = 0; j < net.reactions.size(); ++j) {
      double g = propensity(net, static_cast<int>(j), x);
      if (g <= 0) continue;
      std::vector<long> y = x;
      for (const auto& [s, n] : net.reactions[j].consume) y[s] -= n;
      for (const auto& [s, n] : net.reactions[j].produce) y[s] += n;
      auto it = index.find(y);
      int target;
      if (it == index.end()) {
        if (chain.states.size() >= state_cap)
          throw CapExceeded("state space exceeds the configured cap",
                            chain.states.size());
        target = static_cast<int>(chain.states.size());
        chain.states.push_back(y);
        index.emplace(std::move(y), target);
      } else {
        target = it->second;
      }
      row[target] += g;
    }
    chain.edges.emplace_back(row.begin(), row.end());
  }
  chain.pi0.assign(chain.states.size(), 0.0);
  chain.pi0[0] = 1.0;
  chain.labels.reserve(chain.states.size());
  for (const auto& s : chain.states)
    chain.labels.push_back(detail::state_label(net, s));
  return chain;
}

struct DistributionTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> dist;  // row per time, column per state
};

/// Transient distribution by adaptive Runge-Kutta on dp/dt = Q^T p.
/// Row sums of the generator vanish, so mass stays at 1 up to roundoff.
inline DistributionTrajectory cme_integrate(const MarkovGraph& chain,
                                            const std::vector<double>& t_grid,
                                            double tol = 1e-6) {
  if (chain.pi0.size() != chain.size())
    throw std::invalid_argument("cme_integrate: bad initial distribution");
  auto rhs = [&](double, const std::vector<double>& p, std::vector<double>& dp) {
    dp.assign(p.size(), 0.0);
    for (std::size_t x = 0; x < chain.size(); ++x) {
      if (p[x] == 0.0 && chain.edges[x].empty()) continue;
      for (const auto& [y, w] : chain.edges[x]) {
        double flow = w * p[x];
        dp[y] += flow;
        dp[x] -= flow;
      }
    }
  };
  DistributionTrajectory out;
  out.times = t_grid;
  out.dist = integrate_grid(rhs, chain.pi0, t_grid, tol, tol * 1e-3);
  return out;
}

/// Same transient problem by uniformization; an independent solution route
/// used to cross-check the Runge-Kutta integrator.
inline DistributionTrajectory cme_integrate_uniformization(
    const MarkovGraph& chain, const std::vector<double>& t_grid,
    double tol = 1e-6) {
  double lambda = 0.0;
  for (std::size_t x = 0; x < chain.size(); ++x)
    lambda = std::max(lambda, chain.exit_rate(static_cast<int>(x)));
  lambda = lambda * 1.02 + 1e-9;

  auto step_p = [&](const std::vector<double>& v) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t x = 0; x < chain.size(); ++x) {
      double stay = 1.0 - chain.exit_rate(static_cast<int>(x)) / lambda;
      out[x] += stay * v[x];
      for (const auto& [y, w] : chain.edges[x]) out[y] += v[x] * w / lambda;
    }
    return out;
  };

  DistributionTrajectory out;
  out.times = t_grid;
  std::vector<double> p = chain.pi0;
  out.dist.push_back(p);
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    double dt = t_grid[i] - t_grid[i - 1];
    if (!(dt > 0))
      throw std::invalid_argument("cme_integrate_uniformization: bad grid");
    double mu = lambda * dt;
    if (mu > 5000.0)
      throw IntegrationError(
          "uniformization truncation budget exceeded; refine the grid");
    // Poisson(mu) weights by stable upward recurrence
    std::vector<double> next(p.size(), 0.0);
    std::vector<double> v = p;
    double log_w = -mu;  // log weight of k = 0
    double cumulative = 0.0;
    for (long k = 0; k < 200000; ++k) {
      if (k > 0) {
        log_w += std::log(mu / k);
        v = step_p(v);
      }
      double w = std::exp(log_w);
      if (w > 0) {
        for (std::size_t s = 0; s < v.size(); ++s) next[s] += w * v[s];
        cumulative += w;
      }
      if (cumulative >= 1.0 - tol * 1e-3 && k > mu) break;
    }
    p = std::move(next);
    out.dist.push_back(p);
  }
  return out;
}

/// E[X_t] per species from a distribution trajectory.
inline std::vector<std::vector<double>> cme_mean(
    const DistributionTrajectory& traj, const MarkovGraph& chain) {
  std::size_t n_species = chain.states.empty() ? 0 : chain.states[0].size();
  std::vector<std::vector<double>> out;
  for (const auto& p : traj.dist) {
    if (p.size() != chain.size())
      throw std::invalid_argument("cme_mean: dimension mismatch");
    std::vector<double> mean(n_species, 0.0);
    for (std::size_t x = 0; x < chain.size(); ++x)
      for (std::size_t i = 0; i < n_species; ++i)
        mean[i] += p[x] * static_cast<double>(chain.states[x][i]);
    out.push_back(std::move(mean));
  }
  return out;
}

/// dz/dt of the mass-action system at z: sum_j nu_j f_j(z).
inline std::vector<double> ode_rhs(const ReactionNetwork& net,
                                   const std::vector<double>& z) {
  std::vector<double> dz(z.size(), 0.0);
  for (std::size_t j = 0; j < net.reactions.size(); ++j) {
    double f = net.reactions[j].k;
    for (const auto& [s, n] : net.reactions[j].consume)
      for (int t = 0; t < n; ++t) f *= z[s];
    if (f == 0) continue;
    for (const auto& [s, n] : net.reactions[j].consume) dz[s] -= f * n;
    for (const auto& [s, n] : net.reactions[j].produce) dz[s] += f * n;
  }
  return dz;
}

/// Mass-action ODE solution over the grid; concentrations may dip below
/// zero only within abs_tol (cleared), anything worse is an error.
inline std::vector<std::vector<double>> ode_integrate(
    const ReactionNetwork& net, const std::vector<double>& z0,
    const std::vector<double>& t_grid, double rel_tol = 1e-6,
    double abs_tol = 1e-9) {
  if (z0.size() != net.species.size())
    throw std::invalid_argument("ode_integrate: state dimension mismatch");
  for (double v : z0)
    if (v < 0)
      throw std::invalid_argument("ode_integrate: negative concentration");
  auto rhs = [&](double, const std::vector<double>& z, std::vector<double>& dz) {
    dz = ode_rhs(net, z);
  };
  auto clamp = [abs_tol](std::vector<double>& z) {
    for (double& v : z) {
      if (v < -abs_tol)
        throw IntegrationError(
            "negative concentration beyond abs_tol; the system left the "
            "physical region");
      if (v < 0) v = 0.0;
    }
  };
  return integrate_grid(rhs, z0, t_grid, rel_tol, abs_tol, clamp);
}

}  // namespace fraglump
