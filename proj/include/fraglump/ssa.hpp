#pragma once

#include <cstdlib>
#include <map>
#include <thread>
#include <vector>

#include "fraglump/markov.hpp"
#include "fraglump/network.hpp"
#include "fraglump/rng.hpp"

namespace fraglump {

/// One sampled jump chain. states[k] is occupied on [times[k], times[k+1]);
/// an absorbing state simply has no further jumps before t_end.
struct SsaTrajectory {
  std::uint64_t master_seed = 0;
  std::uint64_t replica = 0;
  std::vector<double> times;
  std::vector<std::vector<long>> states;
};

struct SsaEnsemble {
  std::uint64_t master_seed = 0;
  int n_runs = 0;
  std::vector<double> grid;
  std::vector<std::vector<double>> mean_counts;  // [time][species]
  // per grid time: state -> number of replicas sitting in it
  std::vector<std::map<std::vector<long>, long>> occupancy;
  std::vector<SsaTrajectory> trajectories;  // filled only on request
};

inline int worker_count_from_env(int n_tasks) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("FRAGLUMP_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) hw = v;
  }
  return std::min(hw, std::max(1, n_tasks));
}

/// Direct-method simulation of one replica: exponential holding time at the
/// total rate, next reaction chosen proportionally to its propensity.
inline SsaTrajectory ssa_simulate_one(const ReactionNetwork& net,
                                      const std::vector<long>& x0, double t_end,
                                      std::uint64_t master_seed,
                                      std::uint64_t replica) {
  Philox rng(master_seed, replica);
  SsaTrajectory traj;
  traj.master_seed = master_seed;
  traj.replica = replica;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  std::vector<long> x = x0;
  double t = 0.0;
  std::vector<double> g(net.reactions.size());
  for (;;) {
    double total = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      g[j] = propensity(net, static_cast<int>(j), x);
      total += g[j];
    }
    if (total <= 0.0) break;  // absorbing: hold until t_end
    t += rng.exponential(total);
    if (t > t_end) break;
    double u = rng.u01() * total;
    std::size_t j = 0;
    for (; j + 1 < g.size(); ++j) {
      if (u < g[j]) break;
      u -= g[j];
    }
    for (const auto& [s, n] : net.reactions[j].consume) x[s] -= n;
    for (const auto& [s, n] : net.reactions[j].produce) x[s] += n;
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  return traj;
}

namespace detail {

inline const std::vector<long>& state_at(const SsaTrajectory& traj, double t) {
  std::size_t k = 0;
  while (k + 1 < traj.times.size() && traj.times[k + 1] <= t) ++k;
  return traj.states[k];
}

}  // namespace detail

/// Replica ensemble with per-replica counter-based streams. Aggregation is
/// in integers, so results do not depend on the worker count.
inline SsaEnsemble ssa_simulate(const ReactionNetwork& net,
                                const std::vector<long>& x0, double t_end,
                                int n_runs, std::uint64_t master_seed,
                                std::vector<double> grid = {},
                                bool keep_trajectories = false) {
  if (n_runs < 1) throw std::invalid_argument("ssa_simulate: n_runs < 1");
  if (grid.empty()) grid = uniform_grid(t_end, 10);
  SsaEnsemble ens;
  ens.master_seed = master_seed;
  ens.n_runs = n_runs;
  ens.grid = grid;

  const std::size_t n_species = net.species.size();
  const std::size_t n_times = grid.size();
  struct Partial {
    std::vector<std::vector<long long>> sums;
    std::vector<std::map<std::vector<long>, long>> occ;
    std::vector<SsaTrajectory> kept;
  };
  int workers = worker_count_from_env(n_runs);
  std::vector<Partial> parts(workers);
  auto run_block = [&](int w, int lo, int hi) {
    Partial& p = parts[w];
    p.sums.assign(n_times, std::vector<long long>(n_species, 0));
    p.occ.assign(n_times, {});
    for (int r = lo; r < hi; ++r) {
      SsaTrajectory traj =
          ssa_simulate_one(net, x0, t_end, master_seed, static_cast<std::uint64_t>(r));
      for (std::size_t ti = 0; ti < n_times; ++ti) {
        const std::vector<long>& s = detail::state_at(traj, grid[ti]);
        for (std::size_t i = 0; i < n_species; ++i) p.sums[ti][i] += s[i];
        p.occ[ti][s] += 1;
      }
      if (keep_trajectories) p.kept.push_back(std::move(traj));
    }
  };
  if (workers == 1) {
    run_block(0, 0, n_runs);
  } else {
    std::vector<std::thread> threads;
    int chunk = (n_runs + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      int lo = w * chunk;
      int hi = std::min(n_runs, lo + chunk);
      if (lo >= hi) break;
      threads.emplace_back(run_block, w, lo, hi);
    }
    for (auto& th : threads) th.join();
  }

  ens.mean_counts.assign(n_times, std::vector<double>(n_species, 0.0));
  ens.occupancy.assign(n_times, {});
  for (const Partial& p : parts) {
    if (p.sums.empty()) continue;
    for (std::size_t ti = 0; ti < n_times; ++ti) {
      for (std::size_t i = 0; i < n_species; ++i)
        ens.mean_counts[ti][i] += static_cast<double>(p.sums[ti][i]);
      for (const auto& [state, count] : p.occ[ti])
        ens.occupancy[ti][state] += count;
    }
    for (const SsaTrajectory& t : p.kept) ens.trajectories.push_back(t);
  }
  std::sort(ens.trajectories.begin(), ens.trajectories.end(),
            [](const SsaTrajectory& a, const SsaTrajectory& b) {
              return a.replica < b.replica;
            });
  for (auto& row : ens.mean_counts)
    for (double& v : row) v /= n_runs;
  return ens;
}

}  // namespace fraglump
