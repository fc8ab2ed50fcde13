#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fraglump {

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Dormand-Prince 5(4) pair with step-doubling control. RHS signature:
// f(t, y, dy). PostAccept runs after each accepted step and may project the
// state (e.g. clear roundoff-negative concentrations) or throw.
template <class RHS, class PostAccept>
void rk45_segment(RHS&& f, std::vector<double>& y, double t0, double t1,
                  double rel, double abs, PostAccept&& post) {
  static const double A[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
       -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
  };
  static const double C[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1};
  static const double B4[7] = {5179.0 / 57600, 0.0,  7571.0 / 16695,
                               393.0 / 640,    -92097.0 / 339200,
                               187.0 / 2100,   1.0 / 40};

  const std::size_t n = y.size();
  if (t1 == t0) return;
  double span = t1 - t0;
  double t = t0;
  double h = span / 100.0;
  std::vector<std::vector<double>> k(7, std::vector<double>(n));
  std::vector<double> ytmp(n), y5(n);
  f(t, y, k[0]);
  long steps = 0;
  const long max_steps = 50'000'000;

  while (t < t1) {
    if (++steps > max_steps)
      throw IntegrationError("step budget exhausted before reaching t1");
    if (t + h > t1) h = t1 - t;
    if (!(h > std::abs(span) * 1e-14))
      throw IntegrationError("step-size underflow at t=" + std::to_string(t));
    for (int s = 1; s < 7; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = y[i];
        for (int j = 0; j < s; ++j) acc += h * A[s][j] * k[j][i];
        ytmp[i] = acc;
      }
      f(t + C[s] * h, ytmp, k[s]);
    }
    // stage 7 sits at the 5th-order solution (FSAL)
    for (std::size_t i = 0; i < n; ++i) {
      double acc = y[i];
      for (int j = 0; j < 6; ++j) acc += h * A[6][j] * k[j][i];
      y5[i] = acc;
    }
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double y4i = y[i];
      for (int j = 0; j < 7; ++j) y4i += h * B4[j] * k[j][i];
      double sc = abs + rel * std::max(std::abs(y[i]), std::abs(y5[i]));
      double e = (y5[i] - y4i) / sc;
      err += e * e;
    }
    err = std::sqrt(err / n);
    if (err <= 1.0) {
      t += h;
      y = y5;
      post(y);
      f(t, y, k[0]);
    }
    double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    if (fac < 0.2) fac = 0.2;
    if (fac > 5.0) fac = 5.0;
    h *= fac;
  }
}

}  // namespace detail

/// Integrates dy/dt = f over a strictly increasing grid; row r is y(grid[r])
/// with row 0 the initial state.
template <class RHS, class PostAccept>
std::vector<std::vector<double>> integrate_grid(RHS&& f, std::vector<double> y,
                                                const std::vector<double>& grid,
                                                double rel, double abs,
                                                PostAccept&& post) {
  if (grid.empty()) throw std::invalid_argument("integrate_grid: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("integrate_grid: grid must increase");
  std::vector<std::vector<double>> out;
  out.push_back(y);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    detail::rk45_segment(f, y, grid[i - 1], grid[i], rel, abs, post);
    out.push_back(y);
  }
  return out;
}

template <class RHS>
std::vector<std::vector<double>> integrate_grid(RHS&& f, std::vector<double> y,
                                                const std::vector<double>& grid,
                                                double rel, double abs) {
  return integrate_grid(f, std::move(y), grid, rel, abs,
                        [](std::vector<double>&) {});
}

/// Uniform grid helper: t in [0, t_end] with `steps` intervals.
inline std::vector<double> uniform_grid(double t_end, int steps) {
  if (!(t_end > 0) || steps < 1)
    throw std::invalid_argument("uniform_grid: bad arguments");
  std::vector<double> g(steps + 1);
  for (int i = 0; i <= steps; ++i) g[i] = t_end * i / steps;
  return g;
}

}  // namespace fraglump
