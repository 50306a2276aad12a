#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fraclange {

enum class GridKind { uniform, graded };

/// Time grid 0 = t_0 < t_1 < ... < t_N = T. Graded grids follow
/// t_i = T (i/N)^r and cluster nodes at t = 0 to resolve the t^alpha
/// boundary layer of Caputo problems.
struct TimeGrid {
  std::vector<double> nodes;
  GridKind kind = GridKind::uniform;
  double grading = 1.0;

  std::size_t segments() const { return nodes.size() - 1; }
  double horizon() const { return nodes.back(); }

  void validate() const {
    if (nodes.size() < 3) throw std::invalid_argument("TimeGrid: need at least 2 segments");
    if (nodes.front() != 0.0) throw std::invalid_argument("TimeGrid: t_0 must be 0");
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      if (!(nodes[i] > nodes[i - 1]))
        throw std::invalid_argument("TimeGrid: nodes must be strictly increasing");
      if (!std::isfinite(nodes[i])) throw std::invalid_argument("TimeGrid: nodes must be finite");
    }
    if (grading < 1.0) throw std::invalid_argument("TimeGrid: grading exponent must be >= 1");
  }
};

inline TimeGrid uniform_grid(double T, std::size_t n) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("uniform_grid: T must be positive");
  if (n < 2) throw std::invalid_argument("uniform_grid: need at least 2 segments");
  TimeGrid g;
  g.kind = GridKind::uniform;
  g.grading = 1.0;
  g.nodes.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    g.nodes[i] = T * static_cast<double>(i) / static_cast<double>(n);
  g.nodes[n] = T;
  return g;
}

inline TimeGrid graded_grid(double T, std::size_t n, double r) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("graded_grid: T must be positive");
  if (n < 2) throw std::invalid_argument("graded_grid: need at least 2 segments");
  if (!(r >= 1.0) || !std::isfinite(r)) throw std::invalid_argument("graded_grid: r must be >= 1");
  TimeGrid g;
  g.kind = GridKind::graded;
  g.grading = r;
  g.nodes.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    g.nodes[i] = T * std::pow(static_cast<double>(i) / static_cast<double>(n), r);
  g.nodes[n] = T;
  return g;
}

/// Values sampled at the grid nodes; the lingua franca of the grid oracles.
struct GridFunction {
  TimeGrid grid;
  std::vector<double> values;

  void validate() const {
    grid.validate();
    if (values.size() != grid.nodes.size())
      throw std::invalid_argument("GridFunction: values/nodes size mismatch");
    for (double v : values)
      if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: values must be finite");
  }
};

template <class F>
GridFunction sample(const TimeGrid& grid, F&& f) {
  GridFunction g;
  g.grid = grid;
  g.values.reserve(grid.nodes.size());
  for (double t : grid.nodes) g.values.push_back(f(t));
  return g;
}

}  // namespace fraclange
