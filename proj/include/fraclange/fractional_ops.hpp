#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fraclange/grid.hpp"
#include "fraclange/special_functions.hpp"

namespace fraclange {

namespace detail {

/// b^p - a^p for 0 <= a <= b, stable when b - a << b. The direct difference
/// loses all digits on strongly graded grids where a/b -> 1.
inline double pow_diff(double a, double b, double p) {
  if (a == 0.0) return std::pow(b, p);
  double d = (b - a) / b;
  if (d > 0.25) return std::pow(b, p) - std::pow(a, p);
  return -std::pow(b, p) * std::expm1(p * std::log1p(-d));
}

}  // namespace detail

/// Riemann-Liouville fractional integral I^sigma by product integration:
/// h is taken piecewise linear between nodes and the singular moments of
/// (t - s)^{sigma-1} are integrated in closed form, so the result is exact
/// (to roundoff) for piecewise-linear h.
inline GridFunction rl_integral(const GridFunction& h, double sigma) {
  if (!(sigma > 0.0 && sigma < 2.0))
    throw std::domain_error("rl_integral: sigma must lie in (0, 2)");
  h.validate();
  const auto& t = h.grid.nodes;
  const std::size_t n_nodes = t.size();
  GridFunction out;
  out.grid = h.grid;
  out.values.assign(n_nodes, 0.0);
  const double inv_gamma = 1.0 / std::tgamma(sigma);
  for (std::size_t n = 1; n < n_nodes; ++n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double b = t[n] - t[j];
      const double a = t[n] - t[j + 1];
      const double m0 = detail::pow_diff(a, b, sigma) / sigma;
      const double m1 = detail::pow_diff(a, b, sigma + 1.0) / (sigma + 1.0);
      const double slope = (h.values[j + 1] - h.values[j]) / (t[j + 1] - t[j]);
      acc += h.values[j] * m0 + slope * (b * m0 - m1);
    }
    out.values[n] = inv_gamma * acc;
  }
  return out;
}

namespace detail {

/// Single node of the L1 Caputo derivative; O(n) work.
inline double caputo_l1_at(const GridFunction& h, double rho, std::size_t n) {
  const auto& t = h.grid.nodes;
  const double p = 1.0 - rho;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double slope = (h.values[j + 1] - h.values[j]) / (t[j + 1] - t[j]);
    acc += slope * pow_diff(t[n] - t[j + 1], t[n] - t[j], p);
  }
  return acc / std::tgamma(2.0 - rho);
}

}  // namespace detail

/// L1-scheme Caputo derivative D^rho = I^{1-rho} d/dt: piecewise-linear h
/// gives piecewise-constant slopes whose fractional integral is exact.
/// t_0 carries no Caputo value; by convention it receives a copy of the t_1
/// value so the result stays shape-compatible with its input.
inline GridFunction caputo_l1(const GridFunction& h, double rho) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::domain_error("caputo_l1: rho must lie in (0, 1)");
  h.validate();
  const std::size_t n_nodes = h.grid.nodes.size();
  GridFunction out;
  out.grid = h.grid;
  out.values.assign(n_nodes, 0.0);
  for (std::size_t n = 1; n < n_nodes; ++n) out.values[n] = detail::caputo_l1_at(h, rho, n);
  out.values[0] = out.values[1];
  return out;
}

/// Max-norm defect of the fundamental-theorem composition
/// I^rho(D^rho h) = h - h(0); an oracle self-test.
inline double compose_check(const GridFunction& h, double rho) {
  GridFunction d = caputo_l1(h, rho);
  d.values[0] = 0.0;  // D^rho h -> 0 at t = 0 for h with bounded derivative
  GridFunction composed = rl_integral(d, rho);
  double worst = 0.0;
  for (std::size_t i = 0; i < h.values.size(); ++i)
    worst = std::max(worst, std::abs(composed.values[i] - (h.values[i] - h.values[0])));
  return worst;
}

/// Product-integration weights of I^sigma on a fixed grid, precomputed once
/// so iterative callers (Picard) pay O(N^2) flops but not O(N^2) pow calls
/// per application.
class RLIntegralOperator {
 public:
  RLIntegralOperator(const TimeGrid& grid, double sigma) : grid_(grid) {
    if (!(sigma > 0.0 && sigma < 2.0))
      throw std::domain_error("RLIntegralOperator: sigma must lie in (0, 2)");
    grid_.validate();
    const auto& t = grid_.nodes;
    const std::size_t n_nodes = t.size();
    offsets_.resize(n_nodes + 1, 0);
    for (std::size_t n = 0; n < n_nodes; ++n) offsets_[n + 1] = offsets_[n] + n + 1;
    weights_.assign(offsets_[n_nodes], 0.0);
    const double inv_gamma = 1.0 / std::tgamma(sigma);
    for (std::size_t n = 1; n < n_nodes; ++n) {
      double* w = weights_.data() + offsets_[n];
      for (std::size_t j = 0; j < n; ++j) {
        const double b = t[n] - t[j];
        const double a = t[n] - t[j + 1];
        const double m0 = detail::pow_diff(a, b, sigma) / sigma;
        const double m1 = detail::pow_diff(a, b, sigma + 1.0) / (sigma + 1.0);
        const double lin = (b * m0 - m1) / (t[j + 1] - t[j]);
        w[j] += inv_gamma * (m0 - lin);
        w[j + 1] += inv_gamma * lin;
      }
    }
  }

  const TimeGrid& grid() const { return grid_; }

  std::vector<double> apply(std::span<const double> values) const {
    if (values.size() != grid_.nodes.size())
      throw std::invalid_argument("RLIntegralOperator: size mismatch");
    std::vector<double> out(values.size(), 0.0);
    for (std::size_t n = 1; n < values.size(); ++n) {
      const double* w = weights_.data() + offsets_[n];
      double acc = 0.0;
      for (std::size_t i = 0; i <= n; ++i) acc += w[i] * values[i];
      out[n] = acc;
    }
    return out;
  }

 private:
  TimeGrid grid_;
  std::vector<std::size_t> offsets_;
  std::vector<double> weights_;
};

}  // namespace fraclange
