#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraclange/scalar_solver.hpp"
#include "fraclange/spectral_solver.hpp"

namespace fraclange {

/// Raised for malformed configuration files; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  std::size_t n_time = 1024;
  double grading = 0.0;  ///< 0 = pick default_grading(alpha)
  std::size_t n_space = 64;
};

struct ScalarRunConfig {
  ScalarProblem problem;
  GridConfig grid;
  double tolerance = 1e-2;
  std::optional<std::string> out;
};

struct SpectralRunConfig {
  SpectralProblem problem;
  GridConfig grid;
  double tolerance = 1e-2;
  std::optional<std::string> out;
};

namespace detail {

/// Unknown keys are a hard error: a typo in "alpha" must not silently fall
/// back to a default order.
inline void check_keys(const nlohmann::json& obj, const std::string& ctx,
                       std::initializer_list<const char*> required,
                       std::initializer_list<const char*> optional) {
  if (!obj.is_object()) throw ConfigError(ctx + ": expected an object");
  for (const char* key : required)
    if (!obj.contains(key)) throw ConfigError(ctx + ": missing key '" + key + "'");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* k : required) known = known || key == k;
    for (const char* k : optional) known = known || key == k;
    if (!known) throw ConfigError(ctx + ": unknown key '" + key + "'");
  }
}

inline double number(const nlohmann::json& obj, const std::string& ctx, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(ctx + ": '" + key + "' must be a number");
  return v.get<double>();
}

inline std::size_t index(const nlohmann::json& obj, const std::string& ctx, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw ConfigError(ctx + ": '" + key + "' must be a non-negative integer");
  long long n = v.get<long long>();
  if (n < 0) throw ConfigError(ctx + ": '" + key + "' must be a non-negative integer");
  return static_cast<std::size_t>(n);
}

inline Forcing parse_forcing(const nlohmann::json& arr, const std::string& ctx) {
  if (!arr.is_array()) throw ConfigError(ctx + ": 'forcing' must be an array");
  Forcing f;
  for (const auto& term : arr) {
    check_keys(term, ctx + ".forcing[]", {"c", "p"}, {});
    f.push_back({number(term, ctx, "c"), number(term, ctx, "p")});
  }
  return f;
}

inline FractionalOrders parse_orders(const nlohmann::json& j, const std::string& ctx) {
  return {number(j, ctx, "alpha"), number(j, ctx, "beta"), number(j, ctx, "T")};
}

inline GridConfig parse_grid(const nlohmann::json& j, const std::string& ctx) {
  GridConfig g;
  if (!j.contains("grid")) return g;
  const auto& obj = j.at("grid");
  check_keys(obj, ctx + ".grid", {}, {"n_time", "grading", "n_space"});
  if (obj.contains("n_time")) g.n_time = index(obj, ctx + ".grid", "n_time");
  if (obj.contains("grading")) g.grading = number(obj, ctx + ".grid", "grading");
  if (obj.contains("n_space")) g.n_space = index(obj, ctx + ".grid", "n_space");
  return g;
}

inline OperatorSpec parse_operator(const nlohmann::json& obj, const std::string& ctx) {
  check_keys(obj, ctx, {"kind"}, {"L", "eigenvalues"});
  const std::string kind = obj.at("kind").get<std::string>();
  if (kind == "dirichlet_laplacian_1d") {
    if (obj.contains("eigenvalues"))
      throw ConfigError(ctx + ": 'eigenvalues' does not apply to the Laplacian");
    double length = obj.contains("L") ? number(obj, ctx, "L") : M_PI;
    return dirichlet_laplacian_1d(length);
  }
  if (kind == "explicit") {
    if (obj.contains("L")) throw ConfigError(ctx + ": 'L' does not apply to explicit operators");
    if (!obj.contains("eigenvalues")) throw ConfigError(ctx + ": explicit operator needs 'eigenvalues'");
    std::vector<double> lams;
    for (const auto& v : obj.at("eigenvalues")) {
      if (!v.is_number()) throw ConfigError(ctx + ": eigenvalues must be numbers");
      lams.push_back(v.get<double>());
    }
    return explicit_operator(std::move(lams));
  }
  throw ConfigError(ctx + ": unknown operator kind '" + kind + "'");
}

}  // namespace detail

/// Scalar-problem configuration: alpha, beta, T, lambda, phi, psi, forcing,
/// plus grid/tolerance/out.
inline ScalarRunConfig parse_scalar_config(const nlohmann::json& j) {
  detail::check_keys(j, "config", {"alpha", "beta", "T", "lambda", "phi", "psi"},
                     {"forcing", "grid", "tolerance", "out"});
  ScalarRunConfig cfg;
  cfg.problem.orders = detail::parse_orders(j, "config");
  cfg.problem.lambda = detail::number(j, "config", "lambda");
  cfg.problem.phi = detail::number(j, "config", "phi");
  cfg.problem.psi = detail::number(j, "config", "psi");
  if (j.contains("forcing")) cfg.problem.forcing = detail::parse_forcing(j.at("forcing"), "config");
  cfg.grid = detail::parse_grid(j, "config");
  if (j.contains("tolerance")) cfg.tolerance = detail::number(j, "config", "tolerance");
  if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  try {
    cfg.problem.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (cfg.grid.n_time < 2) throw ConfigError("config: grid.n_time must be >= 2");
  return cfg;
}

/// Spectral-problem configuration: alpha, beta, T, operator, modes, epsilon,
/// plus grid/tolerance/out.
inline SpectralRunConfig parse_spectral_config(const nlohmann::json& j) {
  detail::check_keys(j, "config", {"alpha", "beta", "T", "operator", "modes"},
                     {"epsilon", "grid", "tolerance", "out"});
  SpectralRunConfig cfg;
  cfg.problem.orders = detail::parse_orders(j, "config");
  cfg.problem.op = detail::parse_operator(j.at("operator"), "config.operator");
  if (j.contains("epsilon")) cfg.problem.epsilon = detail::number(j, "config", "epsilon");
  const auto& modes = j.at("modes");
  if (!modes.is_array() || modes.empty())
    throw ConfigError("config: 'modes' must be a non-empty array");
  for (const auto& mj : modes) {
    detail::check_keys(mj, "config.modes[]", {"k", "phi", "psi"}, {"forcing", "lambda"});
    ModeSpec m;
    m.k = detail::index(mj, "config.modes[]", "k");
    m.phi = detail::number(mj, "config.modes[]", "phi");
    m.psi = detail::number(mj, "config.modes[]", "psi");
    m.lambda = mj.contains("lambda") ? detail::number(mj, "config.modes[]", "lambda")
                                     : cfg.problem.op.eigenvalue(m.k);
    if (mj.contains("forcing")) m.forcing = detail::parse_forcing(mj.at("forcing"), "config.modes[]");
    cfg.problem.modes.push_back(std::move(m));
  }
  cfg.grid = detail::parse_grid(j, "config");
  if (j.contains("tolerance")) cfg.tolerance = detail::number(j, "config", "tolerance");
  if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  try {
    cfg.problem.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (cfg.grid.n_time < 2) throw ConfigError("config: grid.n_time must be >= 2");
  return cfg;
}

inline nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return j;
}

/// Time grid described by a config: graded with the given (or default)
/// exponent; grading 1 yields the uniform grid.
inline TimeGrid config_time_grid(const FractionalOrders& orders, const GridConfig& g) {
  double r = g.grading > 0.0 ? g.grading : default_grading(orders.alpha);
  if (r == 1.0) return uniform_grid(orders.T, g.n_time);
  return graded_grid(orders.T, g.n_time, r);
}

}  // namespace fraclange
