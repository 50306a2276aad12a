#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclange/detail/big_float.hpp"

namespace fraclange {

/// Largest x with Gamma(x) finite in double precision.
inline constexpr double kGammaOverflowArg = 171.6243769563027;

/// Euler gamma function for positive or negative non-integer arguments.
/// Throws std::domain_error at the poles and std::overflow_error past the
/// representable range.
inline double gamma(double x) {
  if (!std::isfinite(x)) throw std::domain_error("gamma: argument must be finite");
  if (x <= 0.0 && x == std::floor(x))
    throw std::domain_error("gamma: pole at non-positive integer argument " + std::to_string(x));
  if (x > kGammaOverflowArg)
    throw std::overflow_error("gamma: result exceeds double range for x = " + std::to_string(x));
  return std::tgamma(x);
}

namespace detail {

/// sin(pi*x) with exact argument reduction at the integers.
inline double sin_pi(double x) {
  double k = std::nearbyint(x);
  double r = x - k;  // |r| <= 0.5, exact
  double s = std::sin(M_PI * r);
  return std::fmod(k, 2.0) == 0.0 ? s : -s;
}

/// 1/Gamma(x) on the whole real line; exactly zero at the poles.
inline double reciprocal_gamma(double x) {
  if (x >= 0.5) {
    if (x > kGammaOverflowArg) return 0.0;
    return 1.0 / std::tgamma(x);
  }
  double s = sin_pi(x);
  if (s == 0.0) return 0.0;
  double y = 1.0 - x;  // > 0.5
  if (y > kGammaOverflowArg) {
    // Not reachable from the asymptotic walk (it stops at the envelope
    // minimum first); saturate rather than produce NaN.
    return s > 0.0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
  }
  return s * std::tgamma(y) / M_PI;
}

struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace detail

/// Argument triple for the two-parameter Mittag-Leffler function
/// E_{alpha,mu}(z). Restricted to the negative real axis by design:
/// every kernel in this library is E(-lambda t^alpha) with lambda, t >= 0.
struct MLQuery {
  double alpha;  ///< order, in (0, 1]
  double mu;     ///< second parameter, > 0
  double z;      ///< argument, <= 0
};

enum class MLRegime { series, asymptotic, crossover };

inline const char* to_string(MLRegime r) {
  switch (r) {
    case MLRegime::series: return "series";
    case MLRegime::asymptotic: return "asymptotic";
    case MLRegime::crossover: return "crossover";
  }
  return "?";
}

struct MLResult {
  double value;
  MLRegime regime;
  double est_abs_error;  ///< heuristic; see the per-branch notes in the evaluator
};

namespace detail {

/// Evaluates E_{alpha,mu}(z) for a fixed (alpha, mu) and many z <= 0.
///
/// Branch selection is driven by sigma = |z|^{1/alpha}, which sets the size
/// e^sigma of the largest series term and hence the cancellation in the
/// alternating sum:
///   - sigma <= sigma1(alpha): plain double Taylor series with compensated
///     summation;
///   - sigma >= 35: Poincare expansion walked to optimal truncation
///     (remainder ~ e^-sigma on the negative real axis);
///   - in between: the same Taylor series accumulated in MPFR with enough
///     guard bits to absorb the cancellation.
///
/// Per-(alpha,mu) coefficient tables are cached, so reusing one evaluator
/// across many z is much cheaper than repeated ml() calls. Instances are not
/// thread-safe; ml() builds a private instance and stays pure.
class MittagLefflerEvaluator {
 public:
  MittagLefflerEvaluator(double alpha, double mu) : alpha_(alpha), mu_(mu) {
    if (!std::isfinite(alpha) || alpha <= 0.0 || alpha > 1.0)
      throw std::domain_error("mittag-leffler: alpha must lie in (0, 1]");
    if (!std::isfinite(mu) || mu <= 0.0)
      throw std::domain_error("mittag-leffler: mu must be positive");
  }

  double alpha() const { return alpha_; }
  double mu() const { return mu_; }

  MLResult evaluate(double z) {
    if (!std::isfinite(z) || z > 0.0)
      throw std::domain_error("mittag-leffler: z must be finite and <= 0");
    const double eps = std::numeric_limits<double>::epsilon();
    if (z == 0.0) {
      double v = reciprocal_gamma(mu_);
      return {v, MLRegime::series, 2.0 * eps * std::abs(v)};
    }
    if (alpha_ == 1.0) {
      // E_{1,1} = exp and E_{1,2}(z) = expm1(z)/z are exact reductions; the
      // generic branches cannot reach full *relative* accuracy for these two
      // because the algebraic part of the expansion vanishes.
      if (mu_ == 1.0) {
        double v = std::exp(z);
        return {v, MLRegime::series, 2.0 * eps * std::abs(v)};
      }
      if (mu_ == 2.0) {
        double v = std::expm1(z) / z;
        return {v, MLRegime::series, 4.0 * eps * std::abs(v)};
      }
    }
    const double x = -z;
    const double log_sigma = std::log(x) / alpha_;
    if (log_sigma >= kLogSigmaAsymptotic) return eval_asymptotic(x);
    if (log_sigma <= std::log(series_sigma_limit(alpha_))) return eval_series_double(x);
    return eval_crossover(x, std::exp(log_sigma));
  }

  double value(double z) { return evaluate(z).value; }

 private:
  // Calibrated so the double-precision series stays below ~2e-13 absolute
  // error (see tools/calibrate.cpp); the limit shrinks with alpha because the
  // term count, and with it the accumulated per-term roundoff, grows like
  // sigma/alpha.
  static double series_sigma_limit(double alpha) {
    if (alpha >= 0.5) return 6.0;
    if (alpha >= 0.2) return 5.0;
    return 3.5;
  }

  static constexpr double kLogSigmaAsymptotic = 3.5553480614894135;  // log(35)
  static constexpr mpfr_prec_t kCrossPrec = 128;  // covers sigma < 35 with >= 77 guard bits
  static constexpr std::size_t kCrossTermCap = 10000;

  void ensure_series_table(std::size_t n) {
    while (series_rgamma_.size() <= n) {
      double arg = alpha_ * static_cast<double>(series_rgamma_.size()) + mu_;
      series_rgamma_.push_back(arg > kGammaOverflowArg ? 0.0 : 1.0 / std::tgamma(arg));
    }
  }

  // Asymptotic coefficients 1/Gamma(mu - alpha k), stored as sign and
  // log-magnitude so the tail near optimal truncation (where the reflected
  // Gamma is large) never leaves the representable range.
  struct AsymCoeff {
    double log_abs;
    int sign;  // 0 marks a (near-)pole where the coefficient vanishes
  };

  void ensure_asym_table(std::size_t k) {
    while (asym_coeff_.size() < k) {
      std::size_t idx = asym_coeff_.size() + 1;  // coefficients start at k = 1
      double w = mu_ - alpha_ * static_cast<double>(idx);
      AsymCoeff c{0.0, 0};
      if (w >= 0.5) {
        c.log_abs = -std::lgamma(w);
        c.sign = 1;
      } else {
        double r = w - std::nearbyint(w);
        if (std::nearbyint(w) <= 0.0 && std::abs(r) < 1e-8) {
          c.sign = 0;  // reflection zero: skip the term
        } else {
          double s = sin_pi(w);
          c.log_abs = std::lgamma(1.0 - w) + std::log(std::abs(s)) - std::log(M_PI);
          c.sign = s > 0.0 ? 1 : -1;
        }
      }
      asym_coeff_.push_back(c);
    }
  }

  MLResult eval_series_double(double x) {
    NeumaierSum acc;
    const double z = -x;
    const double n_peak = std::pow(x, 1.0 / alpha_) / alpha_;
    double powz = 1.0;
    for (std::size_t n = 0; n < 100000; ++n) {
      ensure_series_table(n);
      double term = powz * series_rgamma_[n];
      if (static_cast<double>(n) > n_peak &&
          std::abs(term) <= 1e-18 * std::max(std::abs(acc.value()), 1e-8)) {
        return {acc.value(), MLRegime::series, std::abs(term)};  // est = first omitted
      }
      acc.add(term);
      powz *= z;
    }
    throw std::runtime_error("mittag-leffler: series did not converge (internal)");
  }

  MLResult eval_asymptotic(double x) {
    // E_{a,mu}(-x) ~ sum_{k>=1} (-1)^{k+1} x^{-k} / Gamma(mu - a k).
    // For 0 < alpha < 1 (and the non-degenerate alpha = 1 cases that reach
    // here) the expansion on the negative real axis is purely algebraic;
    // terms shrink along the envelope until k ~ sigma/alpha.
    const double logx = std::log(x);
    const double log_sigma = logx / alpha_;
    double k_opt = 50000.0;
    if (log_sigma < std::log(1e7))
      k_opt = std::min(k_opt, std::exp(log_sigma) / alpha_ + 2.0);
    NeumaierSum acc;
    double last_mag = 0.0;
    for (std::size_t k = 1; static_cast<double>(k) <= k_opt; ++k) {
      ensure_asym_table(k);
      const AsymCoeff& c = asym_coeff_[k - 1];
      if (c.sign == 0) continue;
      double mag = std::exp(c.log_abs - static_cast<double>(k) * logx);
      double term = (k % 2 == 1 ? 1.0 : -1.0) * static_cast<double>(c.sign) * mag;
      acc.add(term);
      last_mag = mag;
      if (mag <= 1e-17 * std::abs(acc.value())) break;
    }
    return {acc.value(), MLRegime::asymptotic, last_mag};  // est = last included
  }

  void ensure_cross_table(std::size_t n) {
    while (cross_rgamma_.size() <= n) {
      BigFloat arg(kCrossPrec);
      mpfr_set_d(arg.raw(), alpha_, MPFR_RNDN);
      mpfr_mul_ui(arg.raw(), arg.raw(), static_cast<unsigned long>(cross_rgamma_.size()),
                  MPFR_RNDN);
      mpfr_add_d(arg.raw(), arg.raw(), mu_, MPFR_RNDN);
      BigFloat rg(kCrossPrec);
      mpfr_gamma(rg.raw(), arg.raw(), MPFR_RNDN);
      mpfr_ui_div(rg.raw(), 1u, rg.raw(), MPFR_RNDN);
      cross_rgamma_.push_back(std::move(rg));
    }
  }

  MLResult eval_crossover(double x, double sigma) {
    const double n_peak = sigma / alpha_;
    BigFloat acc(kCrossPrec), powz(kCrossPrec), term(kCrossPrec);
    mpfr_set_ui(powz.raw(), 1u, MPFR_RNDN);
    const double z = -x;
    mpfr_exp_t max_exp = mpfr_get_emin();
    std::size_t n = 0;
    for (; n < kCrossTermCap; ++n) {
      ensure_cross_table(n);
      mpfr_mul(term.raw(), powz.raw(), cross_rgamma_[n].raw(), MPFR_RNDN);
      if (!term.is_zero()) {
        max_exp = std::max(max_exp, term.exponent());
        if (static_cast<double>(n) > n_peak && term.exponent() < max_exp - 120) break;
      }
      mpfr_add(acc.raw(), acc.raw(), term.raw(), MPFR_RNDN);
      mpfr_mul_d(powz.raw(), powz.raw(), z, MPFR_RNDN);
    }
    if (n == kCrossTermCap)
      throw std::runtime_error("mittag-leffler: crossover series exceeded the term budget");
    // est: first omitted term plus the accumulation floor of the sum
    double est = std::abs(term.to_double()) +
                 static_cast<double>(n) * std::ldexp(1.0, static_cast<int>(max_exp) - kCrossPrec);
    return {acc.to_double(), MLRegime::crossover, est};
  }

  double alpha_;
  double mu_;
  std::vector<double> series_rgamma_;
  std::vector<AsymCoeff> asym_coeff_;
  std::vector<BigFloat> cross_rgamma_;
};

}  // namespace detail

/// E_{alpha,mu}(z) for z <= 0, with the regime taken and an error heuristic.
inline MLResult ml(const MLQuery& q) {
  detail::MittagLefflerEvaluator ev(q.alpha, q.mu);
  return ev.evaluate(q.z);
}

inline double ml_value(double alpha, double mu, double z) { return ml({alpha, mu, z}).value; }

/// Arbitrary-precision direct summation of the defining series, used as the
/// provenance oracle in tests. `digits` sets the working precision of the
/// accumulation (it must absorb the e^sigma cancellation, sigma =
/// |z|^{1/alpha}; the guard bits for that are added automatically) and the
/// term budget (10*digits terms). Truncation always runs until the tail is
/// far below double resolution, so the returned double is exact whenever the
/// call converges. Empirically the series needs about
/// (sigma + 1.5*sqrt(sigma*(sigma+70)))/alpha + 100 terms, so the practical
/// domain is roughly sigma <= 900 for alpha >= 0.5 (|z| <= 30 at alpha = 0.5)
/// and shrinks with alpha; std::runtime_error reports a busted budget.
inline double ml_reference(const MLQuery& q, int digits) {
  if (digits < 30) throw std::invalid_argument("ml_reference: digits must be >= 30");
  if (!std::isfinite(q.alpha) || q.alpha <= 0.0 || q.alpha > 1.0)
    throw std::domain_error("ml_reference: alpha must lie in (0, 1]");
  if (!std::isfinite(q.mu) || q.mu <= 0.0)
    throw std::domain_error("ml_reference: mu must be positive");
  if (!std::isfinite(q.z) || q.z > 0.0)
    throw std::domain_error("ml_reference: z must be finite and <= 0");

  const long budget = 10L * digits;
  double sigma = 0.0;
  if (q.z != 0.0) {
    double log_sigma = std::log(-q.z) / q.alpha;
    if (log_sigma > std::log(q.alpha * static_cast<double>(budget)))
      throw std::runtime_error(
          "ml_reference: series peak exceeds the 10*digits term budget; increase digits");
    sigma = std::exp(log_sigma);
  }
  const double n_peak = sigma / q.alpha;

  const mpfr_prec_t prec =
      static_cast<mpfr_prec_t>(std::ceil(3.3220 * (digits + 15) + 1.4427 * sigma)) + 16;
  detail::BigFloat acc(prec), powz(prec), term(prec), arg(prec), g(prec);
  mpfr_set_ui(powz.raw(), 1u, MPFR_RNDN);
  // truncate once the tail cannot move the double result (double resolution
  // is ~1e-17 relative; leave an 8-digit margin)
  const mpfr_exp_t drop_bits = static_cast<mpfr_exp_t>(std::ceil(3.3220 * (std::min(digits, 20) + 5)));

  bool converged = false;
  for (long n = 0; n < budget; ++n) {
    mpfr_set_d(arg.raw(), q.alpha, MPFR_RNDN);
    mpfr_mul_si(arg.raw(), arg.raw(), n, MPFR_RNDN);
    mpfr_add_d(arg.raw(), arg.raw(), q.mu, MPFR_RNDN);
    mpfr_gamma(g.raw(), arg.raw(), MPFR_RNDN);
    mpfr_div(term.raw(), powz.raw(), g.raw(), MPFR_RNDN);
    mpfr_add(acc.raw(), acc.raw(), term.raw(), MPFR_RNDN);
    mpfr_mul_d(powz.raw(), powz.raw(), q.z, MPFR_RNDN);
    if (static_cast<double>(n) > n_peak && !acc.is_zero() &&
        (term.is_zero() || term.exponent() < acc.exponent() - drop_bits)) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("ml_reference: term budget exhausted before convergence");
  return acc.to_double();
}

}  // namespace fraclange
