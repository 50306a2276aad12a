// Development sweeps behind the frozen constants in the test suite.
//
// Prints, per branch of the Mittag-Leffler evaluator, the worst error
// against a high-precision series reference, and the brute-force suprema
// that back the decay-bound regression constants. Run after any change to
// the evaluator and refresh the constants if they drift.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fraclange/special_functions.hpp"

using fraclange::MLQuery;
using fraclange::MLRegime;
using fraclange::MLResult;
using fraclange::detail::BigFloat;

namespace {

// Same series as ml_reference, but with the reciprocal-gamma table cached
// per (alpha, mu) so a whole x-sweep is affordable at small alpha.
class CachedReference {
 public:
  CachedReference(double alpha, double mu, double sigma_max)
      : alpha_(alpha),
        mu_(mu),
        prec_(static_cast<mpfr_prec_t>(1.4427 * sigma_max) + 256),
        acc_(prec_),
        term_(prec_),
        powz_(prec_) {}

  double value(double z) {
    const double x = -z;
    const double n_peak = x > 0.0 ? std::pow(x, 1.0 / alpha_) / alpha_ : 0.0;
    mpfr_set_zero(acc_.raw(), 1);
    mpfr_set_ui(powz_.raw(), 1u, MPFR_RNDN);
    mpfr_exp_t max_exp = mpfr_get_emin();
    for (std::size_t n = 0; n < 2000000; ++n) {
      ensure(n);
      mpfr_mul(term_.raw(), powz_.raw(), rgamma_[n].raw(), MPFR_RNDN);
      if (term_.is_zero()) {
        if (static_cast<double>(n) > n_peak) return acc_.to_double();
      } else {
        max_exp = std::max(max_exp, term_.exponent());
        if (static_cast<double>(n) > n_peak && term_.exponent() < max_exp - (prec_ - 8))
          return acc_.to_double();
      }
      mpfr_add(acc_.raw(), acc_.raw(), term_.raw(), MPFR_RNDN);
      mpfr_mul_d(powz_.raw(), powz_.raw(), z, MPFR_RNDN);
    }
    std::fprintf(stderr, "CachedReference: no convergence (a=%g mu=%g z=%g)\n", alpha_, mu_, z);
    std::exit(1);
  }

 private:
  void ensure(std::size_t n) {
    while (rgamma_.size() <= n) {
      BigFloat arg(prec_), rg(prec_);
      mpfr_set_d(arg.raw(), alpha_, MPFR_RNDN);
      mpfr_mul_ui(arg.raw(), arg.raw(), static_cast<unsigned long>(rgamma_.size()), MPFR_RNDN);
      mpfr_add_d(arg.raw(), arg.raw(), mu_, MPFR_RNDN);
      mpfr_gamma(rg.raw(), arg.raw(), MPFR_RNDN);
      mpfr_ui_div(rg.raw(), 1u, rg.raw(), MPFR_RNDN);
      rgamma_.push_back(std::move(rg));
    }
  }

  double alpha_, mu_;
  mpfr_prec_t prec_;
  BigFloat acc_, term_, powz_;
  std::vector<BigFloat> rgamma_;
};

struct WorstCase {
  double err = 0.0;
  MLQuery q{0, 0, 0};
  void consider(double e, const MLQuery& query) {
    if (e > err) {
      err = e;
      q = query;
    }
  }
};

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
  return g;
}

}  // namespace

int main() {
  const std::vector<double> alphas = {0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5,
                                      0.6,  0.7, 0.8,  0.9, 0.95, 1.0};
  const std::vector<double> mus = {0.3, 0.7, 1.0, 1.5, 2.0, 3.0, 4.5, 6.0};
  const double sigma_max = 150.0;  // deep asymptotic region is checked by identities instead

  WorstCase worst_abs[3], worst_rel[3];
  long counts[3] = {0, 0, 0};

  for (double a : alphas) {
    for (double m : mus) {
      fraclange::detail::MittagLefflerEvaluator ev(a, m);
      CachedReference ref(a, m, sigma_max);
      std::vector<double> xs = log_grid(1e-3, std::pow(sigma_max, a), 150);
      for (double x : xs) {
        MLQuery q{a, m, -x};
        MLResult r = ev.evaluate(q.z);
        double rv = ref.value(q.z);
        double abs_err = std::abs(r.value - rv);
        double rel_err = abs_err / std::max(std::abs(rv), 1e-300);
        int b = static_cast<int>(r.regime);
        ++counts[b];
        worst_abs[b].consider(abs_err, q);
        worst_rel[b].consider(rel_err, q);
      }
    }
  }
  const char* names[3] = {"series", "asymptotic", "crossover"};
  std::printf("== ml vs reference (sigma <= %.0f) ==\n", sigma_max);
  for (int b = 0; b < 3; ++b) {
    std::printf(
        "%-10s  n=%6ld  max_abs=%.3e (a=%.2f mu=%.2f z=%.6g)  max_rel=%.3e (a=%.2f mu=%.2f z=%.6g)\n",
        names[b], counts[b], worst_abs[b].err, worst_abs[b].q.alpha, worst_abs[b].q.mu,
        worst_abs[b].q.z, worst_rel[b].err, worst_rel[b].q.alpha, worst_rel[b].q.mu,
        worst_rel[b].q.z);
  }

  // Lemma 1 style supremum: (1+x)|E_{a,mu}(-x)| over the acceptance grid.
  double sup1 = 0.0;
  double sup1_a = 0, sup1_m = 0, sup1_x = 0;
  for (double a : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
    std::vector<double> mu_grid = {1.0, a + 1.0};
    for (double b = 0.1; b < 0.95; b += 0.1) mu_grid.push_back(a + b);
    for (double m : mu_grid) {
      fraclange::detail::MittagLefflerEvaluator ev(a, m);
      double v0 = std::abs(ev.value(0.0));
      if (v0 > sup1) { sup1 = v0; sup1_a = a; sup1_m = m; sup1_x = 0.0; }
      for (double x : log_grid(1e-2, 1e8, 100)) {
        double v = (1.0 + x) * std::abs(ev.value(-x));
        if (v > sup1) { sup1 = v; sup1_a = a; sup1_m = m; sup1_x = x; }
      }
    }
  }
  std::printf("== lemma1 sup (1+x)|E| = %.6f at a=%.2f mu=%.2f x=%.6g ==\n", sup1, sup1_a,
              sup1_m, sup1_x);

  // Lemma 2 style supremum: w^{1-eps} |E_{a,mu}(-w)| with w = lambda t^alpha.
  for (double eps : {0.25, 0.5, 0.75}) {
    double sup2 = 0.0;
    double s_a = 0, s_m = 0, s_w = 0;
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      for (double m : {a, 1.0, a + 1.0}) {
        fraclange::detail::MittagLefflerEvaluator ev(a, m);
        for (double lam : log_grid(1e-2, 1e6, 25)) {
          for (double t : log_grid(1e-4, 10.0, 25)) {
            double w = lam * std::pow(t, a);
            double v = std::pow(w, 1.0 - eps) * std::abs(ev.value(-w));
            if (v > sup2) { sup2 = v; s_a = a; s_m = m; s_w = w; }
          }
        }
      }
    }
    std::printf("== lemma2 sup w^{1-eps}|E| (eps=%.2f) = %.6f at a=%.2f mu=%.2f w=%.6g ==\n",
                eps, sup2, s_a, s_m, s_w);
  }

  // Reference values frozen into the tests.
  std::printf("== pinned values ==\n");
  std::printf("E_{0.5,1}(-1)    = %.17g\n", fraclange::ml_reference({0.5, 1.0, -1.0}, 60));
  std::printf("e*erfc(1)        = %.17g\n", std::exp(1.0) * std::erfc(1.0));
  std::printf("E_{0.5,1.5}(-1)  = %.17g\n", fraclange::ml_reference({0.5, 1.5, -1.0}, 60));
  std::printf("E_{1,1}(-1)      = %.17g\n", fraclange::ml_reference({1.0, 1.0, -1.0}, 60));
  std::printf("exp(-1)          = %.17g\n", std::exp(-1.0));
  std::printf("Gamma(2.2)       = %.17g\n", fraclange::gamma(2.2));
  std::printf("1/Gamma(2.2)     = %.17g\n", 1.0 / fraclange::gamma(2.2));
  return 0;
}
