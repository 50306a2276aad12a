#pragma once

#include <mpfr.h>

#include <utility>

namespace fraclange::detail {

/// Minimal RAII handle around an mpfr_t. Covers exactly what the
/// series oracles need; arithmetic is done through the raw pointer.
class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  BigFloat(const BigFloat&) = delete;
  BigFloat& operator=(const BigFloat&) = delete;
  BigFloat(BigFloat&& other) noexcept {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_swap(v_, other.v_);
  }
  BigFloat& operator=(BigFloat&& other) noexcept {
    if (this != &other) mpfr_swap(v_, other.v_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  /// Binary exponent of the value; only meaningful when nonzero.
  mpfr_exp_t exponent() const { return mpfr_get_exp(v_); }

 private:
  mpfr_t v_;
};

}  // namespace fraclange::detail
