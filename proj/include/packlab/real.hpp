#pragma once

// Correctly rounded radix-2 floating point at configurable precision,
// on top of MPFR. Values are immutable after construction; every
// operation takes an explicit target precision and rounding mode, so
// results are deterministic across platforms and thread counts.

#include <mpfr.h>

#include <compare>
#include <cstdint>
#include <string>
#include <utility>

#include "packlab/error.hpp"

namespace packlab {

using Prec = mpfr_prec_t;

Prec default_precision();
void set_default_precision(Prec p);

enum class Rnd { Near, Down, Up };

inline mpfr_rnd_t to_mpfr(Rnd r) {
  switch (r) {
    case Rnd::Near: return MPFR_RNDN;
    case Rnd::Down: return MPFR_RNDD;
    case Rnd::Up: return MPFR_RNDU;
  }
  return MPFR_RNDN;
}

class Real {
 public:
  Real() : Real(default_precision()) {}
  explicit Real(Prec prec) { mpfr_init2(v_, prec < MPFR_PREC_MIN ? MPFR_PREC_MIN : prec); }
  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(Real&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    if (this != &o) mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  static Real of_long(long x, Prec prec = default_precision());
  static Real of_ulong(unsigned long x, Prec prec = default_precision());
  static Real of_double(double x, Prec prec = default_precision());
  // 2^e, exact at any precision
  static Real pow2(long e, Prec prec = default_precision());
  static Real zero(Prec prec = default_precision());
  static Real one(Prec prec = default_precision());
  static Real nan(Prec prec = default_precision());
  // Accepts decimal ("0.25"), hex float ("0x1p-2") via mpfr_strtofr.
  static Real parse(const std::string& s, Prec prec = default_precision(), Rnd rnd = Rnd::Near);

  Prec prec() const { return mpfr_get_prec(v_); }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  // exponent e with 0.5 <= |x|/2^e < 1 (mpfr convention); 0 for zero
  long exponent() const { return is_zero() ? 0 : static_cast<long>(mpfr_get_exp(v_)); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }

  std::string hex() const;             // full-precision "%Ra"
  std::string dec(int digits = 21) const;

  // exact value comparisons, no rounding involved
  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend bool operator!=(const Real& a, const Real& b) { return !(a == b); }
  friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
  friend bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
  friend bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }

  mpfr_srcptr raw() const { return v_; }
  mpfr_ptr raw() { return v_; }

 private:
  mpfr_t v_;
};

// Arithmetic with explicit target precision and rounding.
Real add(const Real& a, const Real& b, Prec prec, Rnd rnd = Rnd::Near);
Real sub(const Real& a, const Real& b, Prec prec, Rnd rnd = Rnd::Near);
Real mul(const Real& a, const Real& b, Prec prec, Rnd rnd = Rnd::Near);
Real div(const Real& a, const Real& b, Prec prec, Rnd rnd = Rnd::Near);
Real sqrt_r(const Real& a, Prec prec, Rnd rnd = Rnd::Near);
Real rootn_r(const Real& a, unsigned long k, Prec prec, Rnd rnd = Rnd::Near);
Real pow_si(const Real& a, long e, Prec prec, Rnd rnd = Rnd::Near);
Real pow_r(const Real& a, const Real& e, Prec prec, Rnd rnd = Rnd::Near);
Real log2_r(const Real& a, Prec prec, Rnd rnd = Rnd::Near);
Real exp2_r(const Real& a, Prec prec, Rnd rnd = Rnd::Near);
Real log_r(const Real& a, Prec prec, Rnd rnd = Rnd::Near);
Real exp_r(const Real& a, Prec prec, Rnd rnd = Rnd::Near);

// exact operations (no rounding at the value's own precision)
Real ldexp2(const Real& a, long e);  // a * 2^e
Real neg(const Real& a);
Real abs_r(const Real& a);
Real min_r(const Real& a, const Real& b);
Real max_r(const Real& a, const Real& b);

// t^(p/q) for exact t > 0, correctly roundable in two steps.
Real rational_pow(const Real& t, long p, unsigned long q, Prec prec, Rnd rnd = Rnd::Near);

// Convenience operators at max(prec(a), prec(b)), round to nearest.
inline Prec joint_prec(const Real& a, const Real& b) {
  return a.prec() > b.prec() ? a.prec() : b.prec();
}
inline Real operator+(const Real& a, const Real& b) { return add(a, b, joint_prec(a, b)); }
inline Real operator-(const Real& a, const Real& b) { return sub(a, b, joint_prec(a, b)); }
inline Real operator*(const Real& a, const Real& b) { return mul(a, b, joint_prec(a, b)); }
inline Real operator/(const Real& a, const Real& b) { return div(a, b, joint_prec(a, b)); }

// Closed interval [lo, hi] enclosing an exact value; directed rounding
// keeps enclosures valid through every operation.
struct Interval {
  Real lo, hi;
  Interval() = default;
  explicit Interval(const Real& x) : lo(x), hi(x) {}
  Interval(Real l, Real h) : lo(std::move(l)), hi(std::move(h)) {}
  bool degenerate() const { return lo == hi; }
  bool contains(const Real& x) const { return lo <= x && x <= hi; }
  Real width(Prec prec) const { return sub(hi, lo, prec, Rnd::Up); }
};

Interval iadd(const Interval& a, const Interval& b, Prec prec);
Interval isub(const Interval& a, const Interval& b, Prec prec);
// product for intervals known to be >= 0
Interval imul_nn(const Interval& a, const Interval& b, Prec prec);
Interval isqr_nn(const Interval& a, Prec prec);   // a >= 0
Interval iscale2(const Interval& a, long e);      // exact
Interval ineg(const Interval& a);
Interval iabs(const Interval& a);

}  // namespace packlab
