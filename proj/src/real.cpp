#include "packlab/real.hpp"

#include <atomic>
#include <cstdio>
#include <vector>

namespace packlab {

namespace {
std::atomic<Prec> g_default_prec{128};
}

Prec default_precision() { return g_default_prec.load(); }
void set_default_precision(Prec p) {
  if (p < MPFR_PREC_MIN || p > 1 << 24) throw Error(ErrorCode::BAD_SPEC, "precision out of range");
  g_default_prec.store(p);
}

Real Real::of_long(long x, Prec prec) {
  Real r(prec);
  mpfr_set_si(r.raw(), x, MPFR_RNDN);
  return r;
}

Real Real::of_ulong(unsigned long x, Prec prec) {
  Real r(prec);
  mpfr_set_ui(r.raw(), x, MPFR_RNDN);
  return r;
}

Real Real::of_double(double x, Prec prec) {
  Real r(prec);
  mpfr_set_d(r.raw(), x, MPFR_RNDN);
  return r;
}

Real Real::pow2(long e, Prec prec) {
  Real r(prec);
  mpfr_set_ui_2exp(r.raw(), 1, e, MPFR_RNDN);
  return r;
}

Real Real::zero(Prec prec) { return of_long(0, prec); }
Real Real::one(Prec prec) { return of_long(1, prec); }

Real Real::nan(Prec prec) {
  Real r(prec);
  mpfr_set_nan(r.raw());
  return r;
}

Real Real::parse(const std::string& s, Prec prec, Rnd rnd) {
  Real r(prec);
  const char* p = s.c_str();
  char* end = nullptr;
  mpfr_strtofr(r.raw(), p, &end, 0, to_mpfr(rnd));
  if (end == p || *end != '\0') throw Error(ErrorCode::CONFIG_INVALID, "cannot parse number '" + s + "'");
  return r;
}

std::string Real::hex() const {
  char* out = nullptr;
  if (mpfr_asprintf(&out, "%Ra", v_) < 0) throw Error(ErrorCode::IO_ERROR, "mpfr_asprintf failed");
  std::string s(out);
  mpfr_free_str(out);
  return s;
}

std::string Real::dec(int digits) const {
  char* out = nullptr;
  if (mpfr_asprintf(&out, "%.*Rg", digits, v_) < 0)
    throw Error(ErrorCode::IO_ERROR, "mpfr_asprintf failed");
  std::string s(out);
  mpfr_free_str(out);
  return s;
}

#define PACKLAB_BINOP(name, mpfr_fn)                                  \
  Real name(const Real& a, const Real& b, Prec prec, Rnd rnd) {       \
    Real r(prec);                                                     \
    mpfr_fn(r.raw(), a.raw(), b.raw(), to_mpfr(rnd));                 \
    return r;                                                         \
  }

PACKLAB_BINOP(add, mpfr_add)
PACKLAB_BINOP(sub, mpfr_sub)
PACKLAB_BINOP(mul, mpfr_mul)
PACKLAB_BINOP(div, mpfr_div)
PACKLAB_BINOP(pow_r, mpfr_pow)
#undef PACKLAB_BINOP

#define PACKLAB_UNOP(name, mpfr_fn)                  \
  Real name(const Real& a, Prec prec, Rnd rnd) {     \
    Real r(prec);                                    \
    mpfr_fn(r.raw(), a.raw(), to_mpfr(rnd));         \
    return r;                                        \
  }

PACKLAB_UNOP(sqrt_r, mpfr_sqrt)
PACKLAB_UNOP(log2_r, mpfr_log2)
PACKLAB_UNOP(exp2_r, mpfr_exp2)
PACKLAB_UNOP(log_r, mpfr_log)
PACKLAB_UNOP(exp_r, mpfr_exp)
#undef PACKLAB_UNOP

Real rootn_r(const Real& a, unsigned long k, Prec prec, Rnd rnd) {
  Real r(prec);
  mpfr_rootn_ui(r.raw(), a.raw(), k, to_mpfr(rnd));
  return r;
}

Real pow_si(const Real& a, long e, Prec prec, Rnd rnd) {
  Real r(prec);
  mpfr_pow_si(r.raw(), a.raw(), e, to_mpfr(rnd));
  return r;
}

Real ldexp2(const Real& a, long e) {
  Real r(a.prec());
  mpfr_mul_2si(r.raw(), a.raw(), e, MPFR_RNDN);  // exact
  return r;
}

Real neg(const Real& a) {
  Real r(a.prec());
  mpfr_neg(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}

Real abs_r(const Real& a) {
  Real r(a.prec());
  mpfr_abs(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}

Real min_r(const Real& a, const Real& b) { return a <= b ? a : b; }
Real max_r(const Real& a, const Real& b) { return a >= b ? a : b; }

Real rational_pow(const Real& t, long p, unsigned long q, Prec prec, Rnd rnd) {
  if (t.sign() <= 0) throw Error(ErrorCode::OUT_OF_DOMAIN, "rational_pow needs t > 0");
  if (q == 0) throw Error(ErrorCode::BAD_SPEC, "zero denominator");
  if (q == 1) return pow_si(t, p, prec, rnd);
  if (p == 1) return rootn_r(t, q, prec, rnd);
  // t^p exact when it fits the guard precision; the root is then correctly
  // directed. Guard covers |p| copies of t's significand.
  Prec guard = t.prec() * static_cast<Prec>(p < 0 ? -p : p) + 8;
  Real tp = pow_si(t, p, guard, rnd);
  return rootn_r(tp, q, prec, rnd);
}

Interval iadd(const Interval& a, const Interval& b, Prec prec) {
  return {add(a.lo, b.lo, prec, Rnd::Down), add(a.hi, b.hi, prec, Rnd::Up)};
}

Interval isub(const Interval& a, const Interval& b, Prec prec) {
  return {sub(a.lo, b.hi, prec, Rnd::Down), sub(a.hi, b.lo, prec, Rnd::Up)};
}

Interval imul_nn(const Interval& a, const Interval& b, Prec prec) {
  return {mul(a.lo, b.lo, prec, Rnd::Down), mul(a.hi, b.hi, prec, Rnd::Up)};
}

Interval isqr_nn(const Interval& a, Prec prec) {
  return {mul(a.lo, a.lo, prec, Rnd::Down), mul(a.hi, a.hi, prec, Rnd::Up)};
}

Interval iscale2(const Interval& a, long e) { return {ldexp2(a.lo, e), ldexp2(a.hi, e)}; }

Interval ineg(const Interval& a) { return {neg(a.hi), neg(a.lo)}; }

Interval iabs(const Interval& a) {
  if (a.lo.sign() >= 0) return a;
  if (a.hi.sign() <= 0) return ineg(a);
  return {Real::zero(a.lo.prec()), max_r(neg(a.lo), a.hi)};
}

}  // namespace packlab
