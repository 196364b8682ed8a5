#include "packlab/dimfunc.hpp"

#include <algorithm>
#include <sstream>

#include "packlab/error.hpp"

namespace packlab {

namespace {

constexpr Prec kEvalPad = 32;

Real rnd_max(const Real& a, const Real& b) { return a >= b ? a : b; }

void require_decreasing_positive(const std::vector<Real>& xs, const char* what) {
  if (xs.empty()) throw Error(ErrorCode::BAD_SPEC, std::string(what) + " list is empty");
  for (size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].sign() <= 0) throw Error(ErrorCode::BAD_SPEC, std::string(what) + " must be positive");
    if (i > 0 && !(xs[i] < xs[i - 1]))
      throw Error(ErrorCode::BAD_SPEC, std::string(what) + " must be strictly decreasing");
  }
}

}  // namespace

const char* func_kind_name(FuncKind k) {
  switch (k) {
    case FuncKind::Power: return "power";
    case FuncKind::PowerLog: return "power_log";
    case FuncKind::PiecewiseMaxF: return "piecewise_max_f";
    case FuncKind::PiecewiseExpG: return "piecewise_exp_g";
    case FuncKind::PiecewiseExpInterp: return "piecewise_exp_interp";
    case FuncKind::OscillatingBlocks: return "oscillating_blocks";
  }
  return "?";
}

bool Domain::contains(const Real& t) const {
  if (t.is_nan()) return false;
  if (lo_open ? !(t > lo) : !(t >= lo)) return false;
  if (hi.is_finite() && (hi_open ? !(t < hi) : !(t <= hi))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// evaluation

static Real eval_power_log(const DimensionFunction& f, const Real& t, Rnd rnd) {
  Prec w = f.prec + kEvalPad;
  Real a = rational_pow(t, f.s.num, f.s.den, w, rnd);
  if (f.log_power == 0) {
    Real r(f.prec);
    mpfr_set(r.raw(), a.raw(), to_mpfr(rnd));
    return r;
  }
  // ln(1/t)^a: the log factor is positive on the domain; directed rounding
  // flips through the negation and through negative powers.
  bool up = (rnd == Rnd::Up);
  Rnd inner = f.log_power > 0 ? rnd : (up ? Rnd::Down : Rnd::Up);
  Rnd log_dir = (inner == Rnd::Up) ? Rnd::Down : (inner == Rnd::Down ? Rnd::Up : Rnd::Near);
  Real lg = neg(log_r(t, w, log_dir));
  Real b = pow_si(lg, f.log_power, w, rnd);
  return mul(a, b, f.prec, rnd);
}

static size_t find_max_piece(const std::vector<Real>& deltas, const Real& t) {
  // piece n covers [delta_{n+1}, delta_n); t < deltas[0] is guaranteed
  size_t lo = 0, hi = deltas.size() - 1;
  while (lo + 1 < hi) {
    size_t mid = (lo + hi) / 2;
    if (t < deltas[mid])
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

static Real eval_max_piece(const DimensionFunction& f, size_t n, const Real& t, Rnd rnd) {
  Real ht = f.base->eval_rnd(t, rnd);
  Real cap = ldexp2(f.base->eval_rnd(f.breaks[n + 1], rnd), static_cast<long>(n) + 1);
  return rnd_max(ldexp2(ht, static_cast<long>(n)), cap);
}

static Real eval_exp_piece(const DimensionFunction& f, size_t j, const Real& t, Rnd rnd) {
  // piece j (1-based) on (b_j, b_{j-1}]: 2^{(t-b_j)/(b_{j-1}-b_j) - j} h(t)
  Prec w = f.prec + kEvalPad;
  Real num = sub(t, f.breaks[j], w, rnd);
  Real den = sub(f.breaks[j - 1], f.breaks[j], w, Rnd::Near);
  Real ratio = div(num, den, w, rnd);
  Real expo = sub(ratio, Real::of_ulong(j, w), w, rnd);
  Real factor = exp2_r(expo, w, rnd);
  return mul(factor, f.base->eval_rnd(t, rnd), f.prec, rnd);
}

static Real eval_osc_segment(const DimensionFunction& f, size_t j, const Real& t, Rnd rnd) {
  // value = 2^{W_j + slope_j (log2 t - L_j)}, slope_j >= 0
  Prec w = f.prec + kEvalPad;
  Real lt = log2_r(t, w, rnd);
  Real delta = sub(lt, f.log_nodes[j], w, rnd);  // <= 0 within the segment
  Real term = mul(f.slopes[j], delta, w, rnd);
  Real expo = add(f.node_vals[j], term, w, rnd);
  Real r(f.prec);
  Real v = exp2_r(expo, f.prec, rnd);
  mpfr_set(r.raw(), v.raw(), to_mpfr(rnd));
  return r;
}

Real DimensionFunction::eval_rnd(const Real& t, Rnd rnd) const {
  if (!in_domain(t))
    throw Error(ErrorCode::OUT_OF_DOMAIN, "t = " + t.dec(8) + " outside eval domain");
  switch (kind) {
    case FuncKind::Power: {
      Real r(prec);
      Real v = rational_pow(t, s.num, s.den, prec, rnd);
      mpfr_set(r.raw(), v.raw(), to_mpfr(rnd));
      return r;
    }
    case FuncKind::PowerLog:
      return eval_power_log(*this, t, rnd);
    case FuncKind::PiecewiseMaxF: {
      if (t >= breaks[0]) return base->eval_rnd(t, rnd);
      return eval_max_piece(*this, find_max_piece(breaks, t), t, rnd);
    }
    case FuncKind::PiecewiseExpG:
    case FuncKind::PiecewiseExpInterp: {
      if (t > breaks[0]) return base->eval_rnd(t, rnd);
      if (t == breaks.back()) return eval_exp_piece(*this, breaks.size() - 1, t, rnd);
      // find j with b_j < t <= b_{j-1}
      size_t lo = 0, hi = breaks.size() - 1;
      while (lo + 1 < hi) {
        size_t mid = (lo + hi) / 2;
        if (t <= breaks[mid])
          lo = mid;
        else
          hi = mid;
      }
      return eval_exp_piece(*this, lo + 1, t, rnd);
    }
    case FuncKind::OscillatingBlocks: {
      if (t >= breaks[0]) {
        Real r(prec);
        Real v = rational_pow(t, lo_exp.num, lo_exp.den, prec, rnd);
        mpfr_set(r.raw(), v.raw(), to_mpfr(rnd));
        return r;
      }
      if (t < breaks.back()) return eval_osc_segment(*this, breaks.size() - 1, t, rnd);
      size_t lo = 0, hi = breaks.size() - 1;
      while (lo + 1 < hi) {
        size_t mid = (lo + hi) / 2;
        if (t < breaks[mid])
          lo = mid;
        else
          hi = mid;
      }
      return eval_osc_segment(*this, lo, t, rnd);
    }
  }
  throw Error(ErrorCode::BAD_SPEC, "unknown kind");
}

std::vector<Real> DimensionFunction::breakpoints() const {
  switch (kind) {
    case FuncKind::Power:
    case FuncKind::PowerLog:
      return {};
    default:
      return breaks;
  }
}

Real DimensionFunction::piece_value_above(const Real& b) const {
  // limit from t > b (or the value of the piece whose closure starts at b)
  switch (kind) {
    case FuncKind::PiecewiseMaxF: {
      if (b == breaks[0]) return base->eval(b);
      for (size_t n = 1; n < breaks.size(); ++n)
        if (b == breaks[n]) return eval_max_piece(*this, n - 1, b, Rnd::Near);
      break;
    }
    case FuncKind::PiecewiseExpG:
    case FuncKind::PiecewiseExpInterp: {
      if (b == breaks[0]) return base->eval(b);
      for (size_t j = 1; j < breaks.size(); ++j)
        if (b == breaks[j]) return eval_exp_piece(*this, j, b, Rnd::Near);
      break;
    }
    case FuncKind::OscillatingBlocks: {
      if (b == breaks[0]) {
        Real v = rational_pow(b, lo_exp.num, lo_exp.den, prec, Rnd::Near);
        return v;
      }
      for (size_t j = 1; j < breaks.size(); ++j)
        if (b == breaks[j]) return eval_osc_segment(*this, j - 1, b, Rnd::Near);
      break;
    }
    default:
      break;
  }
  throw Error(ErrorCode::BAD_ADDRESS, "not a breakpoint");
}

Real DimensionFunction::piece_value_below(const Real& b) const {
  // limit from t < b: the piece just below evaluated at b
  switch (kind) {
    case FuncKind::PiecewiseMaxF: {
      for (size_t n = 0; n + 1 < breaks.size(); ++n)
        if (b == breaks[n]) return eval_max_piece(*this, n, b, Rnd::Near);
      break;
    }
    case FuncKind::PiecewiseExpG:
    case FuncKind::PiecewiseExpInterp: {
      for (size_t j = 0; j + 1 < breaks.size(); ++j)
        if (b == breaks[j]) return eval_exp_piece(*this, j + 1, b, Rnd::Near);
      break;
    }
    case FuncKind::OscillatingBlocks: {
      for (size_t j = 0; j < breaks.size(); ++j)
        if (b == breaks[j]) return eval_osc_segment(*this, j, b, Rnd::Near);
      break;
    }
    default:
      break;
  }
  throw Error(ErrorCode::BAD_ADDRESS, "no piece below breakpoint");
}

std::string DimensionFunction::describe() const {
  std::ostringstream os;
  os << func_kind_name(kind) << "(p" << prec;
  switch (kind) {
    case FuncKind::Power:
      os << ";s=" << s.num << "/" << s.den;
      break;
    case FuncKind::PowerLog:
      os << ";s=" << s.num << "/" << s.den << ";a=" << log_power;
      break;
    case FuncKind::OscillatingBlocks:
      os << ";lo=" << lo_exp.num << "/" << lo_exp.den << ";hi=" << hi_exp.num << "/" << hi_exp.den;
      for (const auto& b : breaks) os << ";" << b.hex();
      break;
    default:
      os << ";base=" << base->describe();
      for (const auto& b : breaks) os << ";" << b.hex();
      break;
  }
  os << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// factories

DimFunc make_power(Rational s, Prec prec) {
  if (s.num <= 0 || s.den == 0) throw Error(ErrorCode::BAD_SPEC, "power exponent must be positive");
  auto f = std::make_shared<DimensionFunction>();
  f->kind = FuncKind::Power;
  f->prec = prec;
  f->s = s;
  f->domain.lo = Real::zero(prec);
  f->domain.lo_open = true;
  f->domain.hi = Real(prec);
  mpfr_set_inf(f->domain.hi.raw(), 1);
  f->domain.hi_open = true;
  return f;
}

DimFunc make_power_log(Rational s, long a, Prec prec) {
  if (s.num <= 0 || s.den == 0)
    throw Error(ErrorCode::BAD_SPEC, "power_log exponent must be positive");
  auto f = std::make_shared<DimensionFunction>();
  f->kind = FuncKind::PowerLog;
  f->prec = prec;
  f->s = s;
  f->log_power = a;
  f->domain.lo = Real::zero(prec);
  f->domain.lo_open = true;
  if (a > 0) {
    // monotone up to e^{-a/s}; round down so the whole domain is safe
    Real ratio = div(mul(Real::of_long(-a, prec), Real::of_ulong(s.den, prec), prec),
                     Real::of_long(s.num, prec), prec, Rnd::Down);
    f->domain.hi = exp_r(ratio, prec, Rnd::Down);
    f->domain.hi_open = false;
  } else {
    f->domain.hi = Real::one(prec);
    f->domain.hi_open = true;
  }
  return f;
}

DimFunc make_piecewise_max(DimFunc h, std::vector<Real> deltas) {
  if (!h) throw Error(ErrorCode::BAD_SPEC, "missing base function");
  require_decreasing_positive(deltas, "deltas");
  if (deltas.size() < 2) throw Error(ErrorCode::BAD_SPEC, "need at least two deltas");
  for (const auto& d : deltas)
    if (!h->in_domain(d)) throw Error(ErrorCode::BAD_SPEC, "delta outside base domain");
  // 2 h(delta_{n+1}) < h(delta_n) keeps the assembled max continuous and
  // nondecreasing across breakpoints
  for (size_t n = 0; n + 1 < deltas.size(); ++n) {
    Real lhs = ldexp2(h->eval(deltas[n + 1]), 1);
    if (!(lhs < h->eval(deltas[n])))
      throw Error(ErrorCode::NON_MONOTONE,
                  "2 h(delta_{n+1}) >= h(delta_n) at n = " + std::to_string(n));
  }
  auto f = std::make_shared<DimensionFunction>();
  f->kind = FuncKind::PiecewiseMaxF;
  f->prec = h->prec;
  f->base = std::move(h);
  f->breaks = std::move(deltas);
  f->domain.lo = f->breaks.back();
  f->domain.lo_open = false;
  f->domain.hi = f->base->domain.hi;
  f->domain.hi_open = f->base->domain.hi_open;
  return f;
}

DimFunc make_piecewise_exp(DimFunc h, std::vector<Real> breaks, FuncKind which) {
  if (!h) throw Error(ErrorCode::BAD_SPEC, "missing base function");
  if (which != FuncKind::PiecewiseExpG && which != FuncKind::PiecewiseExpInterp)
    throw Error(ErrorCode::BAD_SPEC, "not an exp-interpolation kind");
  require_decreasing_positive(breaks, "breakpoints");
  if (breaks.size() < 2) throw Error(ErrorCode::BAD_SPEC, "need at least two breakpoints");
  for (const auto& b : breaks)
    if (!h->in_domain(b)) throw Error(ErrorCode::BAD_SPEC, "breakpoint outside base domain");
  auto f = std::make_shared<DimensionFunction>();
  f->kind = which;
  f->prec = h->prec;
  f->base = std::move(h);
  f->breaks = std::move(breaks);
  f->domain.lo = f->breaks.back();
  f->domain.lo_open = false;
  f->domain.hi = f->base->domain.hi;
  f->domain.hi_open = f->base->domain.hi_open;
  return f;
}

DimFunc make_oscillating(Rational lo, Rational hi, std::vector<Real> boundaries, Prec prec) {
  if (lo.num <= 0 || hi.num <= 0) throw Error(ErrorCode::BAD_SPEC, "exponents must be positive");
  // lo < hi as rationals
  if (!(static_cast<double>(lo.num) / static_cast<double>(lo.den) <
        static_cast<double>(hi.num) / static_cast<double>(hi.den)))
    throw Error(ErrorCode::BAD_SPEC, "lo_exp must be smaller than hi_exp");
  require_decreasing_positive(boundaries, "boundaries");
  if (boundaries.size() < 2) throw Error(ErrorCode::BAD_SPEC, "need at least two boundaries");
  if (!(boundaries[0] < Real::one(prec)))
    throw Error(ErrorCode::BAD_SPEC, "boundaries must lie in (0,1)");

  auto f = std::make_shared<DimensionFunction>();
  f->kind = FuncKind::OscillatingBlocks;
  f->prec = prec;
  f->lo_exp = lo;
  f->hi_exp = hi;
  f->breaks = std::move(boundaries);

  Prec w = prec + kEvalPad;
  Real lo_r = div(Real::of_long(lo.num, w), Real::of_ulong(lo.den, w), w);
  Real hi_r = div(Real::of_long(hi.num, w), Real::of_ulong(hi.den, w), w);
  size_t K = f->breaks.size();
  f->log_nodes.reserve(K);
  f->node_vals.reserve(K);
  for (size_t j = 0; j < K; ++j) {
    Real L = log2_r(f->breaks[j], w, Rnd::Near);
    // envelope alternates: t^lo touched at even j, t^hi at odd j
    const Real& e = (j % 2 == 0) ? lo_r : hi_r;
    f->log_nodes.push_back(L);
    f->node_vals.push_back(mul(e, L, w, Rnd::Near));
  }
  for (size_t j = 0; j + 1 < K; ++j) {
    Real dW = sub(f->node_vals[j + 1], f->node_vals[j], w, Rnd::Near);
    Real dL = sub(f->log_nodes[j + 1], f->log_nodes[j], w, Rnd::Near);
    Real slope = div(dW, dL, w, Rnd::Near);
    if (slope.sign() < 0)
      throw Error(ErrorCode::NON_MONOTONE,
                  "negative log-log slope between boundaries " + std::to_string(j) + " and " +
                      std::to_string(j + 1));
    f->slopes.push_back(slope);
  }
  // tail continues the last touched envelope
  f->slopes.push_back((K - 1) % 2 == 0 ? lo_r : hi_r);

  f->domain.lo = Real::zero(prec);
  f->domain.lo_open = true;
  f->domain.hi = Real(prec);
  mpfr_set_inf(f->domain.hi.raw(), 1);
  f->domain.hi_open = true;
  return f;
}

// ---------------------------------------------------------------------------
// config round trip

DimFunc make_builtin(const Config& spec, Prec prec) {
  std::string kind = spec.get_str("kind");
  DimFunc f;
  if (kind == "power") {
    f = make_power(spec.get_rational("s"), prec);
  } else if (kind == "power_log") {
    f = make_power_log(spec.get_rational("s"), spec.get_int("a", 1), prec);
  } else if (kind == "piecewise_max_f") {
    DimFunc base = make_builtin(spec.subsection("base"), prec);
    f = make_piecewise_max(base, spec.get_real_list("deltas", prec));
  } else if (kind == "piecewise_exp_g") {
    DimFunc base = make_builtin(spec.subsection("base"), prec);
    f = make_piecewise_exp(base, spec.get_real_list("ts", prec), FuncKind::PiecewiseExpG);
  } else if (kind == "piecewise_exp_interp") {
    DimFunc base = make_builtin(spec.subsection("base"), prec);
    f = make_piecewise_exp(base, spec.get_real_list("as", prec), FuncKind::PiecewiseExpInterp);
  } else if (kind == "oscillating_blocks") {
    f = make_oscillating(spec.get_rational("lo_exp"), spec.get_rational("hi_exp"),
                         spec.get_real_list("boundaries", prec), prec);
  } else {
    throw Error(ErrorCode::BAD_SPEC, "unknown dimension function kind '" + kind + "'");
  }

  auto grid = clip_grid(dyadic_grid(256, prec), {f});
  auto v = validate_gauge(f, grid, default_eps_cont(prec));
  if (!v.nondecreasing || !v.continuous) throw Error(ErrorCode::NON_MONOTONE, v.detail);
  if (!v.ok()) throw Error(ErrorCode::BAD_SPEC, v.detail);
  return f;
}

static void serialize_into(const DimFunc& f, const std::string& prefix, Config& out) {
  out.set(prefix + "kind", func_kind_name(f->kind));
  auto put_list = [&](const std::string& key, const std::vector<Real>& xs) {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i) {
      if (i) s += ";";
      s += xs[i].hex();
    }
    out.set(prefix + key, s);
  };
  switch (f->kind) {
    case FuncKind::Power:
      out.set(prefix + "s", std::to_string(f->s.num) + "/" + std::to_string(f->s.den));
      break;
    case FuncKind::PowerLog:
      out.set(prefix + "s", std::to_string(f->s.num) + "/" + std::to_string(f->s.den));
      out.set(prefix + "a", std::to_string(f->log_power));
      break;
    case FuncKind::PiecewiseMaxF:
      serialize_into(f->base, prefix + "base.", out);
      put_list("deltas", f->breaks);
      break;
    case FuncKind::PiecewiseExpG:
      serialize_into(f->base, prefix + "base.", out);
      put_list("ts", f->breaks);
      break;
    case FuncKind::PiecewiseExpInterp:
      serialize_into(f->base, prefix + "base.", out);
      put_list("as", f->breaks);
      break;
    case FuncKind::OscillatingBlocks:
      out.set(prefix + "lo_exp", std::to_string(f->lo_exp.num) + "/" + std::to_string(f->lo_exp.den));
      out.set(prefix + "hi_exp", std::to_string(f->hi_exp.num) + "/" + std::to_string(f->hi_exp.den));
      put_list("boundaries", f->breaks);
      break;
  }
}

Config serialize_dimfunc(const DimFunc& f) {
  Config c;
  serialize_into(f, "", c);
  return c;
}

// ---------------------------------------------------------------------------
// grids and validation

std::vector<Real> dyadic_grid(int j_max, Prec prec) {
  std::vector<Real> g;
  g.reserve(j_max + 1);
  for (int j = 0; j <= j_max; ++j) g.push_back(Real::pow2(-j, prec));
  return g;
}

std::vector<Real> clip_grid(std::vector<Real> grid, const std::vector<DimFunc>& fs,
                            bool need_doubling) {
  std::vector<Real> out;
  for (auto& t : grid) {
    bool ok = true;
    for (const auto& f : fs) {
      if (!f->in_domain(t)) ok = false;
      if (need_doubling && !f->in_domain(ldexp2(t, 1))) ok = false;
    }
    if (ok) out.push_back(std::move(t));
  }
  return out;
}

Real default_eps_cont(Prec prec) { return Real::pow2(-(prec - 32), prec); }

GaugeValidation validate_gauge(const DimFunc& f, const std::vector<Real>& grid,
                               const Real& eps_cont) {
  GaugeValidation v;
  if (grid.size() < 2) {
    v.detail = "grid too small";
    return v;
  }
  Prec prec = f->prec;
  Real one_plus_eps = add(Real::one(prec), eps_cont, prec, Rnd::Up);

  v.positive = true;
  v.nondecreasing = true;
  std::vector<Real> vals;
  vals.reserve(grid.size());
  for (const auto& t : grid) vals.push_back(f->eval(t));
  for (size_t i = 0; i < vals.size(); ++i) {
    if (!(vals[i].sign() > 0)) {
      v.positive = false;
      v.detail = "not positive at t = " + grid[i].dec(8);
      return v;
    }
    // grid descends, so vals must not increase beyond tolerance
    if (i > 0 && vals[i] > mul(vals[i - 1], one_plus_eps, prec, Rnd::Up)) {
      v.nondecreasing = false;
      v.detail = "decreasing in t near t = " + grid[i].dec(8);
      return v;
    }
  }

  // finite stand-in for eval -> 0: at least a halving across the grid
  v.tends_to_zero = vals.back() <= ldexp2(vals.front(), -1);
  if (!v.tends_to_zero) {
    v.detail = "no decay evidence across the grid (grid may be too shallow)";
    return v;
  }

  v.continuous = true;
  for (const auto& b : f->breakpoints()) {
    bool has_below = f->domain.lo_open ? (b > f->domain.lo) : (b > f->domain.lo);
    Real above = f->piece_value_above(b);
    if (!has_below) continue;
    Real below = f->piece_value_below(b);
    Real gap = abs_r(above - below);
    Real scale = max_r(abs_r(above), abs_r(below));
    if (gap > mul(scale, eps_cont, prec, Rnd::Up)) {
      v.continuous = false;
      v.detail = "discontinuity at breakpoint t = " + b.dec(12);
      return v;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// class D_d membership

DoublingReport check_membership_dd(const DimFunc& f, int d, const std::vector<Real>& grid) {
  if (grid.empty()) throw Error(ErrorCode::EMPTY_GRID, "check_membership_dd");
  if (d < 1) throw Error(ErrorCode::BAD_SPEC, "dimension must be >= 1");
  DoublingReport rep;
  rep.grid = grid;
  Prec prec = f->prec;
  std::vector<Real> v0s, v1s;
  for (const auto& t : grid) {
    Real ft = f->eval(t);
    v0s.push_back(div(pow_si(t, d, prec), ft, prec));
    Real t2 = ldexp2(t, 1);
    if (f->in_domain(t2)) v1s.push_back(div(f->eval(t2), ft, prec));
  }
  auto sup = [&](const std::vector<Real>& xs) {
    Real m = xs.front();
    for (const auto& x : xs)
      if (x > m) m = x;
    return m;
  };
  auto divergent = [&](std::vector<Real> xs) {
    if (xs.size() < 4) return false;
    Real last = xs.back();
    std::sort(xs.begin(), xs.end());
    Real median = xs[xs.size() / 2];
    return last > ldexp2(median, 1);
  };
  rep.c0_estimate = sup(v0s);
  rep.c0_divergent = divergent(v0s);
  if (!v1s.empty()) {
    rep.c1_estimate = sup(v1s);
    rep.c1_divergent = divergent(v1s);
  } else {
    rep.c1_estimate = Real::nan(prec);
  }
  rep.passed = rep.c0_estimate.is_finite() &&
               (v1s.empty() || rep.c1_estimate.is_finite()) && !rep.c0_divergent &&
               !rep.c1_divergent;
  return rep;
}

// ---------------------------------------------------------------------------
// order classification

const char* order_verdict_name(OrderVerdict v) {
  switch (v) {
    case OrderVerdict::SMALLER: return "SMALLER";
    case OrderVerdict::LARGER: return "LARGER";
    case OrderVerdict::COMPARABLE: return "COMPARABLE";
    case OrderVerdict::LIMINF_ZERO_ONLY: return "LIMINF_ZERO_ONLY";
    case OrderVerdict::INCONCLUSIVE: return "INCONCLUSIVE";
  }
  return "?";
}

OrderClassification compare_order(const DimFunc& g, const DimFunc& h,
                                  const std::vector<Real>& grid) {
  if (grid.empty()) throw Error(ErrorCode::EMPTY_GRID, "compare_order");
  OrderClassification out;
  Prec prec = std::max(g->prec, h->prec);
  out.ratio_trace.reserve(grid.size());
  for (const auto& t : grid)
    out.ratio_trace.emplace_back(t, div(h->eval(t), g->eval(t), prec));

  const Real low = Real::pow2(kOrderLowLog2, prec);
  const Real high = Real::pow2(kOrderHighLog2, prec);
  const Real comp_lo = Real::pow2(-kOrderComparableBand, prec);
  const Real comp_hi = Real::pow2(kOrderComparableBand, prec);
  const Real big = Real::pow2(-kOrderLowLog2, prec);
  const Real big_high = Real::pow2(-kOrderHighLog2, prec);

  bool all_comparable = true;
  long first_low = -1, first_big = -1;
  int lows = 0, bigs = 0;
  for (size_t i = 0; i < out.ratio_trace.size(); ++i) {
    const Real& r = out.ratio_trace[i].second;
    if (!(comp_lo <= r && r <= comp_hi)) all_comparable = false;
    if (r < low) {
      ++lows;
      if (first_low < 0) first_low = static_cast<long>(i);
    }
    if (r > big) {
      ++bigs;
      if (first_big < 0) first_big = static_cast<long>(i);
    }
  }
  if (all_comparable) {
    out.verdict = OrderVerdict::COMPARABLE;
    return out;
  }
  int highs_after_low = 0, smalls_after_big = 0;
  for (size_t i = 0; i < out.ratio_trace.size(); ++i) {
    const Real& r = out.ratio_trace[i].second;
    if (first_low >= 0 && static_cast<long>(i) > first_low && r > high) ++highs_after_low;
    if (first_big >= 0 && static_cast<long>(i) > first_big && r < big_high) ++smalls_after_big;
  }
  if (lows >= kOrderWitnesses && highs_after_low >= kOrderWitnesses)
    out.verdict = OrderVerdict::LIMINF_ZERO_ONLY;
  else if (lows >= kOrderWitnesses && highs_after_low == 0)
    out.verdict = OrderVerdict::SMALLER;
  else if (bigs >= kOrderWitnesses && smalls_after_big == 0)
    out.verdict = OrderVerdict::LARGER;
  else
    out.verdict = OrderVerdict::INCONCLUSIVE;
  return out;
}

}  // namespace packlab
