#include "packlab/constructions.hpp"

#include <algorithm>

#include "packlab/error.hpp"

namespace packlab {

namespace {

Real mpz_to_real(const mpz_class& n, Prec prec, Rnd rnd = Rnd::Near) {
  Real r(prec);
  mpfr_set_z(r.raw(), n.get_mpz_t(), to_mpfr(rnd));
  return r;
}

Prec mpz_bits(const mpz_class& n) {
  return static_cast<Prec>(mpz_sizeinbase(n.get_mpz_t(), 2));
}

}  // namespace

// ---------------------------------------------------------------------------
// delta sequences

SequenceValidation validate_delta_sequence(const DimFunc& h, const DeltaSequence& seq) {
  SequenceValidation v;
  const auto& d = seq.values;
  if (d.size() < 2) {
    v.first_fail = 0;
    v.reason = "need at least two deltas";
    return v;
  }
  Prec prec = h->prec;
  for (size_t n = 0; n < d.size(); ++n) {
    if (!(d[n].sign() > 0) || !h->in_domain(d[n])) {
      v.first_fail = static_cast<long>(n);
      v.reason = "delta not positive / outside gauge domain";
      return v;
    }
    if (n > 0 && !(d[n] < d[n - 1])) {
      v.first_fail = static_cast<long>(n);
      v.reason = "deltas not strictly decreasing";
      return v;
    }
    // premeasure bound: caller-certified, else k h(delta_n) for a k-point set
    Real bound = n < seq.premeasure_bounds.size()
                     ? seq.premeasure_bounds[n]
                     : mul(Real::of_ulong(seq.instance_points, prec), h->eval_rnd(d[n], Rnd::Up),
                           prec, Rnd::Up);
    if (!(bound <= Real::pow2(-2 * static_cast<long>(n), prec))) {
      v.first_fail = static_cast<long>(n);
      v.reason = "premeasure bound exceeds 2^{-2n}";
      return v;
    }
  }
  for (size_t n = 0; n + 1 < d.size(); ++n) {
    if (!(ldexp2(h->eval(d[n + 1]), 1) < h->eval(d[n]))) {
      v.first_fail = static_cast<long>(n + 1);
      v.reason = "2 h(delta_{n+1}) >= h(delta_n)";
      return v;
    }
  }
  v.ok = true;
  return v;
}

DeltaSequence solve_delta_sequence(const DimFunc& h, std::uint64_t k_points, int count) {
  if (count < 2) throw Error(ErrorCode::BAD_SPEC, "need at least two deltas");
  Prec prec = h->prec;
  DeltaSequence seq;
  seq.instance_points = k_points;
  Real k = Real::of_ulong(k_points, prec);
  long j_prev = 0;
  for (int n = 0; n < count; ++n) {
    Real cap = Real::pow2(-2 * n, prec);
    long j = std::max<long>(j_prev + (n > 0 ? 1 : 0), 0);
    bool found = false;
    for (; j <= 4096; ++j) {
      Real t = Real::pow2(-j, prec);
      if (!h->in_domain(t)) continue;
      if (!(mul(k, h->eval_rnd(t, Rnd::Up), prec, Rnd::Up) <= cap)) continue;
      if (n > 0 && !(ldexp2(h->eval(t), 1) < h->eval(seq.values.back()))) continue;
      seq.values.push_back(t);
      found = true;
      break;
    }
    if (!found) throw Error(ErrorCode::NO_ROOT, "no dyadic delta satisfies the chains at n = " +
                                                    std::to_string(n));
    j_prev = j;
  }
  auto v = validate_delta_sequence(h, seq);
  if (!v.ok) throw Error(ErrorCode::INVALID_SEQUENCE, "solver output failed validation: " + v.reason);
  return seq;
}

DimFunc construct_f(const DimFunc& h, const DeltaSequence& deltas) {
  auto v = validate_delta_sequence(h, deltas);
  if (!v.ok)
    throw Error(ErrorCode::INVALID_SEQUENCE,
                v.reason + " (index " + std::to_string(v.first_fail) + ")");
  DimFunc f = make_piecewise_max(h, deltas.values);

  Prec prec = h->prec;
  const auto& d = deltas.values;
  // forced boundary identity, bitwise: f(delta_n) = 2^n h(delta_n)
  for (size_t n = 0; n < d.size(); ++n) {
    Real expect = ldexp2(h->eval(d[n]), static_cast<long>(n));
    if (!(f->eval(d[n]) == expect))
      throw Error(ErrorCode::INVARIANT_FAIL, "f(delta_n) != 2^n h(delta_n) at n = " + std::to_string(n));
  }
  // per-piece ratio h/f <= 2^{-n} at piece midpoints
  for (size_t n = 0; n + 1 < d.size(); ++n) {
    Real mid = ldexp2(add(d[n], d[n + 1], prec), -1);
    Real lhs = h->eval(mid);
    Real rhs = ldexp2(f->eval(mid), -static_cast<long>(n));
    if (lhs > rhs)
      throw Error(ErrorCode::INVARIANT_FAIL, "h/f ratio bound fails inside piece " + std::to_string(n));
  }
  auto grid = clip_grid(dyadic_grid(256, prec), {f});
  auto gv = validate_gauge(f, grid, default_eps_cont(prec));
  if (!gv.ok()) throw Error(ErrorCode::INVARIANT_FAIL, "constructed f fails the gauge suite: " + gv.detail);
  return f;
}

Packing random_instance_packing(const FiniteInstance& inst, const Real& delta0, Rng& rng) {
  if (inst.points.empty()) throw Error(ErrorCode::EMPTY_INPUT, "instance has no points");
  Prec prec = delta0.prec();
  Packing p;
  p.delta = delta0;
  PackingComponent comp;
  for (size_t i = 0; i < inst.points.size(); ++i) {
    Real frac = rng.real01(prec);
    if (frac.is_zero()) continue;
    Real radius = ldexp2(mul(delta0, frac, prec, Rnd::Down), -1);  // diameter < delta0
    if (!(radius.sign() > 0)) continue;
    bool ok = true;
    for (const auto& b : comp.balls) {
      Real dist_sq = Real::zero(2 * prec + 8);
      for (size_t c = 0; c < inst.points[i].size(); ++c) {
        Real dcoord = sub(inst.points[i][c], b.center[c], prec + 8, Rnd::Near);
        dist_sq = add(dist_sq, mul(dcoord, dcoord, 2 * prec + 8, Rnd::Near), 2 * prec + 8, Rnd::Near);
      }
      Real rr = add(radius, b.radius, prec + 8, Rnd::Up);
      if (dist_sq < mul(rr, rr, 2 * prec + 8, Rnd::Up)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      comp.balls.push_back(Ball{inst.points[i], radius});
      BallWitness w;
      w.kind = BallWitness::Candidate;
      w.index = i;
      comp.witnesses.push_back(w);
    }
  }
  p.components.push_back(std::move(comp));
  return p;
}

// ---------------------------------------------------------------------------
// diameter streams

Interval DiameterStream::partial_sum_bounds(const DimFunc&, const mpz_class&, Prec) const {
  throw Error(ErrorCode::BAD_SPEC, "stream has no certified sum oracle");
}

Real DiameterStream::diameter_at(const mpz_class& i, Prec prec) const {
  if (!i.fits_ulong_p()) throw Error(ErrorCode::DEPTH_EXCEEDED, "index beyond enumeration range");
  return diameter(i.get_ui(), prec);
}

Real HarmonicStream::diameter(std::uint64_t i, Prec prec) const {
  if (i == 0) throw Error(ErrorCode::BAD_SPEC, "stream indices start at 1");
  return div(Real::one(prec), Real::of_ulong(i, prec), prec, Rnd::Near);
}

Real HarmonicStream::diameter_at(const mpz_class& i, Prec prec) const {
  if (i <= 0) throw Error(ErrorCode::BAD_SPEC, "stream indices start at 1");
  Prec p = std::max(prec, mpz_bits(i) + 8);
  return div(Real::one(prec), mpz_to_real(i, p), prec, Rnd::Near);
}

bool HarmonicStream::has_sum_oracle(const DimFunc& h) const {
  return h->kind == FuncKind::Power && h->s.num == 1 && h->s.den == 1;
}

Interval HarmonicStream::partial_sum_bounds(const DimFunc& h, const mpz_class& n, Prec prec) const {
  if (!has_sum_oracle(h))
    throw Error(ErrorCode::BAD_SPEC, "harmonic oracle applies to the identity gauge only");
  if (n <= 0) throw Error(ErrorCode::BAD_SPEC, "need n >= 1");
  // H_n = ln n + gamma + 1/(2n) - 1/(12 n^2) + theta/(120 n^4), 0 < theta < 1
  Prec p = std::max(prec, mpz_bits(n) + 64);
  Real nr = mpz_to_real(n, p);
  Real n2 = mul(nr, nr, p, Rnd::Down);
  Real n2u = mul(nr, nr, p, Rnd::Up);
  auto gamma = [&](Rnd r) {
    Real g(p);
    mpfr_const_euler(g.raw(), to_mpfr(r));
    return g;
  };
  Real lo = log_r(nr, p, Rnd::Down);
  lo = add(lo, gamma(Rnd::Down), p, Rnd::Down);
  lo = add(lo, div(Real::pow2(-1, p), nr, p, Rnd::Down), p, Rnd::Down);
  lo = sub(lo, div(Real::one(p), ldexp2(mul(Real::of_long(3, p), n2u, p, Rnd::Up), 2), p, Rnd::Up),
           p, Rnd::Down);
  Real hi = log_r(nr, p, Rnd::Up);
  hi = add(hi, gamma(Rnd::Up), p, Rnd::Up);
  hi = add(hi, div(Real::pow2(-1, p), nr, p, Rnd::Up), p, Rnd::Up);
  hi = sub(hi, div(Real::one(p), ldexp2(mul(Real::of_long(3, p), n2u, p, Rnd::Up), 2), p, Rnd::Down),
           p, Rnd::Up);
  Real n4 = mul(n2, n2, p, Rnd::Down);
  hi = add(hi, div(Real::one(p), mul(Real::of_long(120, p), n4, p, Rnd::Down), p, Rnd::Up), p,
           Rnd::Up);
  return {lo, hi};
}

ListStream::ListStream(std::vector<Real> diameters) : diameters_(std::move(diameters)) {
  for (size_t i = 1; i < diameters_.size(); ++i)
    if (diameters_[i] > diameters_[i - 1])
      throw Error(ErrorCode::BAD_SPEC, "list stream must be nonincreasing");
}

Real ListStream::diameter(std::uint64_t i, Prec) const {
  if (i == 0 || i > diameters_.size())
    throw Error(ErrorCode::SUM_TOO_SLOW, "list stream exhausted at index " + std::to_string(i));
  return diameters_[i - 1];
}

std::string InversePowerStream::name() const {
  return "inverse_power(" + std::to_string(p_.num) + "/" + std::to_string(p_.den) + ")";
}

Real InversePowerStream::diameter(std::uint64_t i, Prec prec) const {
  if (i == 0) throw Error(ErrorCode::BAD_SPEC, "stream indices start at 1");
  return rational_pow(Real::of_ulong(i, prec), -p_.num, p_.den, prec, Rnd::Near);
}

// ---------------------------------------------------------------------------
// amplified gauge

namespace {

// minimal n with certified partial sum > thr, via the stream oracle
mpz_class oracle_minimal_n(const DiameterStream& stream, const DimFunc& h, const Real& thr,
                           Real& sum_lower_out) {
  Prec p = 512;
  for (int attempt = 0; attempt < 8; ++attempt, p *= 2) {
    Real gamma(p);
    mpfr_const_euler(gamma.raw(), MPFR_RNDN);
    Real thr_p(p);
    mpfr_set(thr_p.raw(), thr.raw(), MPFR_RNDN);
    Real guess = exp_r(sub(thr_p, gamma, p, Rnd::Near), p, Rnd::Near);
    mpz_class n;
    mpfr_get_z(n.get_mpz_t(), guess.raw(), MPFR_RNDD);
    if (n < 1) n = 1;

    auto lower_gt = [&](const mpz_class& m) {
      return stream.partial_sum_bounds(h, m, p).lo > thr_p;
    };
    auto upper_le = [&](const mpz_class& m) {
      return stream.partial_sum_bounds(h, m, p).hi <= thr_p;
    };

    // walk to the boundary (the guess lands within a few steps of it)
    long walked = 0;
    while (n > 1 && lower_gt(n - 1) && walked < 64) {
      --n;
      ++walked;
    }
    while (!lower_gt(n) && walked < 128) {
      ++n;
      ++walked;
    }
    if (walked >= 128) continue;  // guess was off; retry with more precision
    if (n == 1 || upper_le(n - 1)) {
      sum_lower_out = stream.partial_sum_bounds(h, n, p).lo;
      return n;
    }
    // enclosures straddle the threshold: raise the precision
  }
  throw Error(ErrorCode::INVARIANT_FAIL, "oracle could not certify a minimal prefix");
}

}  // namespace

std::pair<TSequence, DimFunc> construct_g(const DimFunc& h, const DiameterStream& stream, int J,
                                          std::uint64_t scan_budget) {
  if (J < 1) throw Error(ErrorCode::BAD_SPEC, "need at least one stage");
  Prec prec = h->prec;
  Prec sp = prec + 32;
  TSequence seq;
  seq.stream_name = stream.name();

  Real shrink = sub(Real::one(prec), Real::pow2(-8, prec), prec, Rnd::Near);  // 1 - 2^-8
  bool oracle = stream.has_sum_oracle(h);

  Real running = Real::zero(sp);  // certified lower bound on the partial sum
  std::uint64_t idx = 0;
  Real last_diam;

  for (int j = 1; j <= J; ++j) {
    Real thr = Real::pow2(2 * j, prec);
    TStage st;
    if (!oracle) {
      while (!(running > thr)) {
        if (idx >= scan_budget)
          throw Error(ErrorCode::SUM_TOO_SLOW, "partial sums below 4^" + std::to_string(j) +
                                                   " after " + std::to_string(idx) + " terms");
        ++idx;
        Real d = stream.diameter(idx, prec);
        if (idx > 1 && d > last_diam)
          throw Error(ErrorCode::BAD_SPEC, "stream diameters must be nonincreasing");
        if (!h->in_domain(d)) throw Error(ErrorCode::OUT_OF_DOMAIN, "diameter outside gauge domain");
        running = add(running, h->eval_rnd(d, Rnd::Down), sp, Rnd::Down);
        last_diam = d;
      }
      st.N = mpz_class(static_cast<unsigned long>(idx));
      st.min_diameter = last_diam;
      st.sum_lower = running;
      st.scanned = true;
    } else {
      Real sum_lower(prec);
      mpz_class n = oracle_minimal_n(stream, h, thr, sum_lower);
      // keep N_j strictly increasing even when one prefix crosses two
      // thresholds
      if (!seq.stages.empty() && n <= seq.stages.back().N) n = seq.stages.back().N + 1;
      st.N = n;
      st.min_diameter = stream.diameter_at(n, prec);
      st.sum_lower = sum_lower;
      st.scanned = false;
    }
    st.t = mul(st.min_diameter, shrink, prec, Rnd::Down);
    if (!seq.stages.empty() && !(st.t < seq.stages.back().t))
      st.t = mul(seq.stages.back().t, shrink, prec, Rnd::Down);
    if (!(st.t < st.min_diameter))
      throw Error(ErrorCode::INVARIANT_FAIL, "t_j must stay below the minimum prefix diameter");
    st.chain_lower = ldexp2(st.sum_lower, -j);
    if (!(st.chain_lower > Real::pow2(j, prec)))
      throw Error(ErrorCode::INVARIANT_FAIL, "certified chain misses 2^j at stage " + std::to_string(j));
    seq.stages.push_back(std::move(st));
  }

  // bridging top piece keeps the gauge continuous where the raw formula
  // would jump by a factor 2 at t_1
  const Real& t1 = seq.stages.front().t;
  Real t0 = min_r(ldexp2(t1, 1), ldexp2(add(Real::one(prec), t1, prec), -1));
  std::vector<Real> breaks;
  breaks.push_back(t0);
  for (const auto& st : seq.stages) breaks.push_back(st.t);
  DimFunc g = make_piecewise_exp(h, breaks, FuncKind::PiecewiseExpG);

  // forced boundary identity, bitwise: g(t_j) = 2^{-j} h(t_j)
  for (int j = 1; j <= J; ++j) {
    const Real& tj = seq.stages[j - 1].t;
    if (!(g->eval(tj) == ldexp2(h->eval(tj), -j)))
      throw Error(ErrorCode::INVARIANT_FAIL, "g(t_j) != 2^{-j} h(t_j) at j = " + std::to_string(j));
  }
  // per-piece ratio bound g/h <= 2^{1-j}, sampled at midpoints
  for (size_t j = 1; j < breaks.size(); ++j) {
    Real mid = ldexp2(add(breaks[j], breaks[j - 1], prec), -1);
    if (mul(g->eval(mid), Real::pow2(static_cast<long>(j) - 1, prec), prec, Rnd::Down) >
        h->eval(mid))
      throw Error(ErrorCode::INVARIANT_FAIL, "ratio bound fails inside piece " + std::to_string(j));
  }
  auto grid = clip_grid(dyadic_grid(256, prec), {g});
  auto gv = validate_gauge(g, grid, default_eps_cont(prec));
  if (!gv.ok()) throw Error(ErrorCode::INVARIANT_FAIL, "constructed g fails the gauge suite: " + gv.detail);
  return {std::move(seq), std::move(g)};
}

// ---------------------------------------------------------------------------
// exp interpolation over a scale list

DimFunc construct_g_interp(const DimFunc& h, const std::vector<Real>& as) {
  if (as.size() < 2) throw Error(ErrorCode::BAD_SEQUENCE, "need at least two scales");
  for (size_t i = 0; i < as.size(); ++i) {
    if (!(as[i].sign() > 0)) throw Error(ErrorCode::BAD_SEQUENCE, "scales must be positive");
    if (i > 0 && !(as[i] < as[i - 1]))
      throw Error(ErrorCode::BAD_SEQUENCE, "scales must be strictly decreasing");
    if (!h->in_domain(as[i])) throw Error(ErrorCode::BAD_SEQUENCE, "scale outside gauge domain");
  }
  DimFunc g = make_piecewise_exp(h, as, FuncKind::PiecewiseExpInterp);

  Prec prec = h->prec;
  for (size_t n = 1; n < as.size(); ++n) {
    Real expect = ldexp2(h->eval(as[n]), -static_cast<long>(n));
    if (!(g->eval(as[n]) == expect))
      throw Error(ErrorCode::INVARIANT_FAIL, "g(a_n) != h(a_n)/2^n at n = " + std::to_string(n));
    // one-sided limits agree (value owned by the piece below)
    Real above = g->piece_value_above(as[n]);
    if (!(above == expect))
      throw Error(ErrorCode::INVARIANT_FAIL, "one-sided mismatch at a_n, n = " + std::to_string(n));
  }
  for (size_t n = 1; n < as.size(); ++n) {
    Real mid = ldexp2(add(as[n], as[n - 1], prec), -1);
    if (mul(g->eval(mid), Real::pow2(static_cast<long>(n) - 1, prec), prec, Rnd::Down) >
        h->eval(mid))
      throw Error(ErrorCode::INVARIANT_FAIL, "ratio bound fails inside piece " + std::to_string(n));
  }
  auto grid = clip_grid(dyadic_grid(256, prec), {g});
  auto gv = validate_gauge(g, grid, default_eps_cont(prec));
  if (!gv.ok())
    throw Error(ErrorCode::INVARIANT_FAIL, "constructed interpolation fails the gauge suite: " + gv.detail);
  return g;
}

}  // namespace packlab
