#include "packlab/packing.hpp"

#include <algorithm>

#include "packlab/error.hpp"

namespace packlab {

namespace {

constexpr std::uint64_t kAllPairsBudget = 2048;
constexpr std::uint64_t kSortFallbackBudget = std::uint64_t{1} << 22;
constexpr int kStageBallBudgetBits = 21;

Real exact_add(const Real& a, const Real& b) {
  Prec p = std::max(a.prec(), b.prec()) + 4;
  for (int tries = 0; tries < 4; ++tries) {
    Real r(p);
    if (mpfr_add(r.raw(), a.raw(), b.raw(), MPFR_RNDN) == 0) return r;
    p *= 2;
  }
  throw Error(ErrorCode::INVARIANT_FAIL, "exact addition failed to terminate");
}

Real exact_sub(const Real& a, const Real& b) {
  Prec p = std::max(a.prec(), b.prec()) + 4;
  for (int tries = 0; tries < 4; ++tries) {
    Real r(p);
    if (mpfr_sub(r.raw(), a.raw(), b.raw(), MPFR_RNDN) == 0) return r;
    p *= 2;
  }
  throw Error(ErrorCode::INVARIANT_FAIL, "exact subtraction failed to terminate");
}

Real exact_sq(const Real& a) {
  Real r(2 * a.prec() + 4);
  mpfr_mul(r.raw(), a.raw(), a.raw(), MPFR_RNDN);
  return r;
}

// squared center distance, exact
Real center_dist_sq(const std::vector<Real>& a, const std::vector<Real>& b) {
  Real s = Real::zero(64);
  for (size_t i = 0; i < a.size(); ++i) s = exact_add(s, exact_sq(exact_sub(a[i], b[i])));
  return s;
}

bool balls_disjoint(const std::vector<Real>& ca, const Real& ra, const std::vector<Real>& cb,
                    const Real& rb) {
  return center_dist_sq(ca, cb) >= exact_sq(exact_add(ra, rb));
}

}  // namespace

ModelPtr build_model_shared(const DimFunc& h, int d, int N, const ScaleOptions& opts) {
  return std::make_shared<CantorModel>(build_model(h, d, N, opts));
}

// ---------------------------------------------------------------------------
// packing enumeration

std::uint64_t Packing::block_count(const PackingComponent& c) const {
  if (!c.is_block) return c.balls.size();
  if (!model) throw Error(ErrorCode::BAD_SPEC, "block packing without a model");
  int span = model->d() * (c.block.cube_level - static_cast<int>(c.block.region.size()));
  if (span < 0 || span > 62) throw Error(ErrorCode::DEPTH_EXCEEDED, "block too large");
  std::uint64_t n = std::uint64_t{1} << span;
  return c.block.drop_last ? n - 1 : n;
}

std::uint64_t Packing::count() const {
  std::uint64_t n = 0;
  for (const auto& c : components) n += block_count(c);
  return n;
}

void Packing::for_each_ball(const BallVisitor& fn) const {
  std::uint64_t idx = 0;
  for (const auto& c : components) {
    if (!c.is_block) {
      for (const auto& b : c.balls) fn(idx++, b.center, b.radius);
      continue;
    }
    const CantorModel& m = *model;
    int d = m.d();
    int l0 = static_cast<int>(c.block.region.size());
    int L = c.block.cube_level;
    std::uint64_t total = block_count(c) + (c.block.drop_last ? 1 : 0);
    std::uint64_t emitted = 0;
    std::uint32_t selectors = 1u << d;
    std::vector<Real> corner = m.cube_corner(c.block.region);
    std::function<void(std::vector<Real>&, int)> rec = [&](std::vector<Real>& cur, int level) {
      if (level == L) {
        if (!(c.block.drop_last && emitted == total - 1)) fn(idx++, cur, c.block.radius);
        ++emitted;
        return;
      }
      std::vector<Real> child(cur);
      for (std::uint32_t sel = 0; sel < selectors; ++sel) {
        for (int i = 0; i < d; ++i)
          child[i] = (sel >> i & 1)
                         ? add(cur[i], m.corner_width(level + 1), m.corner_prec(), Rnd::Near)
                         : cur[i];
        rec(child, level + 1);
      }
    };
    rec(corner, l0);
  }
}

Ball Packing::ball_at(std::uint64_t index) const {
  for (const auto& c : components) {
    std::uint64_t n = block_count(c);
    if (index >= n) {
      index -= n;
      continue;
    }
    if (!c.is_block) return c.balls[index];
    const CantorModel& m = *model;
    int l0 = static_cast<int>(c.block.region.size());
    // local index -> address suffix (drop_last never hides an interior index)
    CubeAddress addr = c.block.region;
    CubeAddress suffix = m.address_of_index(index, c.block.cube_level - l0);
    // address_of_index builds level-(L-l0) addresses of a root-anchored
    // tree; the suffix transplants below the region
    addr.insert(addr.end(), suffix.begin(), suffix.end());
    return Ball{m.cube_corner(addr), c.block.radius};
  }
  throw Error(ErrorCode::BAD_ADDRESS, "ball index out of range");
}

// ---------------------------------------------------------------------------
// verification

namespace {

Real block_min_gap(const CantorModel& m, const CornerBlock& b) {
  // minimum pairwise corner distance over the family; attained by the
  // adjacent pair that diverges at level k with an all-ones / all-zeros
  // tail: gap_k = a_{k-1} - 2 a_k + a_L
  int l0 = static_cast<int>(b.region.size());
  int L = b.cube_level;
  Prec p = m.corner_prec();
  Real best(p);
  mpfr_set_inf(best.raw(), 1);
  const Real& aL = m.scale(L);
  for (int k = l0 + 1; k <= L; ++k) {
    Real g = exact_add(exact_sub(m.scale(k - 1), ldexp2(m.scale(k), 1)), aL);
    if (g < best) best = g;
  }
  return best;
}

// exact squared distance from a point to the axis box [corner, corner+side]^d
Real point_box_dist_sq(const std::vector<Real>& x, const std::vector<Real>& corner,
                       const Real& side) {
  Real s = Real::zero(64);
  for (size_t i = 0; i < x.size(); ++i) {
    Real lo_gap = exact_sub(corner[i], x[i]);
    Real hi_gap = exact_sub(x[i], exact_add(corner[i], side));
    Real gap = Real::zero(64);
    if (lo_gap.sign() > 0)
      gap = lo_gap;
    else if (hi_gap.sign() > 0)
      gap = hi_gap;
    s = exact_add(s, exact_sq(gap));
  }
  return s;
}

bool sweep_1d(const Packing& p, PackingVerification& v) {
  bool ordered = true;
  bool first = true;
  Real prev_c, prev_r;
  std::uint64_t prev_i = 0;
  p.for_each_ball([&](std::uint64_t i, const std::vector<Real>& c, const Real& r) {
    if (!ordered || !v.disjoint) return;
    if (!first) {
      if (c[0] < prev_c) {
        ordered = false;
        return;
      }
      if (exact_sub(c[0], prev_c) < exact_add(prev_r, r)) {
        v.disjoint = false;
        v.bad_i = static_cast<long long>(prev_i);
        v.bad_j = static_cast<long long>(i);
      }
    }
    prev_c = c[0];
    prev_r = r;
    prev_i = i;
    first = false;
  });
  return ordered;
}

void sorted_sweep_1d(const Packing& p, PackingVerification& v) {
  if (p.count() > kSortFallbackBudget)
    throw Error(ErrorCode::DEPTH_EXCEEDED, "unsorted packing too large to verify");
  struct Entry {
    Real c, r;
    std::uint64_t i;
  };
  std::vector<Entry> es;
  es.reserve(p.count());
  p.for_each_ball([&](std::uint64_t i, const std::vector<Real>& c, const Real& r) {
    es.push_back({c[0], r, i});
  });
  std::sort(es.begin(), es.end(), [](const Entry& a, const Entry& b) { return a.c < b.c; });
  for (size_t k = 1; k < es.size() && v.disjoint; ++k) {
    if (exact_sub(es[k].c, es[k - 1].c) < exact_add(es[k - 1].r, es[k].r)) {
      v.disjoint = false;
      v.bad_i = static_cast<long long>(es[k - 1].i);
      v.bad_j = static_cast<long long>(es[k].i);
    }
  }
}

void all_pairs(const Packing& p, PackingVerification& v) {
  std::vector<Ball> balls;
  balls.reserve(p.count());
  p.for_each_ball([&](std::uint64_t, const std::vector<Real>& c, const Real& r) {
    balls.push_back(Ball{c, r});
  });
  for (size_t i = 0; i + 1 < balls.size() && v.disjoint; ++i)
    for (size_t j = i + 1; j < balls.size(); ++j)
      if (!balls_disjoint(balls[i].center, balls[i].radius, balls[j].center, balls[j].radius)) {
        v.disjoint = false;
        v.bad_i = static_cast<long long>(i);
        v.bad_j = static_cast<long long>(j);
        break;
      }
}

void structural_check(const Packing& p, PackingVerification& v) {
  const CantorModel& m = *p.model;
  // within each block: attained min corner gap vs 2r
  for (const auto& c : p.components) {
    if (!c.is_block) throw Error(ErrorCode::DEPTH_EXCEEDED, "packing too large for pair checks");
    if (c.block.cube_level > static_cast<int>(c.block.region.size())) {
      if (block_min_gap(m, c.block) < ldexp2(c.block.radius, 1)) {
        v.disjoint = false;
        return;
      }
    }
  }
  // cross-component: later components live inside nested region boxes
  for (size_t j = 1; j < p.components.size() && v.disjoint; ++j) {
    const auto& later = p.components[j].block;
    auto box_corner = m.cube_corner(later.region);
    const Real& side = m.scale(static_cast<int>(later.region.size()));
    for (size_t i = 0; i < j && v.disjoint; ++i) {
      Real need = exact_sq(exact_add(p.components[i].block.radius, later.radius));
      std::uint64_t local = 0;
      Packing one;
      one.model = p.model;
      one.delta = p.delta;
      one.components.push_back(p.components[i]);
      one.for_each_ball([&](std::uint64_t, const std::vector<Real>& c, const Real& r) {
        (void)r;
        if (!v.disjoint) return;
        // balls whose center lies inside the later box belong to deeper
        // stages only when i > j; here the box must clear every earlier ball
        if (point_box_dist_sq(c, box_corner, side) < need) v.disjoint = false;
        ++local;
      });
    }
  }
}

}  // namespace

PackingVerification verify_packing(const Packing& p) {
  PackingVerification v;
  v.disjoint = true;
  v.diameters_ok = true;
  v.witnesses_ok = true;

  for (const auto& c : p.components) {
    if (c.is_block) {
      if (!p.model) throw Error(ErrorCode::BAD_SPEC, "block packing without a model");
      if (c.block.cube_level > p.model->depth() ||
          static_cast<int>(c.block.region.size()) > c.block.cube_level)
        v.witnesses_ok = false;
      if (!(ldexp2(c.block.radius, 1) < p.delta)) v.diameters_ok = false;
    } else {
      if (c.witnesses.size() != c.balls.size()) v.witnesses_ok = false;
      for (size_t i = 0; i < c.balls.size(); ++i) {
        if (!(ldexp2(c.balls[i].radius, 1) < p.delta)) v.diameters_ok = false;
        if (i < c.witnesses.size() && c.witnesses[i].kind == BallWitness::ModelVertex) {
          if (!p.model) {
            v.witnesses_ok = false;
            continue;
          }
          auto corner = p.model->cube_corner(c.witnesses[i].address);
          for (size_t k = 0; k < corner.size(); ++k)
            if (corner[k] != c.balls[i].center[k]) v.witnesses_ok = false;
        }
      }
    }
  }

  std::uint64_t total = p.count();
  if (total <= 1) {
    v.method = "trivial";
    return v;
  }
  if (total <= kAllPairsBudget) {
    v.method = "all-pairs";
    all_pairs(p, v);
    return v;
  }
  if (p.model && p.model->d() == 1) {
    v.method = "sweep-1d";
    if (!sweep_1d(p, v)) {
      v.method = "sorted-sweep-1d";
      v.disjoint = true;
      sorted_sweep_1d(p, v);
    }
    return v;
  }
  v.method = "block-gap+box";
  structural_check(p, v);
  return v;
}

// ---------------------------------------------------------------------------
// weights

Real packing_weight(const Packing& p, const DimFunc& g) {
  Prec prec = g->prec;
  Real w = Real::zero(prec);
  for (const auto& c : p.components) {
    if (c.is_block) {
      Real diam = ldexp2(c.block.radius, 1);
      if (!g->in_domain(diam))
        throw Error(ErrorCode::OUT_OF_DOMAIN, "diameter outside the gauge domain");
      Real term = g->eval(diam);
      std::uint64_t n = p.block_count(c);
      for (std::uint64_t i = 0; i < n; ++i) w = add(w, term, prec, Rnd::Near);
    } else {
      for (const auto& b : c.balls) {
        Real diam = ldexp2(b.radius, 1);
        if (!g->in_domain(diam))
          throw Error(ErrorCode::OUT_OF_DOMAIN, "diameter outside the gauge domain");
        w = add(w, g->eval(diam), prec, Rnd::Near);
      }
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// proof packings

Packing proof_packing(const ModelPtr& model, int m, const Real& r) {
  if (!model) throw Error(ErrorCode::BAD_SPEC, "missing model");
  if (m < 0 || m + 2 > model->depth())
    throw Error(ErrorCode::DEPTH_EXCEEDED, "need a_{m+2}: deepen the model");
  if (!(model->scale(m + 2) < r && r <= model->scale(m + 1)))
    throw Error(ErrorCode::BAD_SPEC, "radius must lie in (a_{m+2}, a_{m+1}]");
  Packing p;
  p.model = model;
  p.delta = m == 0 ? Real::one(r.prec()) : model->scale(m);
  PackingComponent c;
  c.is_block = true;
  c.block = CornerBlock{{}, m, r, false};
  p.components.push_back(std::move(c));
  auto v = verify_packing(p);
  if (!v.disjoint)
    throw Error(ErrorCode::NOT_DISJOINT, "proof packing overlaps at pair (" +
                                             std::to_string(v.bad_i) + ", " +
                                             std::to_string(v.bad_j) + ")");
  return p;
}

// ---------------------------------------------------------------------------
// brute force

namespace {

bool mask_lex_less(std::uint32_t a, std::uint32_t b) {
  // ascending index sequences; the set owning the lowest differing index wins
  std::uint32_t diff = a ^ b;
  if (diff == 0) return false;
  std::uint32_t low = diff & (~diff + 1);
  return (a & low) != 0;
}

}  // namespace

PremeasureCertificate brute_force_packing(const std::vector<Ball>& candidates, const DimFunc& g,
                                          const Real& delta) {
  size_t n = candidates.size();
  if (n > 24) throw Error(ErrorCode::TOO_MANY_CANDIDATES, "brute force is capped at 24 candidates");
  Prec prec = g->prec;
  Prec guard = prec + 64;

  std::vector<std::uint32_t> conflicts(n, 0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      if (!balls_disjoint(candidates[i].center, candidates[i].radius, candidates[j].center,
                          candidates[j].radius)) {
        conflicts[i] |= 1u << j;
        conflicts[j] |= 1u << i;
      }

  std::vector<Real> weights;
  weights.reserve(n);
  for (const auto& b : candidates) weights.push_back(g->eval_rnd(ldexp2(b.radius, 1), Rnd::Near));

  Real best_w = Real::zero(guard);
  std::uint32_t best_mask = 0;
  bool have_best = false;

  // positive weights: optima are maximal independent sets; enumerate only
  // those, pruning exclusions no future candidate can justify
  std::function<void(size_t, std::uint32_t, std::uint32_t)> rec =
      [&](size_t idx, std::uint32_t chosen, std::uint32_t excluded) {
        if (idx == n) {
          for (size_t e = 0; e < n; ++e)
            if ((excluded >> e & 1) && (conflicts[e] & chosen) == 0) return;  // not maximal
          Real w = Real::zero(guard);
          for (size_t i = 0; i < n; ++i)
            if (chosen >> i & 1) w = add(w, weights[i], guard, Rnd::Near);
          if (!have_best || w > best_w || (w == best_w && mask_lex_less(chosen, best_mask))) {
            best_w = w;
            best_mask = chosen;
            have_best = true;
          }
          return;
        }
        std::uint32_t bit = 1u << idx;
        if (conflicts[idx] & chosen) {
          rec(idx + 1, chosen, excluded);
          return;
        }
        rec(idx + 1, chosen | bit, excluded);
        std::uint32_t future = idx + 1 >= n ? 0 : (~0u << (idx + 1));
        if (conflicts[idx] & future) rec(idx + 1, chosen, excluded | bit);
      };
  rec(0, 0, 0);

  PremeasureCertificate cert;
  cert.gauge = g;
  cert.packing.delta = delta;
  PackingComponent comp;
  for (size_t i = 0; i < n; ++i)
    if (best_mask >> i & 1) {
      comp.balls.push_back(candidates[i]);
      BallWitness w;
      w.kind = BallWitness::Candidate;
      w.index = i;
      comp.witnesses.push_back(w);
      cert.chosen.push_back(i);
    }
  cert.packing.components.push_back(std::move(comp));
  cert.weight = packing_weight(cert.packing, g);
  cert.verification = verify_packing(cert.packing);
  return cert;
}

// ---------------------------------------------------------------------------
// exact 1-d optimization (weighted interval scheduling)

namespace {

struct Cand1d {
  Real left, right, weight;  // exact endpoints, guard-precision weight
  size_t index;
};

// max total weight over pairwise-compatible candidates from `active`
// (indices into cands, any order); classic right-endpoint DP
Real scheduling_dp(const std::vector<Cand1d>& cands, std::vector<size_t> active, Prec guard) {
  std::sort(active.begin(), active.end(), [&](size_t a, size_t b) {
    if (cands[a].right < cands[b].right) return true;
    if (cands[b].right < cands[a].right) return false;
    return cands[a].index < cands[b].index;
  });
  size_t m = active.size();
  std::vector<Real> dp(m + 1, Real::zero(guard));
  for (size_t k = 1; k <= m; ++k) {
    const Cand1d& c = cands[active[k - 1]];
    // predecessor: last sorted candidate with right <= c.left
    size_t lo = 0, hi = k - 1;
    while (lo < hi) {
      size_t mid = (lo + hi + 1) / 2;
      if (cands[active[mid - 1]].right <= c.left)
        lo = mid;
      else
        hi = mid - 1;
    }
    Real take = add(dp[lo], c.weight, guard, Rnd::Near);
    dp[k] = max_r(dp[k - 1], take);
  }
  return dp[m];
}

bool compatible_1d(const Cand1d& a, const Cand1d& b) {
  return a.right <= b.left || b.right <= a.left;
}

}  // namespace

PremeasureCertificate optimize_packing_1d(const std::vector<Real>& centers,
                                          const std::vector<Real>& radii_grid, const DimFunc& g,
                                          const Real& delta) {
  if (centers.empty() || radii_grid.empty())
    throw Error(ErrorCode::EMPTY_INPUT, "optimize_packing_1d needs centers and radii");
  for (size_t i = 1; i < centers.size(); ++i)
    if (centers[i] < centers[i - 1]) throw Error(ErrorCode::BAD_SPEC, "centers must be sorted");
  for (const auto& r : radii_grid) {
    if (!(r.sign() > 0)) throw Error(ErrorCode::BAD_SPEC, "radii must be positive");
    if (!(ldexp2(r, 1) < delta)) throw Error(ErrorCode::BAD_SPEC, "all 2r must be below delta");
  }
  Prec prec = g->prec;
  Prec guard = prec + 64;

  std::vector<Cand1d> cands;
  cands.reserve(centers.size() * radii_grid.size());
  std::vector<Real> wj;
  for (const auto& r : radii_grid) wj.push_back(g->eval(ldexp2(r, 1)));
  for (size_t i = 0; i < centers.size(); ++i)
    for (size_t j = 0; j < radii_grid.size(); ++j) {
      Cand1d c;
      c.left = exact_sub(centers[i], radii_grid[j]);
      c.right = exact_add(centers[i], radii_grid[j]);
      Real w(guard);
      mpfr_set(w.raw(), wj[j].raw(), MPFR_RNDN);
      c.weight = w;
      c.index = cands.size();
      cands.push_back(std::move(c));
    }

  size_t n = cands.size();
  std::vector<size_t> all(n);
  for (size_t i = 0; i < n; ++i) all[i] = i;
  Real opt = scheduling_dp(cands, all, guard);

  // lexicographic refinement: force candidates in index order whenever the
  // optimum is still attainable with them fixed
  std::vector<size_t> forced;
  Real forced_w = Real::zero(guard);
  for (size_t c = 0; c < n; ++c) {
    bool fits = true;
    for (size_t f : forced)
      if (!compatible_1d(cands[f], cands[c])) {
        fits = false;
        break;
      }
    if (!fits) continue;
    std::vector<size_t> rest;
    for (size_t o = 0; o < n; ++o) {
      if (o == c) continue;
      bool comp = compatible_1d(cands[o], cands[c]);
      for (size_t f : forced)
        if (f == o || !compatible_1d(cands[o], cands[f])) comp = false;
      if (comp) rest.push_back(o);
    }
    Real with_c = add(add(forced_w, cands[c].weight, guard, Rnd::Near),
                      scheduling_dp(cands, rest, guard), guard, Rnd::Near);
    if (with_c == opt) {
      forced.push_back(c);
      forced_w = add(forced_w, cands[c].weight, guard, Rnd::Near);
    }
  }
  if (!(forced_w == opt))
    throw Error(ErrorCode::INVARIANT_FAIL, "lexicographic refinement lost the optimum");

  PremeasureCertificate cert;
  cert.gauge = g;
  cert.packing.delta = delta;
  PackingComponent comp;
  size_t radii_n = radii_grid.size();
  for (size_t f : forced) {
    size_t ci = f / radii_n, rj = f % radii_n;
    comp.balls.push_back(Ball{{centers[ci]}, radii_grid[rj]});
    BallWitness w;
    w.kind = BallWitness::Candidate;
    w.index = f;
    comp.witnesses.push_back(w);
    cert.chosen.push_back(f);
  }
  cert.packing.components.push_back(std::move(comp));
  cert.weight = packing_weight(cert.packing, g);
  cert.verification = verify_packing(cert.packing);
  return cert;
}

// ---------------------------------------------------------------------------
// greedy

PremeasureCertificate greedy_packing(const std::vector<std::vector<Real>>& centers,
                                     const std::vector<Real>& radii_grid, const DimFunc& g,
                                     const Real& delta) {
  if (centers.empty() || radii_grid.empty())
    throw Error(ErrorCode::EMPTY_INPUT, "greedy_packing needs centers and radii");
  size_t radii_n = radii_grid.size();
  std::vector<Real> wj;
  for (const auto& r : radii_grid) {
    if (!(r.sign() > 0)) throw Error(ErrorCode::BAD_SPEC, "radii must be positive");
    if (!(ldexp2(r, 1) < delta)) throw Error(ErrorCode::BAD_SPEC, "all 2r must be below delta");
    wj.push_back(g->eval(ldexp2(r, 1)));
  }

  size_t n = centers.size() * radii_n;
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const Real& wa = wj[a % radii_n];
    const Real& wb = wj[b % radii_n];
    if (wa > wb) return true;
    if (wb > wa) return false;
    return a < b;
  });

  std::vector<size_t> admitted;
  for (size_t cand : order) {
    size_t ci = cand / radii_n, rj = cand % radii_n;
    bool ok = true;
    for (size_t a : admitted) {
      size_t ai = a / radii_n, arj = a % radii_n;
      if (!balls_disjoint(centers[ci], radii_grid[rj], centers[ai], radii_grid[arj])) {
        ok = false;
        break;
      }
    }
    if (ok) admitted.push_back(cand);
  }
  std::sort(admitted.begin(), admitted.end());

  PremeasureCertificate cert;
  cert.gauge = g;
  cert.packing.delta = delta;
  PackingComponent comp;
  for (size_t a : admitted) {
    comp.balls.push_back(Ball{centers[a / radii_n], radii_grid[a % radii_n]});
    BallWitness w;
    w.kind = BallWitness::Candidate;
    w.index = a;
    comp.witnesses.push_back(w);
    cert.chosen.push_back(a);
  }
  cert.packing.components.push_back(std::move(comp));
  cert.weight = packing_weight(cert.packing, g);
  cert.verification = verify_packing(cert.packing);
  return cert;
}

// ---------------------------------------------------------------------------
// divergence

DivergenceResult divergence_certificate(const ModelPtr& model, const DimFunc& g, const Real& M,
                                        const Real& delta) {
  if (!model) throw Error(ErrorCode::BAD_SPEC, "missing model");
  if (!(delta.sign() > 0)) throw Error(ErrorCode::BAD_SPEC, "delta must be positive");
  const DimFunc& h = model->gauge();
  DivergenceResult res;
  res.best_weight = Real::zero(g->prec);

  {
    auto grid = clip_grid(dyadic_grid(std::min(4 * model->depth() + 16, 256), g->prec), {g, h});
    if (grid.size() >= 2) res.order_evidence = compare_order(g, h, grid);
  }

  int d = model->d();
  int N = model->depth();
  for (int m = 1; m + 1 <= N; ++m) {
    if (static_cast<long>(d) * (m - 1) > 62) break;
    const Real& r = model->scale(m + 1);
    Real diam = ldexp2(r, 1);
    if (!(diam < delta)) continue;
    if (!g->in_domain(diam)) continue;
    std::uint64_t cnt = std::uint64_t{1} << (d * (m - 1));
    LevelWeight lw;
    lw.m = m;
    lw.count = cnt;
    lw.weight_formula = ldexp2(g->eval(diam), d * (m - 1));
    res.trace.push_back(lw);
    if (lw.weight_formula > res.best_weight) {
      res.best_weight = lw.weight_formula;
      res.best_level = m;
    }
    if (lw.weight_formula > M) {
      Packing p;
      p.model = model;
      p.delta = delta;
      PackingComponent c;
      c.is_block = true;
      c.block = CornerBlock{{}, m - 1, r, false};
      p.components.push_back(std::move(c));
      Real w = packing_weight(p, g);
      if (!(w > M)) continue;  // formula passed by rounding only
      auto v = verify_packing(p);
      if (!v.ok())
        throw Error(ErrorCode::NOT_DISJOINT, "divergence packing failed verification at m = " +
                                                 std::to_string(m));
      PremeasureCertificate cert;
      cert.packing = std::move(p);
      cert.gauge = g;
      cert.weight = w;
      cert.verification = v;
      res.certificate = std::move(cert);
      res.found = true;
      res.level = m;
      break;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// nested recursive extraction

NestedPackingResult extract_nested_packing(const ModelPtr& model, const DimFunc& g, int stages) {
  if (!model) throw Error(ErrorCode::BAD_SPEC, "missing model");
  if (stages < 1) throw Error(ErrorCode::BAD_SPEC, "need at least one stage");
  Real one = Real::one(g->prec);
  if (!g->in_domain(one)) throw Error(ErrorCode::BAD_SPEC, "gauge must be evaluable at 1");
  Real g1 = g->eval(one);
  Real two_g1 = ldexp2(g1, 1);

  NestedPackingResult res;
  res.threshold = mul(Real::of_long(stages + 1, g->prec), g1, g->prec, Rnd::Near);
  res.merged.model = model;
  res.merged.delta = Real::one(g->prec);

  int d = model->d();
  int N = model->depth();
  Interval sqrt_d = d == 1 ? Interval(Real::one(g->prec))
                           : Interval{sqrt_r(Real::of_long(d, g->prec + 32), g->prec + 32, Rnd::Down),
                                      sqrt_r(Real::of_long(d, g->prec + 32), g->prec + 32, Rnd::Up)};

  CubeAddress region;
  for (int stage = 1; stage <= stages; ++stage) {
    int l0 = static_cast<int>(region.size());
    if (l0 + 1 > N - 1) {
      res.fail_code = ErrorCode::DEPTH_EXCEEDED;
      res.fail_detail = "region at level " + std::to_string(l0) + " leaves no room in depth " +
                        std::to_string(N);
      return res;
    }
    int found_L = -1;
    Real stage_w;
    for (int L = l0; L + 1 <= N; ++L) {
      if (d * (L - l0) > kStageBallBudgetBits) break;
      Real diam = ldexp2(model->scale(L + 1), 1);
      if (!g->in_domain(diam)) continue;
      Real wf = ldexp2(g->eval(diam), d * (L - l0));
      if (wf > two_g1) {
        Packing probe;
        probe.model = model;
        probe.delta = Real::one(g->prec);
        PackingComponent pc;
        pc.is_block = true;
        pc.block = CornerBlock{region, L, model->scale(L + 1), false};
        probe.components.push_back(std::move(pc));
        Real w = packing_weight(probe, g);
        if (w > two_g1) {
          found_L = L;
          stage_w = w;
          break;
        }
      }
    }
    if (found_L < 0) {
      res.fail_code = ErrorCode::STAGE_FAIL;
      res.fail_detail = "no stage packing reaches 2 g(1) from level " + std::to_string(l0);
      return res;
    }

    StageInfo info;
    info.stage = stage;
    info.region = region;
    info.cube_level = found_L;
    info.count = std::uint64_t{1} << (d * (found_L - l0));
    info.radius = model->scale(found_L + 1);
    info.stage_weight = stage_w;
    res.stages.push_back(info);

    PackingComponent pc;
    pc.is_block = true;
    pc.block = CornerBlock{region, found_L, model->scale(found_L + 1), stage < stages};
    pc.stage = stage;
    res.merged.components.push_back(std::move(pc));

    if (stage < stages) {
      // the recursion region: a full basic cube strictly inside the last
      // ball, anchored at that ball's center
      int lp = found_L + 1;
      while (lp <= N) {
        Real diag_up = mul(sqrt_d.hi, model->scale(lp), g->prec + 32, Rnd::Up);
        if (diag_up < model->scale(found_L + 1)) break;
        ++lp;
      }
      if (lp > N) {
        res.fail_code = ErrorCode::DEPTH_EXCEEDED;
        res.fail_detail = "no cube fits inside the last ball within depth";
        return res;
      }
      std::uint32_t all_ones = (1u << d) - 1;
      for (int k = l0; k < found_L; ++k) region.push_back(all_ones);
      for (int k = found_L; k < lp; ++k) region.push_back(0);
    }
  }

  res.total_weight = packing_weight(res.merged, g);
  res.verification = verify_packing(res.merged);
  res.success = res.verification.ok() && res.total_weight > res.threshold;
  if (!res.success && res.fail_detail.empty()) {
    res.fail_code = ErrorCode::STAGE_FAIL;
    res.fail_detail = "merged packing misses the (s+1) g(1) threshold";
  }
  return res;
}

}  // namespace packlab
