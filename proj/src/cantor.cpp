#include "packlab/cantor.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "packlab/error.hpp"

namespace packlab {

namespace {

Real target_mass(int d, int n, Prec prec) { return Real::pow2(-static_cast<long>(d) * n, prec); }

std::uint64_t pow2_u64(int e) {
  if (e < 0 || e > 62) throw Error(ErrorCode::DEPTH_EXCEEDED, "cube count exceeds 2^62");
  return std::uint64_t{1} << e;
}

}  // namespace

// ---------------------------------------------------------------------------
// scale solving

ScaleSequence solve_scales(const DimFunc& h, int d, int N, const ScaleOptions& opts) {
  if (!h) throw Error(ErrorCode::BAD_SPEC, "missing gauge");
  if (d < 1 || d > 16) throw Error(ErrorCode::BAD_SPEC, "dimension must be in 1..16");
  if (N < 1) throw Error(ErrorCode::BAD_SPEC, "depth must be >= 1");
  Prec prec = h->prec;
  Real tol = opts.rel_tolerance.is_nan() || opts.rel_tolerance.is_zero()
                 ? Real::pow2(-(prec - 28), prec)
                 : opts.rel_tolerance;

  if (!opts.cache_dir.empty()) {
    auto cached = load_cached_scales(opts.cache_dir, scale_cache_key(h, d, N, tol), prec);
    if (cached) return *cached;
  }

  // strict increase on a dyadic grid; piecewise-max gauges plateau and are
  // rejected here
  {
    int jmax = std::max(2 * d * N + 16, 64);
    auto grid = clip_grid(dyadic_grid(jmax, prec), {h});
    if (grid.size() < 2) throw Error(ErrorCode::NO_ROOT, "gauge domain misses the dyadic grid");
    for (size_t i = 1; i < grid.size(); ++i)
      if (!(h->eval(grid[i]) < h->eval(grid[i - 1])))
        throw Error(ErrorCode::NON_INCREASING,
                    "gauge not strictly increasing near t = " + grid[i].dec(8));
  }

  ScaleSequence seq;
  seq.d = d;
  seq.N = N;
  seq.tolerance = tol;
  seq.max_h_error = Real::zero(prec);
  seq.a.reserve(N + 1);
  seq.a.push_back(Real::one(prec));

  // upper end of the first bracket: 1 when evaluable, else the domain top
  Real top = Real::one(prec);
  if (!h->in_domain(top)) {
    top = h->domain.hi;
    if (!h->in_domain(top)) throw Error(ErrorCode::NO_ROOT, "gauge domain has no usable top");
  }

  Prec bis_prec = prec + 64;
  long max_iter = opts.max_iterations > 0 ? opts.max_iterations : 4 * (prec + 64);

  for (int n = 1; n <= N; ++n) {
    Real target = target_mass(d, n, prec);
    Real hi = n == 1 ? top : seq.a[n - 1];
    {
      Interval at_top = h->eval_interval(hi);
      if (at_top.hi < target)
        throw Error(ErrorCode::NO_ROOT,
                    "h misses 2^{-dn} at n = " + std::to_string(n) + " (range too low)");
    }
    Real lo = Real::zero(bis_prec);
    Real root(prec);
    bool found = false;
    for (long it = 0; it < max_iter; ++it) {
      Real mid = ldexp2(add(lo, hi, bis_prec), -1);
      Interval v = h->eval_interval(mid);
      if (v.lo > target) {
        hi = mid;
      } else if (v.hi < target) {
        lo = mid;
      } else {
        // enclosure hits the target: accept mid (exact for closed forms)
        Real r(prec);
        mpfr_set(r.raw(), mid.raw(), MPFR_RNDN);
        root = r;
        found = true;
        break;
      }
      // stop on relative bracket width
      if (lo.sign() > 0) {
        Real width = sub(hi, lo, bis_prec, Rnd::Up);
        if (width <= mul(lo, tol, bis_prec, Rnd::Down)) {
          Real r(prec);
          mpfr_set(r.raw(), mid.raw(), MPFR_RNDN);
          root = r;
          found = true;
          break;
        }
      }
    }
    if (!found) throw Error(ErrorCode::NO_ROOT, "bisection failed to converge at n = " + std::to_string(n));
    Interval at_root = h->eval_interval(root);
    Real err = max_r(abs_r(sub(at_root.hi, target, prec, Rnd::Up)),
                     abs_r(sub(target, at_root.lo, prec, Rnd::Up)));
    if (err > seq.max_h_error) seq.max_h_error = err;
    seq.a.push_back(root);
  }

  seq.separation_ok = true;
  for (int n = 0; n < N; ++n)
    if (!(ldexp2(seq.a[n + 1], 1) < seq.a[n])) {
      seq.separation_ok = false;
      throw Error(ErrorCode::SEPARATION_FAIL,
                  "2 a_{n+1} >= a_n at n = " + std::to_string(n) + " (a_n = " + seq.a[n].dec(10) + ")");
    }
  seq.smallness_ok = true;
  for (int n = 1; n <= N; ++n)
    if (!(ldexp2(seq.a[n], n) < Real::one(prec))) {
      seq.smallness_ok = false;
      throw Error(ErrorCode::INVARIANT_FAIL, "2^n a_n >= 1 at n = " + std::to_string(n));
    }

  if (!opts.cache_dir.empty())
    store_cached_scales(opts.cache_dir, scale_cache_key(h, d, N, tol), seq);
  return seq;
}

std::string scale_cache_key(const DimFunc& h, int d, int N, const Real& tol) {
  std::string s = h->describe() + "|d=" + std::to_string(d) + "|N=" + std::to_string(N) +
                  "|tol=" + tol.hex();
  return to_hex_u64(fnv1a64(s));
}

std::optional<ScaleSequence> load_cached_scales(const std::string& dir, const std::string& key,
                                                Prec prec) {
  std::filesystem::path p = std::filesystem::path(dir) / ("scales-" + key + ".kv");
  if (!std::filesystem::exists(p)) return std::nullopt;
  try {
    Config c = Config::parse_file(p.string());
    ScaleSequence s;
    s.d = static_cast<int>(c.get_int("d"));
    s.N = static_cast<int>(c.get_int("N"));
    s.tolerance = Real::parse(c.get_str("tolerance"), prec);
    s.max_h_error = Real::parse(c.get_str("max_h_error"), prec);
    s.separation_ok = c.get_bool("separation_ok", false);
    s.smallness_ok = c.get_bool("smallness_ok", false);
    for (int n = 0; n <= s.N; ++n) s.a.push_back(Real::parse(c.get_str("a." + std::to_string(n)), prec));
    // sanity: the cached sequence must still satisfy the exact invariants
    for (int n = 0; n < s.N; ++n)
      if (!(ldexp2(s.a[n + 1], 1) < s.a[n])) return std::nullopt;
    if (!(s.a[0] == Real::one(prec))) return std::nullopt;
    return s;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void store_cached_scales(const std::string& dir, const std::string& key, const ScaleSequence& s) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::filesystem::path p = std::filesystem::path(dir) / ("scales-" + key + ".kv");
  std::ofstream out(p);
  if (!out) return;  // cache is best effort
  out << "d = " << s.d << "\nN = " << s.N << "\ntolerance = " << s.tolerance.hex()
      << "\nmax_h_error = " << s.max_h_error.hex()
      << "\nseparation_ok = " << (s.separation_ok ? "true" : "false")
      << "\nsmallness_ok = " << (s.smallness_ok ? "true" : "false") << "\n";
  for (size_t n = 0; n < s.a.size(); ++n) out << "a." << n << " = " << s.a[n].hex() << "\n";
}

// ---------------------------------------------------------------------------
// model

CantorModel::CantorModel(DimFunc h, ScaleSequence scales) : h_(std::move(h)), scales_(std::move(scales)) {
  Prec prec = h_->prec;
  long span = -scales_.a.back().exponent();
  if (span < 0) span = 0;
  corner_prec_ = prec + span + scales_.d + 16;
  sq_prec_ = 2 * corner_prec_ + 8;
  widths_.reserve(scales_.N + 1);
  widths_.push_back(Real::zero(corner_prec_));  // unused slot 0
  for (int k = 1; k <= scales_.N; ++k)
    widths_.push_back(sub(scales_.a[k - 1], scales_.a[k], corner_prec_, Rnd::Near));  // exact
}

Real CantorModel::cube_mass(int n) const {
  if (n < 0 || n > scales_.N) throw Error(ErrorCode::BAD_ADDRESS, "level out of range");
  return Real::pow2(-static_cast<long>(scales_.d) * n, std::max<Prec>(h_->prec, 64));
}

std::uint64_t CantorModel::level_count(int n) const { return pow2_u64(scales_.d * n); }

std::vector<Real> CantorModel::cube_corner(const CubeAddress& address) const {
  if (static_cast<int>(address.size()) > scales_.N)
    throw Error(ErrorCode::BAD_ADDRESS, "address deeper than the model");
  int d = scales_.d;
  std::uint32_t mask = (d >= 32) ? ~0u : ((1u << d) - 1);
  std::vector<Real> corner(d, Real::zero(corner_prec_));
  for (size_t k = 0; k < address.size(); ++k) {
    if (address[k] & ~mask) throw Error(ErrorCode::BAD_ADDRESS, "selector out of range");
    for (int i = 0; i < d; ++i)
      if (address[k] >> i & 1)
        corner[i] = add(corner[i], widths_[k + 1], corner_prec_, Rnd::Near);  // exact
  }
  return corner;
}

CubeAddress CantorModel::address_of_index(std::uint64_t index, int n) const {
  if (n < 0 || n > scales_.N) throw Error(ErrorCode::BAD_ADDRESS, "level out of range");
  std::uint64_t total = level_count(n);
  if (index >= total) throw Error(ErrorCode::BAD_ADDRESS, "cube index out of range");
  CubeAddress addr(n);
  int d = scales_.d;
  std::uint64_t mask = (std::uint64_t{1} << d) - 1;
  for (int k = 0; k < n; ++k)
    addr[k] = static_cast<std::uint32_t>((index >> (d * (n - 1 - k))) & mask);
  return addr;
}

struct CantorModel::CubeClass {
  bool inside = false;
  bool outside = false;
};

CantorModel::CubeClass CantorModel::classify(const std::vector<Real>& corner, int level,
                                             const std::vector<Real>& x, const Real& r_sq) const {
  int d = scales_.d;
  const Real& side = scales_.a[level];
  Real min_sq = Real::zero(sq_prec_);
  Real max_sq = Real::zero(sq_prec_);
  for (int i = 0; i < d; ++i) {
    Real lo_gap = sub(corner[i], x[i], corner_prec_, Rnd::Near);              // corner - x
    Real hi_edge = add(corner[i], side, corner_prec_, Rnd::Near);             // exact
    Real hi_gap = sub(x[i], hi_edge, corner_prec_, Rnd::Near);                // x - (corner+side)
    Real near_gap = Real::zero(corner_prec_);
    if (lo_gap.sign() > 0)
      near_gap = lo_gap;
    else if (hi_gap.sign() > 0)
      near_gap = hi_gap;
    Real far_gap = max_r(abs_r(lo_gap), abs_r(sub(x[i], hi_edge, corner_prec_, Rnd::Near)));
    min_sq = add(min_sq, mul(near_gap, near_gap, sq_prec_, Rnd::Near), sq_prec_, Rnd::Near);
    max_sq = add(max_sq, mul(far_gap, far_gap, sq_prec_, Rnd::Near), sq_prec_, Rnd::Near);
  }
  CubeClass c;
  c.inside = max_sq < r_sq;    // all cube points strictly inside the open ball
  c.outside = min_sq >= r_sq;  // closed cube misses the open ball
  return c;
}

MassEnclosure CantorModel::mu_ball(const std::vector<Real>& x, const Real& r, int L) const {
  if (L < 0 || L > scales_.N) throw Error(ErrorCode::BAD_ADDRESS, "resolution level out of range");
  if (!(r.sign() > 0)) throw Error(ErrorCode::BAD_SPEC, "radius must be positive");
  if (static_cast<int>(x.size()) != scales_.d) throw Error(ErrorCode::BAD_ADDRESS, "point dimension mismatch");
  if (scales_.d * L > 62) throw Error(ErrorCode::DEPTH_EXCEEDED, "resolution too deep for exact counting");

  Prec rsq_prec = std::max<Prec>(sq_prec_, 2 * r.prec() + 8);
  Real r_sq = mul(r, r, rsq_prec, Rnd::Near);  // exact

  std::uint64_t inside_units = 0, straddle_units = 0;
  int d = scales_.d;
  std::uint32_t selectors = 1u << d;

  // depth-first over the cube tree; prune subtrees once classified
  std::function<void(const std::vector<Real>&, int)> rec = [&](const std::vector<Real>& corner,
                                                               int level) {
    CubeClass c = classify(corner, level, x, r_sq);
    if (c.outside) return;
    if (c.inside) {
      inside_units += pow2_u64(d * (L - level));
      return;
    }
    if (level == L) {
      straddle_units += 1;
      return;
    }
    std::vector<Real> child(corner);
    for (std::uint32_t sel = 0; sel < selectors; ++sel) {
      for (int i = 0; i < d; ++i)
        child[i] = (sel >> i & 1) ? add(corner[i], widths_[level + 1], corner_prec_, Rnd::Near)
                                  : corner[i];
      rec(child, level + 1);
    }
  };
  rec(std::vector<Real>(d, Real::zero(corner_prec_)), 0);

  MassEnclosure m;
  m.resolution_level = L;
  m.straddle_count = straddle_units;
  Prec mp = std::max<Prec>(h_->prec, 64);
  m.lo = ldexp2(Real::of_ulong(inside_units, mp), -static_cast<long>(d) * L);
  m.hi = ldexp2(Real::of_ulong(inside_units + straddle_units, mp), -static_cast<long>(d) * L);
  return m;
}

bool CantorModel::level_cube_inside_ball(const std::vector<Real>& x, const Real& r, int n) const {
  Prec rsq_prec = std::max<Prec>(sq_prec_, 2 * r.prec() + 8);
  Real r_sq = mul(r, r, rsq_prec, Rnd::Near);
  int d = scales_.d;
  std::uint32_t selectors = 1u << d;
  std::function<bool(const std::vector<Real>&, int)> rec = [&](const std::vector<Real>& corner,
                                                               int level) -> bool {
    CubeClass c = classify(corner, level, x, r_sq);
    if (c.outside) return false;
    if (c.inside) return true;  // a full cube at level <= n certifies descendants
    if (level == n) return false;
    std::vector<Real> child(corner);
    for (std::uint32_t sel = 0; sel < selectors; ++sel) {
      for (int i = 0; i < d; ++i)
        child[i] = (sel >> i & 1) ? add(corner[i], widths_[level + 1], corner_prec_, Rnd::Near)
                                  : corner[i];
      if (rec(child, level + 1)) return true;
    }
    return false;
  };
  return rec(std::vector<Real>(d, Real::zero(corner_prec_)), 0);
}

DensityReport CantorModel::density_report(const std::vector<DensitySample>& samples,
                                          int threads) const {
  DensityReport rep;
  rep.rows.resize(samples.size());
  Prec prec = h_->prec;
  int d = scales_.d;
  int N = scales_.N;

  Interval sqrt_d = d == 1 ? Interval(Real::one(sq_prec_))
                           : Interval{sqrt_r(Real::of_long(d, sq_prec_), sq_prec_, Rnd::Down),
                                      sqrt_r(Real::of_long(d, sq_prec_), sq_prec_, Rnd::Up)};

  auto work = [&](size_t idx) {
    const DensitySample& s = samples[idx];
    if (static_cast<int>(s.address.size()) != N)
      throw Error(ErrorCode::BAD_ADDRESS, "sample centers must be depth-N addresses");
    if (!(s.radius < Real::one(prec)) || !(s.radius.sign() > 0))
      throw Error(ErrorCode::BAD_SPEC, "sample radius must lie in (0,1)");
    DensityRow row;
    row.x = cube_corner(s.address);
    row.r = s.radius;

    // smallest level whose cubes start fitting strictly inside the ball;
    // monotone in n, and by minimality no level-(n-1) cube fits
    int n_sel = -1;
    for (int n = 1; n <= N - 2; ++n) {
      if (level_cube_inside_ball(row.x, row.r, n)) {
        n_sel = n;
        break;
      }
    }
    if (n_sel < 0)
      throw Error(ErrorCode::LEVEL_UNRESOLVED,
                  "no level <= N-2 fits inside the ball (sample " + std::to_string(idx) + ")");
    row.n = n_sel;

    int L = std::min(N, n_sel + 8);
    row.mu = mu_ball(row.x, row.r, L);

    Interval h_at = h_->eval_interval(scales_.a[n_sel]);
    row.lower_bound = h_->eval(scales_.a[n_sel]);
    row.upper_bound = ldexp2(row.lower_bound, d + 1);
    row.lower_ok = h_at.hi <= row.mu.lo;
    row.upper_ok = row.mu.hi <= ldexp2(h_at.lo, d + 1);
    row.scale_lower_ok = scales_.a[n_sel] <= ldexp2(row.r, 1);
    Real ub_lo = mul(sqrt_d.lo, scales_.a[n_sel - 1], sq_prec_, Rnd::Down);
    row.scale_upper_ok = row.r <= ub_lo;
    row.scale_upper_strict = row.r < ub_lo;
    rep.rows[idx] = std::move(row);
  };

  if (threads <= 1 || samples.size() < 2) {
    for (size_t i = 0; i < samples.size(); ++i) work(i);
  } else {
    size_t nthreads = std::min<size_t>(threads, samples.size());
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nthreads);
    for (size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&, t]() {
        try {
          for (size_t i = t; i < samples.size(); i += nthreads) work(i);
        } catch (...) {
          errs[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }

  rep.all_pass = true;
  rep.density_constant = Real::zero(prec);
  for (const auto& row : rep.rows) {
    if (!row.pass()) rep.all_pass = false;
    if (row.mu.lo.sign() > 0) {
      Real hr = h_->eval(row.r);
      Real c = max_r(div(row.mu.hi, hr, prec), div(hr, row.mu.lo, prec));
      if (c > rep.density_constant) rep.density_constant = c;
    }
  }
  return rep;
}

std::vector<std::vector<Real>> CantorModel::vertex_set(int n) const {
  if (n < 0 || n > scales_.N) throw Error(ErrorCode::BAD_ADDRESS, "level out of range");
  int d = scales_.d;
  if (d * n + d > 24) throw Error(ErrorCode::DEPTH_EXCEEDED, "vertex set too large to enumerate");
  std::uint64_t cubes = level_count(n);
  std::vector<std::vector<Real>> verts;
  verts.reserve(cubes << d);
  for (std::uint64_t i = 0; i < cubes; ++i) {
    auto corner = cube_corner(address_of_index(i, n));
    for (std::uint32_t sel = 0; sel < (1u << d); ++sel) {
      std::vector<Real> v(corner);
      for (int c = 0; c < d; ++c)
        if (sel >> c & 1) v[c] = add(v[c], scales_.a[n], corner_prec_, Rnd::Near);
      verts.push_back(std::move(v));
    }
  }
  auto less = [](const std::vector<Real>& a, const std::vector<Real>& b) {
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] < b[i]) return true;
      if (b[i] < a[i]) return false;
    }
    return false;
  };
  std::sort(verts.begin(), verts.end(), less);
  verts.erase(std::unique(verts.begin(), verts.end(),
                          [](const auto& a, const auto& b) {
                            for (size_t i = 0; i < a.size(); ++i)
                              if (a[i] != b[i]) return false;
                            return true;
                          }),
              verts.end());
  return verts;
}

CoverReport CantorModel::gdelta_cover(int k, int n_max) const {
  if (k < 0 || n_max < 0) throw Error(ErrorCode::BAD_SPEC, "negative cover parameters");
  if (2 * n_max + k > scales_.N)
    throw Error(ErrorCode::DEPTH_EXCEEDED, "2 n_max + k exceeds the model depth");
  CoverReport rep;
  rep.k = k;
  rep.n_max = n_max;
  Prec prec = h_->prec;
  Prec sum_prec = corner_prec_ + 32;
  Real exact = Real::zero(sum_prec);
  Real paper = Real::zero(sum_prec);
  int d = scales_.d;
  for (int n = 0; n <= n_max; ++n) {
    auto verts = vertex_set(n);
    rep.vertex_counts.push_back(verts.size());
    const Real& radius = scales_.a[2 * n + k];
    int L = std::min(scales_.N, 2 * n + k + 8);
    Real h_r = h_->eval(radius);
    Real per_ball_bound = ldexp2(h_r, d + 1);
    for (const auto& v : verts) {
      MassEnclosure m = mu_ball(v, radius, L);
      exact = add(exact, m.hi, sum_prec, Rnd::Near);
      paper = add(paper, per_ball_bound, sum_prec, Rnd::Near);
    }
  }
  rep.exact_sum = exact;
  rep.paper_sum = paper;
  // 2^{2d+1}/(2^d - 1) * 2^{-dk}
  Real denom = sub(Real::pow2(d, prec), Real::one(prec), prec, Rnd::Near);
  rep.claimed_bound = div(Real::pow2(2 * d + 1 - d * k, prec), denom, prec, Rnd::Near);
  return rep;
}

DensitySample CantorModel::random_sample(Rng& rng) const {
  int d = scales_.d;
  int N = scales_.N;
  if (N < 3) throw Error(ErrorCode::DEPTH_EXCEEDED, "model too shallow to sample");
  DensitySample s;
  s.address.resize(N);
  std::uint64_t mask = (std::uint64_t{1} << d) - 1;
  for (int k = 0; k < N; ++k) s.address[k] = static_cast<std::uint32_t>(rng.bits() & mask);
  // log-uniform radius over (sqrt(d) a_{N-2}, 1): with a = m 2^e, m < 1,
  // sqrt(d) a_{N-2} < 2^{e+1} <= 2^{-E}, so exponents in (0, E] are safe
  long E = -(scales_.a[N - 2].exponent() + 2);
  if (E < 1) E = 1;
  Prec prec = h_->prec;
  Real frac = rng.real01(prec);
  if (frac.is_zero()) frac = Real::parse("0.5", prec);
  Real u = mul(frac, Real::of_long(E, prec), prec, Rnd::Near);
  s.radius = exp2_r(neg(u), prec, Rnd::Near);
  return s;
}

CantorModel build_model(const DimFunc& h, int d, int N, const ScaleOptions& opts) {
  return CantorModel(h, solve_scales(h, d, N, opts));
}

}  // namespace packlab
