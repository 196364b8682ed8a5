#pragma once

// Finite-depth corner Cantor sets: scale solving h(a_n) = 2^{-dn},
// addressable cubes, rigorous enclosures of the uniform measure on
// open balls, density sandwich reports and the vertex-ball covers.
//
// Geometry is exact: scales carry at most `prec` significand bits, and
// corner sums / squared distances are computed at a precision wide
// enough that no rounding occurs, so cube/ball classifications are
// decided exactly.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "packlab/dimfunc.hpp"
#include "packlab/real.hpp"
#include "packlab/rng.hpp"

namespace packlab {

struct ScaleSequence {
  int d = 1;
  int N = 0;
  std::vector<Real> a;   // a[0] = 1 down to a[N], strictly decreasing
  Real tolerance;        // relative bisection stopping width
  Real max_h_error;      // certified sup_n |h(a_n) - 2^{-dn}|, as an upper bound
  bool separation_ok = false;  // 2 a_{n+1} < a_n for all n
  bool smallness_ok = false;   // 2^n a_n < 1 for all n >= 1
};

struct ScaleOptions {
  Real rel_tolerance;   // default 2^-(prec-28)
  long max_iterations = 0;  // 0 = automatic
  std::string cache_dir;    // empty = no cache
};

ScaleSequence solve_scales(const DimFunc& h, int d, int N, const ScaleOptions& opts = {});

// cache round trip (keyed by h spec hash, d, N, tolerance)
std::string scale_cache_key(const DimFunc& h, int d, int N, const Real& tol);
std::optional<ScaleSequence> load_cached_scales(const std::string& dir, const std::string& key,
                                                Prec prec);
void store_cached_scales(const std::string& dir, const std::string& key, const ScaleSequence& s);

// Cube addresses: one selector per level, each selector a d-bit corner
// choice (bit i set = offset in coordinate i).
using CubeAddress = std::vector<std::uint32_t>;

struct MassEnclosure {
  Real lo, hi;
  int resolution_level = 0;
  std::uint64_t straddle_count = 0;  // level-L cubes neither inside nor outside
};

struct DensitySample {
  CubeAddress address;     // depth-N address of the center x
  Real radius;
};

struct DensityRow {
  std::vector<Real> x;
  Real r;
  int n = 0;                  // selected level
  MassEnclosure mu;
  Real lower_bound;           // h(a_n)
  Real upper_bound;           // 2^{d+1} h(a_n)
  bool lower_ok = false;      // h(a_n) <= mu.lo  (certified direction)
  bool upper_ok = false;      // mu.hi <= 2^{d+1} h(a_n)
  bool scale_lower_ok = false;  // a_n <= 2r
  bool scale_upper_ok = false;  // r <= sqrt(d) a_{n-1}
  bool scale_upper_strict = false;
  bool pass() const { return lower_ok && upper_ok && scale_lower_ok && scale_upper_ok; }
};

struct DensityReport {
  std::vector<DensityRow> rows;
  Real density_constant;   // Lemma-style C: max(mu_hi/h(r), h(r)/mu_lo) over samples
  bool all_pass = false;
};

struct CoverReport {
  int k = 0;
  int n_max = 0;
  Real exact_sum;        // sum of mu upper enclosures over de-duplicated vertices
  Real paper_sum;        // sum over (n, v) of 2^{d+1} h(a_{2n+k})
  Real claimed_bound;    // 2^{2d+1}/(2^d - 1) * 2^{-dk}
  std::vector<std::uint64_t> vertex_counts;  // |V_n| for n <= n_max
};

class CantorModel {
 public:
  CantorModel(DimFunc h, ScaleSequence scales);

  int d() const { return scales_.d; }
  int depth() const { return scales_.N; }
  const DimFunc& gauge() const { return h_; }
  const ScaleSequence& scales() const { return scales_; }
  const Real& scale(int n) const { return scales_.a.at(n); }
  Prec corner_prec() const { return corner_prec_; }

  // exact level-n cube mass 2^{-dn}
  Real cube_mass(int n) const;
  std::uint64_t level_count(int n) const;  // 2^{dn}, guarded
  // w_k = a_{k-1} - a_k at corner precision (exact), k = 1..N
  const Real& corner_width(int k) const { return widths_.at(k); }

  // lower-left corner of the cube addressed by `address`
  std::vector<Real> cube_corner(const CubeAddress& address) const;
  // lower-left corner of the i-th level-n cube in lexicographic order
  CubeAddress address_of_index(std::uint64_t index, int n) const;

  // rigorous enclosure of mu(B_r(x)) by exact cube counting at level L
  MassEnclosure mu_ball(const std::vector<Real>& x, const Real& r, int L) const;

  // true iff some level-n cube lies strictly inside the open ball
  bool level_cube_inside_ball(const std::vector<Real>& x, const Real& r, int n) const;

  DensityReport density_report(const std::vector<DensitySample>& samples,
                               int threads = 1) const;

  CoverReport gdelta_cover(int k, int n_max) const;

  // de-duplicated vertex set of all level-n cubes
  std::vector<std::vector<Real>> vertex_set(int n) const;

  DensitySample random_sample(Rng& rng) const;

 private:
  struct CubeClass;
  CubeClass classify(const std::vector<Real>& corner, int level, const std::vector<Real>& x,
                     const Real& r_sq) const;

  DimFunc h_;
  ScaleSequence scales_;
  Prec corner_prec_;   // wide enough that corner sums are exact
  Prec sq_prec_;       // wide enough that squared distances are exact
  std::vector<Real> widths_;  // w_k = a_{k-1} - a_k at corner precision
};

CantorModel build_model(const DimFunc& h, int d, int N, const ScaleOptions& opts = {});

}  // namespace packlab
