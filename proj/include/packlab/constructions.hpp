#pragma once

// The gauge constructions behind the premeasure theorems: the flattened
// max-gauge f built from a delta sequence with certified premeasure
// bounds, the amplified exp-gauge g built from a diverging diameter
// stream, and the exp-interpolated gauge from a scale sequence. Each
// constructor verifies its defining inequality chain before returning.

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "packlab/dimfunc.hpp"
#include "packlab/packing.hpp"
#include "packlab/rng.hpp"

namespace packlab {

// --- delta sequences (flattened gauge) -------------------------------------

struct DeltaSequence {
  std::vector<Real> values;             // delta_0 > delta_1 > ... > 0
  std::uint64_t instance_points = 1;    // finite instance size k; bound k h(delta_n)
  std::vector<Real> premeasure_bounds;  // optional caller-certified bounds per n
};

struct SequenceValidation {
  bool ok = false;
  long first_fail = -1;
  std::string reason;
};

// checks decrease, bound_n <= 2^{-2n} and 2 h(delta_{n+1}) < h(delta_n)
SequenceValidation validate_delta_sequence(const DimFunc& h, const DeltaSequence& seq);

// smallest dyadic deltas delta_n = 2^{-j_n} satisfying both chains for a
// k-point instance
DeltaSequence solve_delta_sequence(const DimFunc& h, std::uint64_t k_points, int count);

// piecewise-max gauge; verifies f(delta_n) = 2^n h(delta_n), continuity,
// monotonicity and the per-piece ratio h/f <= 2^{-n}
DimFunc construct_f(const DimFunc& h, const DeltaSequence& deltas);

// finite point sets used as premeasure instances
struct FiniteInstance {
  std::vector<std::vector<Real>> points;
};

// a random disjoint packing centered at instance points, diameters < delta0
Packing random_instance_packing(const FiniteInstance& inst, const Real& delta0, Rng& rng);

// --- diameter streams (amplified gauge) ------------------------------------

class DiameterStream {
 public:
  virtual ~DiameterStream() = default;
  virtual std::string name() const = 0;
  // 1-based, nonincreasing
  virtual Real diameter(std::uint64_t i, Prec prec) const = 0;
  // certified enclosure of sum_{i<=n} h(|B_i|), for streams with a closed
  // form; n may exceed any enumeration budget
  virtual bool has_sum_oracle(const DimFunc& h) const {
    (void)h;
    return false;
  }
  virtual Interval partial_sum_bounds(const DimFunc& h, const mpz_class& n, Prec prec) const;
  virtual Real diameter_at(const mpz_class& i, Prec prec) const;  // big-index variant
};

class HarmonicStream : public DiameterStream {
 public:
  std::string name() const override { return "harmonic"; }
  Real diameter(std::uint64_t i, Prec prec) const override;
  bool has_sum_oracle(const DimFunc& h) const override;
  Interval partial_sum_bounds(const DimFunc& h, const mpz_class& n, Prec prec) const override;
  Real diameter_at(const mpz_class& i, Prec prec) const override;
};

class ListStream : public DiameterStream {
 public:
  explicit ListStream(std::vector<Real> diameters);
  std::string name() const override { return "list"; }
  Real diameter(std::uint64_t i, Prec prec) const override;

 private:
  std::vector<Real> diameters_;
};

class InversePowerStream : public DiameterStream {
 public:
  explicit InversePowerStream(Rational p) : p_(p) {}
  std::string name() const override;
  Real diameter(std::uint64_t i, Prec prec) const override;

 private:
  Rational p_;
};

struct TStage {
  mpz_class N;          // minimal prefix with certified sum > 4^j
  Real t;               // t_j, strictly below the minimum prefix diameter
  Real min_diameter;    // |B_{N_j}|
  Real sum_lower;       // certified lower bound on sum_{i<=N_j} h(|B_i|)
  Real chain_lower;     // 2^{-j} sum_lower, a lower bound on the g-sum
  bool scanned = false; // true when found by literal summation
};

struct TSequence {
  std::vector<TStage> stages;  // stage j at index j-1
  std::string stream_name;
};

// scans (or consults the stream's certified oracle) for N_j, builds the
// exp-gauge on breakpoints {t_0, t_1, ..., t_J} with a bridging top piece
// t_0 = min(2 t_1, (1+t_1)/2), and certifies sum_{i<=N_j} g(|B_i|) > 2^j
std::pair<TSequence, DimFunc> construct_g(const DimFunc& h, const DiameterStream& stream, int J,
                                          std::uint64_t scan_budget = 10000000);

// --- exp interpolation on a scale list -------------------------------------

// breakpoints = the full scale list including a_0; verifies continuity at
// every a_n with value h(a_n)/2^n and the per-piece ratio g/h <= 2^{-(n-1)}
DimFunc construct_g_interp(const DimFunc& h, const std::vector<Real>& as);

}  // namespace packlab
