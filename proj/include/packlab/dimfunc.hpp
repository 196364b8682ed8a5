#pragma once

// Dimension functions (gauges): evaluable nondecreasing h with h(t) -> 0
// as t -> 0, plus the piecewise constructions used elsewhere. Values are
// immutable after construction and evaluation is pure.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "packlab/config.hpp"
#include "packlab/real.hpp"

namespace packlab {

enum class FuncKind {
  Power,             // t^s
  PowerLog,          // t^s * ln(1/t)^a
  PiecewiseMaxF,     // max(2^n h(t), 2^{n+1} h(delta_{n+1})) on [delta_{n+1}, delta_n)
  PiecewiseExpG,     // 2^{(t-t_j)/(t_{j-1}-t_j) - j} h(t) on (t_j, t_{j-1}]
  PiecewiseExpInterp,// same interpolation, breakpoints from a scale sequence
  OscillatingBlocks, // log-log interpolation between t^lo and t^hi envelopes
};

const char* func_kind_name(FuncKind k);

struct Domain {
  Real lo;        // may be 0
  bool lo_open = true;
  Real hi;        // +inf allowed
  bool hi_open = true;
  bool contains(const Real& t) const;
};

struct DimensionFunction;
using DimFunc = std::shared_ptr<const DimensionFunction>;

struct DimensionFunction {
  FuncKind kind = FuncKind::Power;
  Prec prec = 128;

  Rational s{};                 // Power / PowerLog exponent, > 0
  long log_power = 0;           // PowerLog

  DimFunc base;                 // piecewise kinds: the underlying h
  std::vector<Real> breaks;     // decreasing breakpoints (deltas / ts / as)
  std::vector<Interval> caps;   // MaxF: cached 2^{n+1} h(delta_{n+1}) per piece
  std::vector<Real> denoms;     // Exp kinds: cached b_{j-1} - b_j

  Rational lo_exp{}, hi_exp{};  // OscillatingBlocks
  std::vector<Real> log_nodes;  // L_j = log2 b_j
  std::vector<Real> node_vals;  // W_j = log2 f(b_j)
  std::vector<Real> slopes;     // per-segment log-log slope; last entry = tail slope

  Domain domain;

  bool in_domain(const Real& t) const { return domain.contains(t); }
  Real eval(const Real& t) const { return eval_rnd(t, Rnd::Near); }
  Real eval_rnd(const Real& t, Rnd rnd) const;
  Interval eval_interval(const Real& t) const {
    return {eval_rnd(t, Rnd::Down), eval_rnd(t, Rnd::Up)};
  }

  // interior breakpoints, decreasing; empty for smooth kinds
  std::vector<Real> breakpoints() const;
  // piece formula evaluated at t as if t belonged to the piece just
  // above/below the breakpoint; used for one-sided limits
  Real piece_value_above(const Real& b) const;
  Real piece_value_below(const Real& b) const;

  std::string describe() const;   // canonical one-line form (hash input)
};

DimFunc make_power(Rational s, Prec prec = default_precision());
DimFunc make_power_log(Rational s, long a, Prec prec = default_precision());
DimFunc make_piecewise_max(DimFunc h, std::vector<Real> deltas);
DimFunc make_piecewise_exp(DimFunc h, std::vector<Real> breaks, FuncKind which);
DimFunc make_oscillating(Rational lo, Rational hi, std::vector<Real> boundaries,
                         Prec prec = default_precision());

// Build from a config section ("kind = power", "s = 1/2", nested "base.*").
// Runs the numeric validation suite on the default grid; throws BAD_SPEC /
// NON_MONOTONE on failure.
DimFunc make_builtin(const Config& spec, Prec prec = default_precision());
Config serialize_dimfunc(const DimFunc& f);

// --- grids ---------------------------------------------------------------

// t = 2^-j for j = 0..j_max, descending
std::vector<Real> dyadic_grid(int j_max, Prec prec = default_precision());
// drop grid points outside the domain of every listed function; if
// need_doubling is set, 2t must stay inside as well
std::vector<Real> clip_grid(std::vector<Real> grid, const std::vector<DimFunc>& fs,
                            bool need_doubling = false);

// --- invariant suite -----------------------------------------------------

struct GaugeValidation {
  bool positive = false;
  bool nondecreasing = false;
  bool tends_to_zero = false;
  bool continuous = false;
  std::string detail;
  bool ok() const { return positive && nondecreasing && tends_to_zero && continuous; }
};

// relative continuity/monotonicity tolerance
Real default_eps_cont(Prec prec);

GaugeValidation validate_gauge(const DimFunc& f, const std::vector<Real>& grid,
                               const Real& eps_cont);

// --- class membership ----------------------------------------------------

struct DoublingReport {
  Real c0_estimate;       // sup of t^d / h(t) over the grid
  Real c1_estimate;       // sup of h(2t) / h(t) over the grid
  std::vector<Real> grid;
  bool passed = false;    // estimates finite and no divergence trend
  bool c0_divergent = false;  // last value > 2x median: unbounded trend
  bool c1_divergent = false;
};

DoublingReport check_membership_dd(const DimFunc& f, int d, const std::vector<Real>& grid);

// --- order classification ------------------------------------------------

enum class OrderVerdict { SMALLER, LARGER, COMPARABLE, LIMINF_ZERO_ONLY, INCONCLUSIVE };
const char* order_verdict_name(OrderVerdict v);

struct OrderClassification {
  OrderVerdict verdict = OrderVerdict::INCONCLUSIVE;
  std::vector<std::pair<Real, Real>> ratio_trace;  // (t, h(t)/g(t)), t descending
};

// Classifier thresholds (log2 of the ratio h/g): a "low" witness is a
// ratio below 2^-20, a "high" one above 2^-4; the comparable band is
// |log2| <= 4; the mirrored thresholds serve LARGER. Verdicts are
// evidence labels over the finite grid, never proofs.
inline constexpr long kOrderLowLog2 = -20;
inline constexpr long kOrderHighLog2 = -4;
inline constexpr long kOrderComparableBand = 4;
inline constexpr int kOrderWitnesses = 3;

OrderClassification compare_order(const DimFunc& g, const DimFunc& h,
                                  const std::vector<Real>& grid);

}  // namespace packlab
