#pragma once

// Disjoint-ball packings and premeasure certificates: the explicit
// corner-vertex proof packings, exact 1-d optimization, brute force and
// greedy baselines, divergence certificates and the nested recursive
// extraction. Every returned packing carries (or can re-run) an exact
// disjointness verification; all weights are certified lower bounds on
// the packing premeasure.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "packlab/cantor.hpp"
#include "packlab/dimfunc.hpp"

namespace packlab {

using ModelPtr = std::shared_ptr<const CantorModel>;
ModelPtr build_model_shared(const DimFunc& h, int d, int N, const ScaleOptions& opts = {});

struct Ball {
  std::vector<Real> center;
  Real radius;
};

struct BallWitness {
  enum Kind { ModelVertex, Candidate } kind = Candidate;
  CubeAddress address;      // ModelVertex: cube whose down-left vertex is the center
  std::uint64_t index = 0;  // Candidate: position in the declared candidate set
};

// Uniform family: one ball at the down-left vertex of every level-
// `cube_level` cube inside `region`, shared radius. Enumerated lazily in
// lexicographic address order (ascending corners).
struct CornerBlock {
  CubeAddress region;
  int cube_level = 0;
  Real radius;
  bool drop_last = false;  // exclude the lexicographically last ball
};

struct PackingComponent {
  bool is_block = false;
  CornerBlock block;
  std::vector<Ball> balls;
  std::vector<BallWitness> witnesses;
  int stage = 0;
};

class Packing {
 public:
  Real delta;                // every diameter < delta
  std::vector<PackingComponent> components;
  ModelPtr model;            // required when any component is a block

  std::uint64_t count() const;
  std::uint64_t block_count(const PackingComponent& c) const;

  // streams balls in index order; the center vector is borrowed
  using BallVisitor = std::function<void(std::uint64_t, const std::vector<Real>&, const Real&)>;
  void for_each_ball(const BallVisitor& fn) const;
  Ball ball_at(std::uint64_t index) const;
};

struct PackingVerification {
  bool disjoint = false;
  bool diameters_ok = false;
  bool witnesses_ok = false;
  std::string method;
  long long bad_i = -1, bad_j = -1;  // offending pair when not disjoint
  bool ok() const { return disjoint && diameters_ok && witnesses_ok; }
};

// Exact re-verification. d=1 uses a complete sorted sweep; uniform blocks
// certify via the attained minimum corner gap min_k(a_{k-1} - 2a_k + a_L);
// cross-component separation via exact point-to-box distances; small sets
// fall back to all-pairs.
PackingVerification verify_packing(const Packing& p);

// Sum of gauge(diameter) in ball-index order (deterministic left fold).
Real packing_weight(const Packing& p, const DimFunc& g);

struct PremeasureCertificate {
  Packing packing;
  DimFunc gauge;
  Real weight;                  // recomputed canonical sum; LOWER bound on P_delta
  PackingVerification verification;
  std::vector<std::uint64_t> chosen;  // candidate indices, when applicable
};

// One ball per level-m cube at its down-left vertex, radius r with
// a_{m+2} < r <= a_{m+1}; count 2^{dm}.
Packing proof_packing(const ModelPtr& model, int m, const Real& r);

// Exhaustive maximum over pairwise-disjoint subsets of <= 24 candidates.
// Positive gauge weights make every optimum a maximal set, so only
// maximal sets are enumerated; ties break to the lexicographically
// smallest index set.
PremeasureCertificate brute_force_packing(const std::vector<Ball>& candidates, const DimFunc& g,
                                          const Real& delta);

// Exact 1-d optimum over centers x radii_grid by weighted interval
// scheduling; internal comparisons run with 64 guard bits, reported
// weight is the canonical sum.
PremeasureCertificate optimize_packing_1d(const std::vector<Real>& centers,
                                          const std::vector<Real>& radii_grid, const DimFunc& g,
                                          const Real& delta);

// Greedy by descending gauge weight; valid lower bound in any dimension.
PremeasureCertificate greedy_packing(const std::vector<std::vector<Real>>& centers,
                                     const std::vector<Real>& radii_grid, const DimFunc& g,
                                     const Real& delta);

struct LevelWeight {
  int m = 0;
  std::uint64_t count = 0;
  Real weight_formula;  // count * g(2 a_{m+1})
};

struct DivergenceResult {
  bool found = false;
  int level = -1;
  std::optional<PremeasureCertificate> certificate;
  std::vector<LevelWeight> trace;
  Real best_weight;
  int best_level = -1;
  OrderClassification order_evidence;
};

// Searches m = 1,2,... with corner balls on level-(m-1) cubes and radius
// a_{m+1} for a certified weight > M with diameters < delta. Not finding
// one within the model depth is the DEPTH_EXCEEDED outcome: the trace and
// best weight are returned so the caller can tell a bounded trend from an
// under-deep model.
DivergenceResult divergence_certificate(const ModelPtr& model, const DimFunc& g, const Real& M,
                                        const Real& delta);

struct StageInfo {
  int stage = 0;
  CubeAddress region;
  int cube_level = 0;
  std::uint64_t count = 0;
  Real radius;
  Real stage_weight;  // full stage packing, before dropping the last ball
};

struct NestedPackingResult {
  bool success = false;
  ErrorCode fail_code = ErrorCode::STAGE_FAIL;
  std::string fail_detail;
  Packing merged;
  std::vector<StageInfo> stages;
  Real total_weight;
  Real threshold;  // (s+1) g(1)
  PackingVerification verification;
};

// Recursive extraction: each stage packs the current region with weight
// > 2 g(1); its last ball contains a full basic cube which becomes the
// next region; non-final stages drop their last ball from the merged
// 1-packing. Total certified weight > (s+1) g(1).
NestedPackingResult extract_nested_packing(const ModelPtr& model, const DimFunc& g, int stages);

}  // namespace packlab
