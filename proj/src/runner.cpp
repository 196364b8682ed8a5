#include "packlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>

#include "packlab/constructions.hpp"
#include "packlab/error.hpp"
#include "packlab/packing.hpp"
#include "packlab/report.hpp"
#include "packlab/version.hpp"

namespace packlab {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kCommands = {
    "scales",      "density",     "cover",  "diverge", "lemma6",
    "construct-f", "construct-g", "construct-ginterp", "order", "optimize"};

bool is_command(const std::string& name) {
  return std::find(kCommands.begin(), kCommands.end(), name) != kCommands.end();
}

namespace {

struct RunContext {
  Config cfg;
  fs::path out;
  Prec prec = 128;
  std::uint64_t seed = 0;
  int threads = 1;
  json summary;
  std::vector<std::string> outputs;
  bool all_pass = true;

  void flag(const std::string& name, bool ok) {
    summary["flags"][name] = ok;
    if (!ok) all_pass = false;
  }
  std::string path(const std::string& name) {
    outputs.push_back(name);
    return (out / name).string();
  }
};

std::string cache_dir_for(const Config& cfg) {
  if (!cfg.get_bool("cache", true)) return "";
  if (const char* env = std::getenv("PACKLAB_CACHE")) return env;
  std::string dir = cfg.get_str("cache_dir", "");
  if (!dir.empty()) return dir;
  if (const char* home = std::getenv("HOME")) return std::string(home) + "/.cache/packlab";
  return "";
}

DimFunc gauge_from(const RunContext& ctx, const std::string& section) {
  Config sub = ctx.cfg.subsection(section);
  if (sub.entries().empty())
    throw Error(ErrorCode::CONFIG_INVALID, "missing dimension function section '" + section + ".*'");
  return make_builtin(sub, ctx.prec);
}

ModelPtr model_from(RunContext& ctx) {
  DimFunc h = gauge_from(ctx, "h");
  int d = static_cast<int>(ctx.cfg.get_int("d", 1));
  int N = static_cast<int>(ctx.cfg.get_int("N"));
  ScaleOptions opts;
  if (ctx.cfg.has("tolerance")) opts.rel_tolerance = ctx.cfg.get_real("tolerance", ctx.prec);
  opts.cache_dir = cache_dir_for(ctx.cfg);
  return build_model_shared(h, d, N, opts);
}

json verification_json(const PackingVerification& v) {
  return json{{"disjoint", v.disjoint},
              {"diameters_ok", v.diameters_ok},
              {"witnesses_ok", v.witnesses_ok},
              {"method", v.method}};
}

void export_packing_csv(RunContext& ctx, const std::string& name, const Packing& p,
                        std::uint64_t limit) {
  if (p.count() > limit) {
    ctx.summary["packing_csv"] = "skipped: " + std::to_string(p.count()) + " balls exceed limit " +
                                 std::to_string(limit);
    return;
  }
  std::vector<std::string> header = {"index", "stage", "center", "center_hex",
                                     "radius", "radius_hex", "diameter_hex"};
  CsvWriter csv(ctx.path(name), header);
  std::uint64_t base = 0;
  for (const auto& comp : p.components) {
    Packing one;
    one.model = p.model;
    one.delta = p.delta;
    one.components.push_back(comp);
    one.for_each_ball([&](std::uint64_t i, const std::vector<Real>& c, const Real& r) {
      std::string dec, hex;
      for (size_t k = 0; k < c.size(); ++k) {
        if (k) {
          dec += ";";
          hex += ";";
        }
        dec += csv_dec(c[k]);
        hex += csv_hex(c[k]);
      }
      csv.row({std::to_string(base + i), std::to_string(comp.stage), dec, hex, csv_dec(r),
               csv_hex(r), csv_hex(ldexp2(r, 1))});
    });
    base += p.block_count(comp);
  }
}

// --- commands --------------------------------------------------------------

void cmd_scales(RunContext& ctx) {
  ModelPtr model = model_from(ctx);
  const ScaleSequence& s = model->scales();
  CsvWriter csv(ctx.path("scales.csv"), {"n", "a_n", "a_n_hex"});
  for (int n = 0; n <= s.N; ++n)
    csv.row({std::to_string(n), csv_dec(s.a[n]), csv_hex(s.a[n])});
  ctx.summary["d"] = s.d;
  ctx.summary["N"] = s.N;
  ctx.summary["max_h_error"] = real_json(s.max_h_error);
  ctx.summary["tolerance"] = real_json(s.tolerance);
  ctx.flag("separation", s.separation_ok);
  ctx.flag("smallness", s.smallness_ok);
  ctx.flag("h_error_within_tolerance", s.max_h_error <= mul(s.tolerance, Real::one(ctx.prec),
                                                            ctx.prec, Rnd::Up));
}

void cmd_density(RunContext& ctx) {
  ModelPtr model = model_from(ctx);
  long count = ctx.cfg.get_int("samples", 1000);
  Rng rng(ctx.seed);
  std::vector<DensitySample> samples;
  samples.reserve(count);
  for (long i = 0; i < count; ++i) samples.push_back(model->random_sample(rng));
  DensityReport rep = model->density_report(samples, ctx.threads);

  CsvWriter csv(ctx.path("density.csv"),
                {"x", "r", "n", "mu_lo", "mu_hi", "lower_bound", "upper_bound", "pass", "r_hex",
                 "mu_lo_hex", "mu_hi_hex", "lower_bound_hex", "upper_bound_hex"});
  for (const auto& row : rep.rows) {
    std::string x;
    for (size_t k = 0; k < row.x.size(); ++k) {
      if (k) x += ";";
      x += csv_dec(row.x[k]);
    }
    csv.row({x, csv_dec(row.r), std::to_string(row.n), csv_dec(row.mu.lo), csv_dec(row.mu.hi),
             csv_dec(row.lower_bound), csv_dec(row.upper_bound), row.pass() ? "1" : "0",
             csv_hex(row.r), csv_hex(row.mu.lo), csv_hex(row.mu.hi), csv_hex(row.lower_bound),
             csv_hex(row.upper_bound)});
  }
  ctx.summary["samples"] = static_cast<long>(rep.rows.size());
  ctx.summary["density_constant"] = real_json(rep.density_constant);
  ctx.flag("all_samples_pass", rep.all_pass);
}

void cmd_cover(RunContext& ctx) {
  ModelPtr model = model_from(ctx);
  int n_max = static_cast<int>(ctx.cfg.get_int("n_max", 4));
  int k_min = static_cast<int>(ctx.cfg.get_int("k_min", ctx.cfg.get_int("k", 2)));
  int k_max = static_cast<int>(ctx.cfg.get_int("k_max", ctx.cfg.get_int("k", k_min)));
  if (k_max < k_min) throw Error(ErrorCode::CONFIG_INVALID, "k_max < k_min");

  CsvWriter csv(ctx.path("cover.csv"),
                {"k", "n_max", "exact_sum", "paper_sum", "claimed_bound", "paper_ratio_prev",
                 "exact_sum_hex", "paper_sum_hex"});
  CsvWriter plot(ctx.path("plot_cover_decay.csv"), {"k", "log2_paper_sum"});
  bool exact_le_paper = true;
  bool decay_ok = true;
  Real prev;
  Real d_real = Real::of_long(model->d(), ctx.prec);
  Real tol = Real::parse("1e-6", ctx.prec);
  bool first = true;
  for (int k = k_min; k <= k_max; ++k) {
    CoverReport rep = model->gdelta_cover(k, n_max);
    if (!(rep.exact_sum <= rep.paper_sum)) exact_le_paper = false;
    std::string ratio = "";
    if (!first) {
      Real r = div(rep.paper_sum, prev, ctx.prec);
      ratio = csv_dec(r);
      // log2 of the successive ratio must sit within 1e-6 of -d
      Real gap = abs_r(add(log2_r(r, ctx.prec), d_real, ctx.prec));
      if (gap > tol) decay_ok = false;
    }
    csv.row({std::to_string(k), std::to_string(n_max), csv_dec(rep.exact_sum),
             csv_dec(rep.paper_sum), csv_dec(rep.claimed_bound), ratio, csv_hex(rep.exact_sum),
             csv_hex(rep.paper_sum)});
    plot.row({std::to_string(k), csv_dec(log2_r(rep.paper_sum, ctx.prec))});
    prev = rep.paper_sum;
    first = false;
  }
  ctx.flag("exact_le_paper", exact_le_paper);
  if (k_max > k_min) ctx.flag("decay_matches_2^-d", decay_ok);
}

void cmd_diverge(RunContext& ctx) {
  ModelPtr model = model_from(ctx);
  DimFunc g = gauge_from(ctx, "g");
  Real M = ctx.cfg.get_real("M", ctx.prec);
  Real delta = ctx.cfg.has("delta") ? ctx.cfg.get_real("delta", ctx.prec) : Real::one(ctx.prec);
  DivergenceResult res = divergence_certificate(model, g, M, delta);

  CsvWriter csv(ctx.path("diverge_trace.csv"), {"m", "count", "weight", "log2_weight", "weight_hex"});
  CsvWriter plot(ctx.path("plot_weight_by_level.csv"), {"m", "log2_weight"});
  for (const auto& lw : res.trace) {
    Real l2 = log2_r(lw.weight_formula, ctx.prec);
    csv.row({std::to_string(lw.m), std::to_string(lw.count), csv_dec(lw.weight_formula),
             csv_dec(l2), csv_hex(lw.weight_formula)});
    plot.row({std::to_string(lw.m), csv_dec(l2)});
  }
  ctx.summary["order_evidence"] = order_verdict_name(res.order_evidence.verdict);
  ctx.summary["M"] = real_json(M);
  ctx.summary["best_weight"] = real_json(res.best_weight);
  ctx.summary["best_level"] = res.best_level;
  if (res.found) {
    const auto& cert = *res.certificate;
    json c;
    c["level"] = res.level;
    c["ball_count"] = cert.packing.count();
    c["weight"] = real_json(cert.weight);
    c["delta"] = real_json(delta);
    c["bound_kind"] = "LOWER";
    c["gauge"] = serialize_dimfunc(cert.gauge).entries();
    c["verification"] = verification_json(cert.verification);
    c["inputs_hash"] = to_hex_u64(ctx.cfg.semantic_hash());
    write_json_file(ctx.path("certificate.json"), c);
    export_packing_csv(ctx, "packing.csv", cert.packing,
                       ctx.cfg.get_u64("packing_csv_limit", 65536));
    ctx.flag("certificate_found", true);
    ctx.flag("verified_disjoint", cert.verification.ok());
  } else {
    ctx.flag("certificate_found", false);
    throw Error(ErrorCode::DEPTH_EXCEEDED,
                "no level reached weight > M; best " + res.best_weight.dec(8) + " at m = " +
                    std::to_string(res.best_level));
  }
}

void cmd_lemma6(RunContext& ctx) {
  ModelPtr model = model_from(ctx);
  DimFunc g = gauge_from(ctx, "g");
  int stages = static_cast<int>(ctx.cfg.get_int("stages", 2));
  NestedPackingResult res = extract_nested_packing(model, g, stages);

  CsvWriter csv(ctx.path("lemma6_stages.csv"),
                {"stage", "region_level", "cube_level", "count", "radius", "stage_weight",
                 "stage_weight_hex"});
  for (const auto& st : res.stages)
    csv.row({std::to_string(st.stage), std::to_string(st.region.size()),
             std::to_string(st.cube_level), std::to_string(st.count), csv_dec(st.radius),
             csv_dec(st.stage_weight), csv_hex(st.stage_weight)});
  ctx.summary["threshold"] = real_json(res.threshold);
  if (!res.success) {
    ctx.flag("extraction_succeeded", false);
    throw Error(res.fail_code, res.fail_detail);
  }
  ctx.summary["total_weight"] = real_json(res.total_weight);
  ctx.summary["ball_count"] = res.merged.count();
  ctx.summary["verification"] = verification_json(res.verification);
  export_packing_csv(ctx, "packing.csv", res.merged, ctx.cfg.get_u64("packing_csv_limit", 65536));
  ctx.flag("extraction_succeeded", true);
  ctx.flag("weight_above_threshold", res.total_weight > res.threshold);
  ctx.flag("verified_disjoint", res.verification.ok());
}

DeltaSequence delta_sequence_from(RunContext& ctx, const DimFunc& h, std::uint64_t k_points) {
  DeltaSequence seq;
  seq.instance_points = k_points;
  if (ctx.cfg.has("deltas")) {
    seq.values = ctx.cfg.get_real_list("deltas", ctx.prec);
  } else if (ctx.cfg.get_str("deltas_rule", "") == "pow2") {
    long step = ctx.cfg.get_int("deltas_step", 4);
    long count = ctx.cfg.get_int("deltas_count", 8);
    for (long n = 0; n < count; ++n) seq.values.push_back(Real::pow2(-step * n, ctx.prec));
  } else if (ctx.cfg.get_bool("deltas_solve", false)) {
    seq = solve_delta_sequence(h, k_points, static_cast<int>(ctx.cfg.get_int("deltas_count", 8)));
  } else {
    throw Error(ErrorCode::CONFIG_INVALID, "provide deltas, deltas_rule=pow2 or deltas_solve=true");
  }
  return seq;
}

void cmd_construct_f(RunContext& ctx) {
  DimFunc h = gauge_from(ctx, "h");
  FiniteInstance inst;
  for (const auto& part : split_list(ctx.cfg.get_str("instance", "0"))) {
    std::vector<Real> pt;
    for (const auto& coord : split_list(part, ':')) pt.push_back(parse_real(coord, ctx.prec));
    inst.points.push_back(std::move(pt));
  }
  DeltaSequence seq = delta_sequence_from(ctx, h, inst.points.size());
  auto validation = validate_delta_sequence(h, seq);
  ctx.flag("delta_sequence_valid", validation.ok);
  if (!validation.ok)
    throw Error(ErrorCode::INVALID_SEQUENCE,
                validation.reason + " (index " + std::to_string(validation.first_fail) + ")");
  DimFunc f = construct_f(h, seq);

  CsvWriter csv(ctx.path("f_breaks.csv"),
                {"n", "delta_n", "f_at_delta_n", "expected_2^n_h", "f_hex", "expected_hex"});
  bool identity_ok = true;
  for (size_t n = 0; n < seq.values.size(); ++n) {
    Real fv = f->eval(seq.values[n]);
    Real expect = ldexp2(h->eval(seq.values[n]), static_cast<long>(n));
    if (!(fv == expect)) identity_ok = false;
    csv.row({std::to_string(n), csv_dec(seq.values[n]), csv_dec(fv), csv_dec(expect), csv_hex(fv),
             csv_hex(expect)});
  }
  ctx.flag("boundary_identity", identity_ok);

  long trials = ctx.cfg.get_int("trials", 100);
  Rng rng(ctx.seed);
  Real four = Real::of_long(4, ctx.prec);
  bool sums_ok = true;
  CsvWriter sums(ctx.path("f_packing_sums.csv"), {"trial", "ball_count", "sum_f", "within_4"});
  for (long t = 0; t < trials; ++t) {
    Packing p = random_instance_packing(inst, seq.values[0], rng);
    Real s = packing_weight(p, f);
    bool ok = s <= four;
    if (!ok) sums_ok = false;
    sums.row({std::to_string(t), std::to_string(p.count()), csv_dec(s), ok ? "1" : "0"});
  }
  ctx.flag("packing_sums_within_4", sums_ok);
  write_json_file(ctx.path("function.json"), json(serialize_dimfunc(f).entries()));
}

void cmd_construct_g(RunContext& ctx) {
  DimFunc h = gauge_from(ctx, "h");
  std::string kind = ctx.cfg.get_str("stream", "harmonic");
  std::unique_ptr<DiameterStream> stream;
  if (kind == "harmonic") {
    stream = std::make_unique<HarmonicStream>();
  } else if (kind == "list") {
    stream = std::make_unique<ListStream>(ctx.cfg.get_real_list("stream_values", ctx.prec));
  } else if (kind == "inverse_power") {
    stream = std::make_unique<InversePowerStream>(ctx.cfg.get_rational("stream_p"));
  } else {
    throw Error(ErrorCode::CONFIG_INVALID, "unknown stream '" + kind + "'");
  }
  int J = static_cast<int>(ctx.cfg.get_int("stages", 5));
  std::uint64_t budget = ctx.cfg.get_u64("scan_budget", 10000000);
  auto [seq, g] = construct_g(h, *stream, J, budget);

  CsvWriter csv(ctx.path("g_stages.csv"),
                {"j", "N_j", "t_j", "sum_lower", "chain_lower", "scanned", "t_j_hex"});
  bool chain_ok = true;
  bool identity_ok = true;
  for (int j = 1; j <= J; ++j) {
    const TStage& st = seq.stages[j - 1];
    if (!(st.chain_lower > Real::pow2(j, ctx.prec))) chain_ok = false;
    if (!(g->eval(st.t) == ldexp2(h->eval(st.t), -j))) identity_ok = false;
    csv.row({std::to_string(j), st.N.get_str(), csv_dec(st.t), csv_dec(st.sum_lower),
             csv_dec(st.chain_lower), st.scanned ? "1" : "0", csv_hex(st.t)});
  }
  ctx.flag("chain_exceeds_2^j", chain_ok);
  ctx.flag("boundary_identity", identity_ok);
  ctx.summary["stream"] = seq.stream_name;
  write_json_file(ctx.path("function.json"), json(serialize_dimfunc(g).entries()));
}

void cmd_construct_ginterp(RunContext& ctx) {
  DimFunc h = gauge_from(ctx, "h");
  std::vector<Real> as;
  if (ctx.cfg.has("as")) {
    as = ctx.cfg.get_real_list("as", ctx.prec);
  } else {
    ModelPtr model = model_from(ctx);
    as = model->scales().a;
  }
  DimFunc g = construct_g_interp(h, as);

  CsvWriter csv(ctx.path("ginterp_breaks.csv"),
                {"n", "a_n", "g_at_a_n", "expected_h_over_2^n", "g_hex", "expected_hex"});
  bool identity_ok = true;
  for (size_t n = 1; n < as.size(); ++n) {
    Real gv = g->eval(as[n]);
    Real expect = ldexp2(h->eval(as[n]), -static_cast<long>(n));
    if (!(gv == expect)) identity_ok = false;
    csv.row({std::to_string(n), csv_dec(as[n]), csv_dec(gv), csv_dec(expect), csv_hex(gv),
             csv_hex(expect)});
  }
  ctx.flag("boundary_identity", identity_ok);
  auto grid = clip_grid(dyadic_grid(static_cast<int>(ctx.cfg.get_int("grid_j", 256)), ctx.prec),
                        {g, h});
  auto order = compare_order(g, h, grid);
  ctx.summary["order_vs_h"] = order_verdict_name(order.verdict);
  ctx.flag("order_larger", order.verdict == OrderVerdict::LARGER);
  write_json_file(ctx.path("function.json"), json(serialize_dimfunc(g).entries()));
}

void cmd_order(RunContext& ctx) {
  DimFunc g = gauge_from(ctx, "g");
  DimFunc h = gauge_from(ctx, "h");
  auto grid = clip_grid(dyadic_grid(static_cast<int>(ctx.cfg.get_int("grid_j", 256)), ctx.prec),
                        {g, h});
  auto order = compare_order(g, h, grid);

  CsvWriter csv(ctx.path("ratio_trace.csv"), {"t", "h_over_g", "t_hex", "h_over_g_hex"});
  CsvWriter plot(ctx.path("plot_ratio.csv"), {"log2_t", "log2_ratio"});
  for (const auto& [t, r] : order.ratio_trace) {
    csv.row({csv_dec(t), csv_dec(r), csv_hex(t), csv_hex(r)});
    plot.row({csv_dec(log2_r(t, ctx.prec)), csv_dec(log2_r(r, ctx.prec))});
  }
  ctx.summary["verdict"] = order_verdict_name(order.verdict);
  std::string expected = ctx.cfg.get_str("expect_verdict", "");
  if (!expected.empty())
    ctx.flag("verdict_matches_expectation", expected == order_verdict_name(order.verdict));
}

void cmd_optimize(RunContext& ctx) {
  DimFunc g = gauge_from(ctx, "g");
  Real delta = ctx.cfg.has("delta") ? ctx.cfg.get_real("delta", ctx.prec) : Real::one(ctx.prec);
  std::string mode = ctx.cfg.get_str("mode", "dp");

  std::vector<Real> centers_1d;
  std::vector<std::vector<Real>> centers_nd;
  for (const auto& part : split_list(ctx.cfg.get_str("centers"))) {
    std::vector<Real> pt;
    for (const auto& coord : split_list(part, ':')) pt.push_back(parse_real(coord, ctx.prec));
    if (pt.size() == 1) centers_1d.push_back(pt[0]);
    centers_nd.push_back(std::move(pt));
  }
  std::vector<Real> radii = ctx.cfg.get_real_list("radii", ctx.prec);

  auto emit = [&](const char* name, const PremeasureCertificate& cert) {
    json c;
    c["mode"] = name;
    c["weight"] = real_json(cert.weight);
    c["bound_kind"] = "LOWER";
    c["ball_count"] = cert.packing.count();
    c["chosen"] = cert.chosen;
    c["verification"] = verification_json(cert.verification);
    c["inputs_hash"] = to_hex_u64(ctx.cfg.semantic_hash());
    write_json_file(ctx.path(std::string(name) + "_certificate.json"), c);
    export_packing_csv(ctx, std::string(name) + "_packing.csv", cert.packing,
                       ctx.cfg.get_u64("packing_csv_limit", 65536));
    ctx.flag(std::string(name) + "_verified", cert.verification.ok());
  };

  auto as_balls = [&]() {
    std::vector<Ball> balls;
    for (const auto& c : centers_nd)
      for (const auto& r : radii) balls.push_back(Ball{c, r});
    return balls;
  };

  if (mode == "dp") {
    emit("dp", optimize_packing_1d(centers_1d, radii, g, delta));
  } else if (mode == "greedy") {
    emit("greedy", greedy_packing(centers_nd, radii, g, delta));
  } else if (mode == "brute") {
    emit("brute", brute_force_packing(as_balls(), g, delta));
  } else if (mode == "compare") {
    auto dp = optimize_packing_1d(centers_1d, radii, g, delta);
    auto brute = brute_force_packing(as_balls(), g, delta);
    emit("dp", dp);
    emit("brute", brute);
    ctx.flag("weights_equal", dp.weight == brute.weight);
  } else {
    throw Error(ErrorCode::CONFIG_INVALID, "unknown mode '" + mode + "'");
  }
}

}  // namespace

Config default_config(const std::string& command) {
  Config c;
  c.set("command", command);
  c.set("precision", "128");
  c.set("seed", "0");
  c.set("threads", "1");
  c.set("out", "out");
  c.set("cache", "true");
  c.set("cache_dir", "");
  c.set("packing_csv_limit", "65536");
  if (command == "scales" || command == "density" || command == "cover" || command == "diverge" ||
      command == "lemma6") {
    c.set("d", "1");
    c.set("N", "12");
    c.set("h.kind", "power");
    c.set("h.s", "1/2");
  }
  if (command == "density") c.set("samples", "1000");
  if (command == "cover") {
    c.set("k_min", "2");
    c.set("k_max", "8");
    c.set("n_max", "4");
  }
  if (command == "diverge" || command == "lemma6") {
    c.set("g.kind", "power");
    c.set("g.s", "1/3");
  }
  if (command == "diverge") {
    c.set("M", "10");
    c.set("delta", "1");
  }
  if (command == "lemma6") c.set("stages", "2");
  if (command == "construct-f") {
    c.set("h.kind", "power");
    c.set("h.s", "1/2");
    c.set("deltas_rule", "pow2");
    c.set("deltas_step", "4");
    c.set("deltas_count", "8");
    c.set("instance", "0");
    c.set("trials", "100");
  }
  if (command == "construct-g") {
    c.set("h.kind", "power");
    c.set("h.s", "1");
    c.set("stream", "harmonic");
    c.set("stages", "5");
    c.set("scan_budget", "10000000");
  }
  if (command == "construct-ginterp") {
    c.set("h.kind", "power");
    c.set("h.s", "1/2");
    c.set("d", "1");
    c.set("N", "30");
    c.set("grid_j", "256");
  }
  if (command == "order") {
    c.set("g.kind", "power");
    c.set("g.s", "1/3");
    c.set("h.kind", "power");
    c.set("h.s", "1/2");
    c.set("grid_j", "256");
  }
  if (command == "optimize") {
    c.set("g.kind", "power");
    c.set("g.s", "1");
    c.set("mode", "dp");
    c.set("centers", "0;1/2;1");
    c.set("radii", "1/8;1/4");
    c.set("delta", "1");
  }
  return c;
}

RunOutcome run_command(const std::string& command, Config config) {
  RunOutcome outcome;
  auto started = std::chrono::system_clock::now();

  RunContext ctx;
  ctx.cfg = std::move(config);
  try {
    ctx.prec = static_cast<Prec>(ctx.cfg.get_int("precision", 128));
    set_default_precision(ctx.prec);
    ctx.seed = ctx.cfg.get_u64("seed", 0);
    ctx.threads = static_cast<int>(ctx.cfg.get_int("threads", 1));
    ctx.out = ctx.cfg.get_str("out", "out");
    std::filesystem::create_directories(ctx.out);

    ctx.summary["command"] = command;
    ctx.summary["version"] = kVersion;
    ctx.summary["config_hash"] = to_hex_u64(ctx.cfg.semantic_hash());
    ctx.summary["precision"] = static_cast<long>(ctx.prec);
    ctx.summary["seed"] = ctx.seed;
    ctx.summary["generator"] = Rng::name();

    if (command == "scales")
      cmd_scales(ctx);
    else if (command == "density")
      cmd_density(ctx);
    else if (command == "cover")
      cmd_cover(ctx);
    else if (command == "diverge")
      cmd_diverge(ctx);
    else if (command == "lemma6")
      cmd_lemma6(ctx);
    else if (command == "construct-f")
      cmd_construct_f(ctx);
    else if (command == "construct-g")
      cmd_construct_g(ctx);
    else if (command == "construct-ginterp")
      cmd_construct_ginterp(ctx);
    else if (command == "order")
      cmd_order(ctx);
    else if (command == "optimize")
      cmd_optimize(ctx);
    else
      throw Error(ErrorCode::CONFIG_INVALID, "unknown command '" + command + "'");

    outcome.all_pass = ctx.all_pass;
    outcome.exit_code = ctx.all_pass ? 0 : 1;
  } catch (const Error& e) {
    outcome.error_code = error_code_name(e.code());
    outcome.error_message = e.what();
    outcome.exit_code = e.code() == ErrorCode::CONFIG_INVALID ? 2 : 3;
    ctx.summary["error"] = {{"code", outcome.error_code}, {"message", outcome.error_message}};
  } catch (const std::exception& e) {
    outcome.error_code = "INTERNAL";
    outcome.error_message = e.what();
    outcome.exit_code = 4;
    ctx.summary["error"] = {{"code", "INTERNAL"}, {"message", e.what()}};
  }

  ctx.summary["pass"] = outcome.exit_code == 0;
  try {
    ctx.summary["outputs"] = ctx.outputs;
    write_json_file((ctx.out / "summary.json").string(), ctx.summary);
    auto finished = std::chrono::system_clock::now();
    json meta;
    meta["started_unix"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(started.time_since_epoch()).count();
    meta["duration_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(finished - started).count();
    meta["threads"] = ctx.threads;
    write_json_file((ctx.out / "run_meta.json").string(), meta);
  } catch (const std::exception&) {
    if (outcome.exit_code == 0) outcome.exit_code = 4;
  }
  outcome.outputs = ctx.outputs;
  return outcome;
}

}  // namespace packlab
