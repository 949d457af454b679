// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Runs end to end on synthetic data only.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rigsolve/clustering.hpp"
#include "rigsolve/evaluation.hpp"
#include "rigsolve/kernels.hpp"
#include "rigsolve/model.hpp"
#include "rigsolve/solvers.hpp"
#include "rigsolve/synth.hpp"
#include "test_util.hpp"

using namespace rigsolve;
using namespace rigsolve::testutil;

namespace {

int g_failures = 0;

void report(int id, const std::string& what, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << what;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!ok) ++g_failures;
}

Clustering full_clustering(const BlendshapeModel& model) {
  Clustering c;
  c.K = 1;
  c.mesh_clusters.resize(1);
  c.ctrl_clusters.resize(1);
  for (int l = 0; l < model.n; ++l) c.mesh_clusters[0].push_back(l);
  for (int j = 0; j < model.m; ++j) c.ctrl_clusters[0].push_back(j);
  return c;
}

// ---------------------------------------------------------------------------
// 1. Sparse clustering density identity: E_D = 1/m exactly, and the m=102
//    model prints 0.009 when the table value is reported truncated to three
//    decimals (1/102 = 0.009803...).
void criterion_1() {
  bool ok = true;
  std::string detail;
  std::mt19937_64 rng(1001);
  for (int m : {10, 24, 102}) {
    const auto model = random_model(rng, 40, m, 2, 0);
    const auto D = offset_matrix(model);
    const auto c = make_clustering(D, Matrix{}, ClusterMethod::Sparse, 0, 0);
    const auto scores = score_clustering(D, c);
    if (scores.density != 1.0 / m) {
      ok = false;
      detail = "E_D != 1/m at m=" + std::to_string(m);
      break;
    }
    if (m == 102) {
      // table-style truncation to 3 decimals
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f", std::floor(scores.density * 1000.0) / 1000.0);
      if (std::string(buf) != "0.009") {
        ok = false;
        detail = std::string("truncated print was ") + buf;
      } else {
        detail = "E_D(m=102) = 1/102, truncates to 0.009";
      }
    }
  }
  report(1, "sparse clustering density equals 1/m exactly", ok, detail);
}

// ---------------------------------------------------------------------------
// 2. Manual-segment assignment never shares a controller across clusters:
//    E_ID = 0 on 100 random models with random 4-segment partitions.
void criterion_2() {
  std::mt19937_64 rng(1002);
  int bad = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 24 + static_cast<int>(rng() % 20);
    const int m = 6 + static_cast<int>(rng() % 6);
    const auto model = random_model(rng, n, m, 2, 1);
    const auto D = offset_matrix(model);
    std::vector<std::vector<int>> segments(4);
    for (int l = 0; l < n; ++l) segments[rng() % 4].push_back(l);
    for (auto& s : segments)
      if (s.empty()) s.push_back(static_cast<int>(rng() % n));  // keep 4 segments
    const auto c = make_clustering(D, Matrix{}, ClusterMethod::Ssk, 0, 0, &segments);
    if (score_clustering(D, c).inter_density != 0.0) ++bad;
  }
  report(2, "manual-segment clustering has zero inter-density on 100 random models",
         bad == 0, bad == 0 ? "" : std::to_string(bad) + " violations");
}

// ---------------------------------------------------------------------------
// 3. Coordinate update against a 1e-4 grid brute force of the full scalar
//    objective, 500 random instances with correctives and proximal terms.
void criterion_3() {
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 29);
    const int m = 2 + static_cast<int>(rng() % 5);
    const auto model = random_model(rng, n, m, 2, 1);
    const auto w = random_weights(rng, m);
    std::vector<double> target(model.dim());
    for (auto& v : target) v = 2.0 * u(rng) - 1.0;
    const int i = static_cast<int>(rng() % m);
    const double alpha = u(rng);
    Prox prox{0.1 + 1.9 * u(rng), u(rng)};
    const Prox* p = (rep % 2 == 0) ? &prox : nullptr;

    const double t = coordinate_update(model, target, w, i, alpha, p);

    double best_t = 0.0, best = std::numeric_limits<double>::infinity();
    auto wt = w;
    for (int step = 0; step <= 10000; ++step) {
      const double tt = step * 1e-4;
      wt[i] = tt;
      const auto f = evaluate_rig(model, wt);
      double obj = 0.0;
      for (std::size_t j = 0; j < f.size(); ++j) {
        const double d = f[j] - target[j];
        obj += d * d;
      }
      obj = 0.5 * obj + alpha * tt;
      if (p) obj += 0.5 * p->rho * (tt - p->anchor) * (tt - p->anchor);
      if (obj < best) {
        best = obj;
        best_t = tt;
      }
    }
    const double err = std::abs(t - best_t);
    worst = std::max(worst, err);
    if (err > 1e-3) ++bad;
  }
  report(3, "coordinate update matches grid brute force on 500 instances", bad == 0,
         "max deviation " + std::to_string(worst));
}

// ---------------------------------------------------------------------------
// 4. Objective trace of holistic coordinate descent never increases by more
//    than 1e-12 across any single coordinate update, 50 random frames.
void criterion_4() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto model = random_model(rng, 10 + static_cast<int>(rng() % 20),
                                    3 + static_cast<int>(rng() % 5), 2, 1);
    const auto w_true = random_weights(rng, model.m);
    auto target = evaluate_rig(model, w_true);
    for (auto& v : target) v += 0.02 * (2.0 * u(rng) - 1.0);
    SolverConfig cfg;
    cfg.alpha = 0.5 * u(rng);
    cfg.trace_per_update = true;
    const auto res = solve_cd(model, target, cfg);
    for (std::size_t j = 1; j < res.objective_trace.size(); ++j) {
      const double rise = res.objective_trace[j] - res.objective_trace[j - 1];
      worst = std::max(worst, rise);
      if (rise > 1e-12) ++bad;
    }
  }
  report(4, "holistic objective trace is monotone per coordinate update", bad == 0,
         "max rise " + std::to_string(worst));
}

// ---------------------------------------------------------------------------
// 5. Single-cluster consensus solve agrees with holistic coordinate descent
//    within 1e-3 on 20 random linear instances (the convex case, where both
//    must reach the same box-constrained least-squares optimum).
void criterion_5() {
  std::mt19937_64 rng(1005);
  int bad = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 10 + static_cast<int>(rng() % 51);
    const int m = 3 + static_cast<int>(rng() % 6);
    const auto model = random_model(rng, n, m, 0, 0);
    const auto w_true = random_weights(rng, m);
    const auto target = evaluate_rig(model, w_true);
    const auto c = full_clustering(model);
    SolverConfig cfg;
    cfg.admm_iters = 100;
    cfg.admm_tol = 1e-8;
    cfg.cd_tol = 1e-10;
    cfg.cd_iters = 200;
    const auto admm = admm_solve(model, c, target, cfg);
    const auto cd = solve_cd(model, target, cfg);
    double err = 0.0;
    for (int j = 0; j < m; ++j) err = std::max(err, std::abs(admm.w[j] - cd.w[j]));
    worst = std::max(worst, err);
    if (err > 1e-3) ++bad;
  }
  report(5, "single-cluster consensus matches holistic solve on 20 instances",
         bad == 0, "max gap " + std::to_string(worst));
}

// ---------------------------------------------------------------------------
// Shared desk-scale study used by criteria 6 and 9.
struct DeskStudy {
  BlendshapeModel model;
  Clustering clustering;
  std::vector<std::vector<double>> targets;
  std::pair<double, double> band;      // ground-truth cardinality mean -/+ std
  double gt_mean = 0.0, gt_std = 0.0;

  struct MethodRun {
    double alpha = 0.0;
    std::vector<SolveResult> results;
    SequenceMetrics metrics;
    bool alpha_found = false;
  };
  MethodRun naive, admm;

  MethodRun run_method(SolveMethod method) const {
    MethodRun out;
    SolverConfig cfg;
    const std::vector<double> grid{0.0,  0.005, 0.01, 0.02, 0.05,
                                   0.1,  0.2,   0.4,  0.8};
    const auto table =
        tradeoff_table(model, &clustering, targets, method, grid, cfg, band);
    out.alpha_found = table.alpha_star.has_value();
    out.alpha = table.alpha_star.value_or(0.0);
    cfg.alpha = out.alpha;
    out.results = solve_sequence(model, &clustering, targets, method, cfg);
    Matrix weights(out.results.size(), model.m);
    for (std::size_t t = 0; t < out.results.size(); ++t)
      std::copy(out.results[t].w.begin(), out.results[t].w.end(), weights.row(t));
    out.metrics = sequence_metrics(model, weights, targets, cfg.zero_threshold);
    return out;
  }
};

DeskStudy make_desk_study() {
  DeskStudy s;
  GenSpec spec;  // desk-scale defaults: n=600, m=24, 60 frames
  spec.seed = 2024;
  s.model = generate_model(spec);
  const auto weights_true = generate_animation(s.model, spec);
  s.targets = make_targets(s.model, weights_true, spec.noise_sigma, spec.seed);

  const auto D = offset_matrix(s.model);
  s.clustering = make_clustering(D, Matrix{}, ClusterMethod::RsjdA, 4, 7);

  double mean = 0.0, sq = 0.0;
  for (int t = 0; t < spec.frames; ++t) {
    std::vector<double> row(weights_true.row(t), weights_true.row(t) + spec.m);
    const int c = cardinality(row, 1e-6);
    mean += c;
    sq += static_cast<double>(c) * c;
  }
  mean /= spec.frames;
  s.gt_mean = mean;
  s.gt_std = std::sqrt(std::max(0.0, sq / spec.frames - mean * mean));
  s.band = {s.gt_mean - s.gt_std, s.gt_mean + s.gt_std};

  s.naive = s.run_method(SolveMethod::Naive);
  s.admm = s.run_method(SolveMethod::Admm);
  return s;
}

double median_rmse(const DeskStudy::MethodRun& run) {
  std::vector<double> r;
  for (const auto& f : run.metrics.frames) r.push_back(f.rmse);
  std::nth_element(r.begin(), r.begin() + r.size() / 2, r.end());
  return r[r.size() / 2];
}

// 6. On the desk-scale study with an overlapping 4-cluster decomposition,
//    the consensus solver beats the naive per-cluster solver in both median
//    RMSE and total curve roughness, each method at its own tuned alpha.
void criterion_6(const DeskStudy& s) {
  const double rmse_admm = median_rmse(s.admm);
  const double rmse_naive = median_rmse(s.naive);
  const double rough_admm = s.admm.metrics.total_roughness;
  const double rough_naive = s.naive.metrics.total_roughness;
  const bool rmse_ok = rmse_admm < rmse_naive;
  const bool rough_ok = rough_admm < rough_naive;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "RMSE half %s: median %.4f vs %.4f; roughness half %s: %.3f vs %.3f; "
                "alpha %.3f/%.3f",
                rmse_ok ? "holds" : "fails", rmse_admm, rmse_naive,
                rough_ok ? "holds" : "fails", rough_admm, rough_naive, s.admm.alpha,
                s.naive.alpha);
  report(6, "consensus beats naive clustered solve in RMSE and roughness",
         rmse_ok && rough_ok, detail);
  if (!rough_ok && rmse_ok) {
    std::cout << "       note: naive under-activates the rig at its tuned alpha; its "
                 "curves end up smoother than the ground truth itself, so the "
                 "roughness direction cannot hold on this synthetic"
              << std::endl;
  }
}

// ---------------------------------------------------------------------------
// 7. Full-scale timing: with n=10000, m=102 and ~20 clusters, both clustered
//    solvers average under 0.75x the holistic per-frame time over 20 frames.
void criterion_7() {
  GenSpec spec;
  spec.n = 10000;
  spec.m = 102;
  spec.pairs = 40;
  spec.triples = 8;
  spec.quads = 2;
  spec.frames = 20;
  spec.sparsity = 8.0;
  spec.seed = 77;
  const auto model = generate_model(spec);
  const auto weights_true = generate_animation(model, spec);
  const auto targets = make_targets(model, weights_true, spec.noise_sigma, spec.seed);

  // several clustering instantiations, keep the lowest-density one
  const auto D = offset_matrix(model);
  const auto records = sweep_k(model, ClusterMethod::RsjdA, {20}, 6, 123);
  std::uint64_t best_seed = 0;
  double best_density = 2.0;
  for (const auto& r : records)
    if (r.ok && r.scores.density < best_density) {
      best_density = r.scores.density;
      best_seed = r.seed;
    }
  const auto clustering = make_clustering(D, Matrix{}, ClusterMethod::RsjdA, 20, best_seed);

  SolverConfig cfg;
  cfg.alpha = 0.05;
  cfg.objective_trace = false;  // diagnostics excluded from the timing study
  auto mean_time = [&](SolveMethod method, bool inexact) {
    SolverConfig c2 = cfg;
    c2.inexact_admm = inexact;
    const auto results = solve_sequence(model, &clustering, targets, method, c2);
    double total = 0.0;
    for (const auto& r : results) total += r.time_ms;
    return total / static_cast<double>(results.size());
  };

  const double t_holistic = mean_time(SolveMethod::Holistic, false);
  const double t_naive = mean_time(SolveMethod::Naive, false);
  const double t_admm = mean_time(SolveMethod::Admm, true);  // single-sweep x-updates

  const bool ok = t_naive < 0.75 * t_holistic && t_admm < 0.75 * t_holistic;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "mean ms/frame: holistic %.1f, naive %.1f, consensus %.1f",
                t_holistic, t_naive, t_admm);
  report(7, "clustered solvers run under 0.75x holistic time at full scale", ok, detail);
}

// ---------------------------------------------------------------------------
// 8. Threshold adjustment dominance: for the same seed, the adjusted
//    assignment never keeps less mass or less density than the base
//    assignment, checked exactly over 50 runs.
void criterion_8() {
  std::mt19937_64 rng(1008);
  int bad = 0;
  int run = 0;
  while (run < 50) {
    GenSpec spec;
    spec.n = 200;
    spec.m = 12;
    spec.pairs = 6;
    spec.triples = 2;
    spec.quads = 0;
    spec.frames = 0;
    spec.seed = rng();
    const auto model = generate_model(spec);
    const auto D = offset_matrix(model);
    for (int s = 0; s < 5 && run < 50; ++s, ++run) {
      const std::uint64_t seed = rng();
      const auto base = make_clustering(D, Matrix{}, ClusterMethod::Rsjd, 3, seed);
      const auto adj = make_clustering(D, Matrix{}, ClusterMethod::RsjdA, 3, seed);
      const auto sb = score_clustering(D, base);
      const auto sa = score_clustering(D, adj);
      if (!(sa.reconstruction_error <= sb.reconstruction_error &&
            sa.density >= sb.density))
        ++bad;
    }
  }
  report(8, "threshold-adjusted assignment dominates the base assignment in 50/50 runs",
         bad == 0, bad == 0 ? "" : std::to_string(bad) + " violations");
}

// ---------------------------------------------------------------------------
// 9. Feasibility and cardinality: all desk-scale solver outputs stay in
//    [0,1]^m and, at the tuned alpha, mean cardinality lies within the
//    ground-truth mean +/- one standard deviation.
void criterion_9(const DeskStudy& s) {
  bool feasible = true;
  for (const auto* run : {&s.naive, &s.admm})
    for (const auto& r : run->results)
      for (double v : r.w)
        if (v < 0.0 || v > 1.0) feasible = false;

  const bool card_ok =
      s.naive.alpha_found && s.admm.alpha_found &&
      s.naive.metrics.mean_cardinality >= s.band.first &&
      s.naive.metrics.mean_cardinality <= s.band.second &&
      s.admm.metrics.mean_cardinality >= s.band.first &&
      s.admm.metrics.mean_cardinality <= s.band.second;

  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "band [%.2f, %.2f], naive %.2f, consensus %.2f%s", s.band.first,
                s.band.second, s.naive.metrics.mean_cardinality,
                s.admm.metrics.mean_cardinality,
                feasible ? "" : ", INFEASIBLE OUTPUT");
  report(9, "solutions are feasible and cardinality sits in the ground-truth band",
         feasible && card_ok, detail);
}

// ---------------------------------------------------------------------------
// 10. Metric hand cases.
void criterion_10() {
  bool ok = true;
  std::string detail;

  // RMSE: one vertex displaced by (3,0,4) -> 5
  BlendshapeModel m;
  m.n = 1;
  m.m = 1;
  m.neutral = {0, 0, 0};
  m.basis = {3, 0, 4};
  if (std::abs(rmse(m, std::vector<double>{1.0}, std::vector<double>{0, 0, 0}) - 5.0) >
      1e-12) {
    ok = false;
    detail = "rmse hand case";
  }

  // roughness: constant 0, linear ramp 0, spike (0,1,0) -> 4
  if (roughness(std::vector<double>{0.3, 0.3, 0.3, 0.3}) != 0.0 ||
      std::abs(roughness(std::vector<double>{0.0, 0.5, 1.0})) > 1e-15 ||
      std::abs(roughness(std::vector<double>{0, 1, 0}) - 4.0) > 1e-12) {
    ok = false;
    detail = "roughness hand cases";
  }

  // reconstruction error: diagonal clustering of a uniform 2x2 offset matrix
  // discards exactly as much mass as it keeps -> 1.0
  Matrix D(2, 2);
  D(0, 0) = 1.0;
  D(0, 1) = 1.0;
  D(1, 0) = 1.0;
  D(1, 1) = 1.0;
  Clustering c;
  c.K = 2;
  c.mesh_clusters = {{0}, {1}};
  c.ctrl_clusters = {{0}, {1}};
  if (std::abs(reconstruction_error(D, c) - 1.0) > 1e-15) {
    ok = false;
    detail = "reconstruction error hand case";
  }

  report(10, "metric hand cases (RMSE 5, roughness 0/0/4, rejection ratio 1)", ok,
         detail);
}

}  // namespace

int main() {
  std::cout << "kernel backend: " << kernels::backend_name(kernels::active_backend())
            << "\n";
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  const auto desk = make_desk_study();
  criterion_6(desk);
  criterion_7();
  criterion_8();
  criterion_9(desk);
  criterion_10();
  if (g_failures == 0)
    std::cout << "acceptance: all 10 criteria passed\n";
  else
    std::cout << "acceptance: " << g_failures << " criteria FAILED\n";
  return g_failures;
}
