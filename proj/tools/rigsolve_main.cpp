// Command line front end: gen -> cluster -> sweep-k -> solve -> eval.
//
// Exit codes: 0 success, 2 usage error, 3 data/validation error,
// 4 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rigsolve/clustering.hpp"
#include "rigsolve/evaluation.hpp"
#include "rigsolve/io.hpp"
#include "rigsolve/kernels.hpp"
#include "rigsolve/model.hpp"
#include "rigsolve/solvers.hpp"
#include "rigsolve/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rigsolve;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

void write_manifest(const fs::path& out_dir, const std::string& command, const json& fields) {
  json j = fields;
  j["command"] = command;
  j["kernel_backend"] = kernels::backend_name(kernels::active_backend());
  std::ofstream out(out_dir / (command + "_manifest.json"));
  out << j.dump(1) << "\n";
}

std::vector<int> parse_k_range(const std::string& spec) {
  // "4..24" or a single value "8"
  const auto pos = spec.find("..");
  std::vector<int> ks;
  if (pos == std::string::npos) {
    ks.push_back(std::stoi(spec));
    return ks;
  }
  const int lo = std::stoi(spec.substr(0, pos));
  const int hi = std::stoi(spec.substr(pos + 2));
  if (lo > hi) throw ValidationError("empty K range: " + spec);
  for (int k = lo; k <= hi; ++k) ks.push_back(k);
  return ks;
}

struct SolverFlags {
  std::string config_path;
  std::optional<double> alpha, rho, cd_tol, admm_tol, zero_threshold;
  std::optional<int> admm_iters, cd_iters;
  bool inexact_admm = false;
  bool warm_start = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
    cmd->add_option("--alpha", alpha, "sparsity regularizer");
    cmd->add_option("--rho", rho, "ADMM penalty");
    cmd->add_option("--admm-iters", admm_iters);
    cmd->add_option("--cd-iters", cd_iters);
    cmd->add_option("--cd-tol", cd_tol);
    cmd->add_option("--admm-tol", admm_tol);
    cmd->add_option("--zero-threshold", zero_threshold);
    cmd->add_flag("--inexact-admm", inexact_admm, "single CD sweep per x-update");
    cmd->add_flag("--warm-start", warm_start, "carry weights across frames");
  }

  SolverConfig build() const {
    SolverConfig cfg;
    if (!config_path.empty()) cfg = io::load_config(config_path, cfg);
    if (alpha) cfg.alpha = *alpha;
    if (rho) cfg.rho = *rho;
    if (admm_iters) cfg.admm_iters = *admm_iters;
    if (cd_iters) cfg.cd_iters = *cd_iters;
    if (cd_tol) cfg.cd_tol = *cd_tol;
    if (admm_tol) cfg.admm_tol = *admm_tol;
    if (zero_threshold) cfg.zero_threshold = *zero_threshold;
    if (inexact_admm) cfg.inexact_admm = true;
    if (warm_start) cfg.warm_start = true;
    cfg.validate();
    return cfg;
  }
};

int cmd_gen(const GenSpec& spec, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const BlendshapeModel model = generate_model(spec);
  const Matrix weights = generate_animation(model, spec);
  const auto targets = make_targets(model, weights, spec.noise_sigma, spec.seed);

  io::save_model(model, (out_dir / "model.json").string());
  io::save_weights_csv(weights, (out_dir / "weights_true.csv").string());
  if (!targets.empty()) io::save_targets_csv(targets, (out_dir / "targets.csv").string());

  write_manifest(out_dir, "gen",
                 {{"n", spec.n},
                  {"m", spec.m},
                  {"pairs", spec.pairs},
                  {"triples", spec.triples},
                  {"quads", spec.quads},
                  {"locality", spec.effective_locality()},
                  {"frames", spec.frames},
                  {"sparsity", spec.sparsity},
                  {"noise_sigma", spec.noise_sigma},
                  {"seed", spec.seed}});
  std::cout << "wrote model.json, weights_true.csv"
            << (targets.empty() ? "" : ", targets.csv") << " to " << out_dir << "\n";
  return 0;
}

int cmd_cluster(const std::string& model_path, const std::string& method_str, int K,
                std::uint64_t seed, const std::string& segments_path,
                const fs::path& out_dir) {
  const auto method = parse_method(method_str);
  if (!method) {
    std::cerr << "unknown clustering method: " << method_str << "\n";
    return kExitUsage;
  }
  if (*method == ClusterMethod::Ssk && segments_path.empty()) {
    std::cerr << "ssk requires --segments\n";
    return kExitUsage;
  }
  if (*method == ClusterMethod::Sparse && K > 0)
    std::cerr << "warning: sparse clustering fixes K = m; ignoring --k\n";

  const BlendshapeModel model = io::load_model(model_path);
  const Matrix D = offset_matrix(model);
  Matrix delta;
  if (*method == ClusterMethod::Rs) delta = delta_matrix(model);

  std::vector<std::vector<int>> segments;
  if (!segments_path.empty()) segments = io::load_segments(segments_path);

  if (K <= 0 && (*method == ClusterMethod::Rsjd || *method == ClusterMethod::RsjdA ||
                 *method == ClusterMethod::Rs)) {
    std::cerr << method_str << " requires --k\n";
    return kExitUsage;
  }

  const Clustering clustering =
      make_clustering(D, delta, *method, K, seed, segments.empty() ? nullptr : &segments);
  const ClusterScores scores = score_clustering(D, clustering);

  fs::create_directories(out_dir);
  io::save_clustering(clustering, (out_dir / "clustering.json").string());
  write_manifest(out_dir, "cluster",
                 {{"model", model_path},
                  {"method", method_str},
                  {"K", clustering.K},
                  {"seed", seed},
                  {"E_D", scores.density},
                  {"E_ID", scores.inter_density},
                  {"E_R", scores.reconstruction_error}});
  std::cout << "K=" << clustering.K << " E_D=" << scores.density
            << " E_ID=" << scores.inter_density
            << " E_R=" << scores.reconstruction_error << "\n";
  return 0;
}

int cmd_sweep_k(const std::string& model_path, const std::string& method_str,
                const std::string& k_range, int repeats, std::uint64_t seed,
                const std::string& segments_path, const fs::path& out_dir) {
  const auto method = parse_method(method_str);
  if (!method) {
    std::cerr << "unknown clustering method: " << method_str << "\n";
    return kExitUsage;
  }
  if (*method == ClusterMethod::Ssk && segments_path.empty()) {
    std::cerr << "ssk requires --segments\n";
    return kExitUsage;
  }
  const std::vector<int> ks = parse_k_range(k_range);
  const BlendshapeModel model = io::load_model(model_path);
  std::vector<std::vector<int>> segments;
  if (!segments_path.empty()) segments = io::load_segments(segments_path);

  const auto records = sweep_k(model, *method, ks, repeats, seed,
                               segments.empty() ? nullptr : &segments);

  fs::create_directories(out_dir);
  io::save_sweep_csv(records, (out_dir / "sweep.csv").string());
  json manifest = {{"model", model_path}, {"method", method_str},
                   {"k_range", k_range},  {"repeats", repeats},
                   {"seed", seed},        {"records", records.size()}};
  if (const auto knee = knee_suggestion(records)) {
    manifest["suggested_K_heuristic"] = *knee;
    std::cout << "heuristic K suggestion (knee of E_R vs E_D curve): " << *knee << "\n";
  }
  write_manifest(out_dir, "sweep-k", manifest);
  std::cout << records.size() << " records written to " << (out_dir / "sweep.csv") << "\n";
  return 0;
}

int cmd_solve(const std::string& model_path, const std::string& targets_path,
              const std::string& method_str, const std::string& clustering_path,
              const SolverFlags& flags, const fs::path& out_dir) {
  const auto method = parse_solve_method(method_str);
  if (!method) {
    std::cerr << "unknown solve method: " << method_str << "\n";
    return kExitUsage;
  }
  if (*method == SolveMethod::Holistic && !clustering_path.empty())
    std::cerr << "warning: holistic solve ignores --clustering\n";
  if (*method != SolveMethod::Holistic && clustering_path.empty()) {
    std::cerr << method_str << " requires --clustering\n";
    return kExitUsage;
  }

  SolverConfig cfg = flags.build();
  cfg.objective_trace = false;  // traces are never written by this command
  const BlendshapeModel model = io::load_model(model_path);
  const auto targets = io::load_targets_csv(targets_path);

  std::optional<Clustering> clustering;
  if (*method != SolveMethod::Holistic) {
    clustering = io::load_clustering(clustering_path);
    clustering->validate(model.n, model.m, /*allow_empty_mesh=*/true);
  }

  const auto results = solve_sequence(model, clustering ? &*clustering : nullptr,
                                      targets, *method, cfg);

  Matrix weights(results.size(), model.m);
  std::vector<io::FrameRow> rows;
  for (std::size_t t = 0; t < results.size(); ++t) {
    std::copy(results[t].w.begin(), results[t].w.end(), weights.row(t));
    io::FrameRow row;
    row.frame = static_cast<int>(t);
    row.method = method_str;
    row.rmse = rmse(model, results[t].w, targets[t]);
    row.cardinality = cardinality(results[t].w, cfg.zero_threshold);
    row.time_ms = results[t].time_ms;
    row.iters = results[t].iterations;
    row.converged = results[t].converged;
    rows.push_back(row);
  }

  fs::create_directories(out_dir);
  io::save_weights_csv(weights, (out_dir / "weights.csv").string());
  io::save_frame_metrics_csv(rows, (out_dir / "frame_metrics.csv").string());
  write_manifest(out_dir, "solve",
                 {{"model", model_path},
                  {"targets", targets_path},
                  {"method", method_str},
                  {"clustering", clustering_path},
                  {"alpha", cfg.alpha},
                  {"rho", cfg.rho},
                  {"admm_iters", cfg.admm_iters},
                  {"cd_iters", cfg.cd_iters},
                  {"cd_tol", cfg.cd_tol},
                  {"admm_tol", cfg.admm_tol},
                  {"zero_threshold", cfg.zero_threshold},
                  {"inexact_admm", cfg.inexact_admm},
                  {"warm_start", cfg.warm_start},
                  {"frames", results.size()}});
  std::cout << results.size() << " frames solved (" << method_str << ")\n";
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& weights_path,
             const std::string& targets_path, const std::string& ground_truth_path,
             double zero_threshold, const fs::path& out_dir) {
  const BlendshapeModel model = io::load_model(model_path);
  const Matrix weights = io::load_weights_csv(weights_path);
  const auto targets = io::load_targets_csv(targets_path);

  const SequenceMetrics metrics = sequence_metrics(model, weights, targets, zero_threshold);
  if (weights.rows() < 3)
    std::cerr << "note: fewer than 3 frames; roughness omitted\n";

  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "metrics.csv");
    out << std::setprecision(17) << "frame,rmse,cardinality\n";
    for (std::size_t t = 0; t < metrics.frames.size(); ++t)
      out << t << "," << metrics.frames[t].rmse << "," << metrics.frames[t].cardinality
          << "\n";
  }

  json summary = {{"mean_rmse", metrics.mean_rmse},
                  {"max_rmse", metrics.max_rmse},
                  {"mean_cardinality", metrics.mean_cardinality}};
  if (weights.rows() >= 3) {
    summary["total_roughness"] = metrics.total_roughness;
    summary["roughness_per_controller"] = metrics.roughness_per_controller;
  }
  if (!ground_truth_path.empty()) {
    const Matrix gt = io::load_weights_csv(ground_truth_path);
    check(gt.rows() == weights.rows() && gt.cols() == weights.cols(),
          "ground truth dimensions must match the weights");
    double mean_card = 0.0, sq = 0.0;
    for (std::size_t t = 0; t < gt.rows(); ++t) {
      const int c = cardinality(std::span<const double>(gt.row(t), gt.cols()),
                                zero_threshold);
      mean_card += c;
      sq += static_cast<double>(c) * c;
    }
    mean_card /= static_cast<double>(gt.rows());
    const double var = sq / static_cast<double>(gt.rows()) - mean_card * mean_card;
    summary["ground_truth_cardinality_mean"] = mean_card;
    summary["ground_truth_cardinality_std"] = std::sqrt(std::max(0.0, var));
  }
  {
    std::ofstream out(out_dir / "summary.json");
    out << summary.dump(1) << "\n";
  }
  write_manifest(out_dir, "eval",
                 {{"model", model_path},
                  {"weights", weights_path},
                  {"targets", targets_path},
                  {"ground_truth", ground_truth_path},
                  {"zero_threshold", zero_threshold}});
  std::cout << "mean RMSE " << metrics.mean_rmse << ", mean cardinality "
            << metrics.mean_cardinality << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blendshape rig inversion: clustering, scoring and distributed solving"};
  app.require_subcommand(1);

  // gen
  GenSpec spec;
  std::string gen_out = "out";
  auto* gen = app.add_subcommand("gen", "generate a synthetic model and animation");
  gen->add_option("--n", spec.n, "vertex count");
  gen->add_option("--m", spec.m, "controller count");
  gen->add_option("--pairs", spec.pairs);
  gen->add_option("--triples", spec.triples);
  gen->add_option("--quads", spec.quads);
  gen->add_option("--locality", spec.locality, "footprint size (0 = auto)");
  gen->add_option("--frames", spec.frames);
  gen->add_option("--sparsity", spec.sparsity, "expected active controllers per frame");
  gen->add_option("--noise-sigma", spec.noise_sigma, "target noise stddev (cm)");
  gen->add_option("--seed", spec.seed);
  gen->add_option("--out-dir", gen_out);

  // cluster
  std::string cl_model, cl_method = "rsjd", cl_segments, cl_out = "out";
  int cl_k = 0;
  std::uint64_t cl_seed = 0;
  auto* cluster = app.add_subcommand("cluster", "cluster a model and score the result");
  cluster->add_option("--model", cl_model)->required();
  cluster->add_option("--method", cl_method, "rsjd|rsjd_a|rs|sparse|ssk");
  cluster->add_option("--k", cl_k);
  cluster->add_option("--seed", cl_seed);
  cluster->add_option("--segments", cl_segments, "manual segments JSON (ssk)");
  cluster->add_option("--out-dir", cl_out);

  // sweep-k
  std::string sw_model, sw_method = "rsjd", sw_range, sw_segments, sw_out = "out";
  int sw_repeats = 1;
  std::uint64_t sw_seed = 0;
  auto* sweep = app.add_subcommand("sweep-k", "score clusterings over a K range");
  sweep->add_option("--model", sw_model)->required();
  sweep->add_option("--method", sw_method);
  sweep->add_option("--k-range", sw_range, "e.g. 4..24")->required();
  sweep->add_option("--repeats", sw_repeats);
  sweep->add_option("--seed", sw_seed);
  sweep->add_option("--segments", sw_segments);
  sweep->add_option("--out-dir", sw_out);

  // solve
  std::string so_model, so_targets, so_method = "holistic", so_clustering, so_out = "out";
  SolverFlags so_flags;
  auto* solve = app.add_subcommand("solve", "invert the rig per frame");
  solve->add_option("--model", so_model)->required();
  solve->add_option("--targets", so_targets)->required();
  solve->add_option("--method", so_method, "holistic|naive|admm");
  solve->add_option("--clustering", so_clustering);
  solve->add_option("--out-dir", so_out);
  so_flags.attach(solve);

  // eval
  std::string ev_model, ev_weights, ev_targets, ev_gt, ev_out = "out";
  double ev_zero = 1e-6;
  auto* eval = app.add_subcommand("eval", "compute per-frame and aggregate metrics");
  eval->add_option("--model", ev_model)->required();
  eval->add_option("--weights", ev_weights)->required();
  eval->add_option("--targets", ev_targets)->required();
  eval->add_option("--ground-truth", ev_gt);
  eval->add_option("--zero-threshold", ev_zero);
  eval->add_option("--out-dir", ev_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(spec, gen_out);
    if (cluster->parsed())
      return cmd_cluster(cl_model, cl_method, cl_k, cl_seed, cl_segments, cl_out);
    if (sweep->parsed())
      return cmd_sweep_k(sw_model, sw_method, sw_range, sw_repeats, sw_seed, sw_segments,
                         sw_out);
    if (solve->parsed())
      return cmd_solve(so_model, so_targets, so_method, so_clustering, so_flags, so_out);
    if (eval->parsed())
      return cmd_eval(ev_model, ev_weights, ev_targets, ev_gt, ev_zero, ev_out);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
