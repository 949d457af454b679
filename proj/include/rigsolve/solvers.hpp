#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rigsolve/clustering.hpp"
#include "rigsolve/common.hpp"
#include "rigsolve/model.hpp"

namespace rigsolve {

enum class SolveMethod { Holistic, Naive, Admm };

std::string solve_method_name(SolveMethod m);
std::optional<SolveMethod> parse_solve_method(const std::string& s);

struct SolverConfig {
  double alpha = 0.0;                      // sparsity regularizer
  std::vector<double> alpha_per_cluster;   // optional override, length K
  double rho = 1.0;                        // ADMM penalty
  int admm_iters = 30;
  int cd_iters = 50;                       // coordinate sweeps per subproblem
  double cd_tol = 1e-6;                    // max per-sweep coordinate change
  double admm_tol = 1e-4;                  // primal/dual residual threshold
  double zero_threshold = 1e-6;            // cardinality cutoff
  bool randomized_order = false;           // CD sweep order (off: ascending)
  bool inexact_admm = false;               // single CD sweep per x-update
  bool warm_start = false;                 // carry solver state across frames
  bool trace_per_update = false;           // objective trace per coordinate update
                                           // (default: per sweep)
  bool objective_trace = true;             // record objective traces; costs one
                                           // full-model evaluation per ADMM
                                           // iteration, so timing studies turn
                                           // it off

  void validate() const;
  double cluster_alpha(int k) const {
    return alpha_per_cluster.empty() ? alpha : alpha_per_cluster.at(k);
  }
};

// Diagonal multiplicity counts: how many clusters contain each controller.
struct MultiplicityMatrix {
  std::vector<int> diag;  // length m
};

MultiplicityMatrix multiplicity_matrix(const Clustering& clustering, int m);

struct SolveResult {
  std::vector<double> w;
  std::vector<double> objective_trace;
  double time_ms = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct Prox {
  double rho = 0.0;
  double anchor = 0.0;  // (z_tilde - u)_i
};

// Exact minimizer over t in [0,1] of
//   1/2 ||c + t g - target||^2 + alpha t [+ rho/2 (t - anchor)^2]
// where g is the controller gradient at w and c = f(w with w_i = 0).
double coordinate_update(const BlendshapeModel& model, std::span<const double> target,
                         std::span<const double> w, int i, double alpha,
                         const Prox* prox = nullptr);

// Holistic baseline: cyclic coordinate descent on
//   1/2 ||f(w) - target||^2 + alpha 1'w,  0 <= w <= 1, from w = 0.
SolveResult solve_cd(const BlendshapeModel& model, std::span<const double> target,
                     const SolverConfig& config);

// Per-cluster independent solves merged by multiplicity averaging.
SolveResult solve_naive_clustered(const BlendshapeModel& model, const Clustering& clustering,
                                  std::span<const double> target, const SolverConfig& config);

// General form consensus ADMM with the sparsity term dualized into the
// z-update; x-updates are box-constrained coordinate descent with a proximal
// anchor. Returns w = z.
SolveResult admm_solve(const BlendshapeModel& model, const Clustering& clustering,
                       std::span<const double> target, const SolverConfig& config);

// Batch driver over frames. `clustering` may be null for Holistic.
std::vector<SolveResult> solve_sequence(const BlendshapeModel& model,
                                        const Clustering* clustering,
                                        const std::vector<std::vector<double>>& targets,
                                        SolveMethod method, const SolverConfig& config);

}  // namespace rigsolve
