#include "rigsolve/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "rigsolve/kernels.hpp"

namespace rigsolve {

std::string solve_method_name(SolveMethod m) {
  switch (m) {
    case SolveMethod::Holistic: return "holistic";
    case SolveMethod::Naive: return "naive";
    case SolveMethod::Admm: return "admm";
  }
  return "?";
}

std::optional<SolveMethod> parse_solve_method(const std::string& s) {
  if (s == "holistic") return SolveMethod::Holistic;
  if (s == "naive") return SolveMethod::Naive;
  if (s == "admm") return SolveMethod::Admm;
  return std::nullopt;
}

void SolverConfig::validate() const {
  check(alpha >= 0.0, "alpha must be >= 0");
  for (double a : alpha_per_cluster) check(a >= 0.0, "per-cluster alpha must be >= 0");
  check(rho > 0.0, "rho must be > 0");
  check(admm_iters >= 1 && cd_iters >= 1, "iteration limits must be >= 1");
  check(cd_tol > 0.0 && admm_tol > 0.0, "tolerances must be > 0");
  check(zero_threshold > 0.0 && zero_threshold <= 0.01,
        "zero_threshold must lie in (0, 0.01]");
}

MultiplicityMatrix multiplicity_matrix(const Clustering& clustering, int m) {
  MultiplicityMatrix s;
  s.diag.assign(m, 0);
  for (const auto& cc : clustering.ctrl_clusters)
    for (int j : cc) {
      check(j >= 0 && j < m, "controller index out of range");
      ++s.diag[j];
    }
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Coordinate descent core shared by the holistic solver, the per-cluster
// naive solves and the ADMM x-update. Minimizes
//   1/2 ||f(w) - target||^2 + alpha 1'w + rho/2 ||w - anchor||^2
// over the box [0,1]^m, sweeping coordinates cyclically. The residual
// f(w) - target is maintained incrementally: f is affine in each coordinate,
// so an update moves the residual by delta * g.
struct CdCore {
  const BlendshapeModel& model;
  std::span<const double> target;
  double alpha;
  double rho = 0.0;                           // 0: no proximal term
  const std::vector<double>* anchors = nullptr;  // length m when rho > 0

  int max_sweeps = 1;
  double tol = 1e-6;
  bool randomized_order = false;
  bool trace_per_update = false;

  std::vector<double> w;  // in: initial iterate, out: solution
  std::vector<double> trace;
  int sweeps_used = 0;
  bool converged = false;

  void run() {
    const std::size_t d = model.dim();
    const int m = model.m;
    check(target.size() == d, "target length must equal 3n");

    std::vector<double> r = evaluate_rig(model, w);
    for (std::size_t j = 0; j < d; ++j) r[j] -= target[j];

    double obj = 0.5 * kernels::dot(r.data(), r.data(), d) +
                 alpha * std::accumulate(w.begin(), w.end(), 0.0);
    if (rho > 0.0)
      for (int i = 0; i < m; ++i) {
        const double dv = w[i] - (*anchors)[i];
        obj += 0.5 * rho * dv * dv;
      }
    trace.push_back(obj);

    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 order_rng(0);

    std::vector<double> g(d);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      if (randomized_order) std::shuffle(order.begin(), order.end(), order_rng);
      double max_change = 0.0;
      for (int i : order) {
        controller_gradient_into(model, w, i, g);
        double gg, gr;
        kernels::dot2(g.data(), r.data(), d, gg, gr);
        const double anchor = rho > 0.0 ? (*anchors)[i] : 0.0;
        const double denom = gg + rho;
        double t = 0.0;
        if (denom > 0.0)
          t = std::clamp((w[i] * gg - gr - alpha + rho * anchor) / denom, 0.0, 1.0);
        const double delta = t - w[i];
        if (delta != 0.0) {
          obj += delta * gr + 0.5 * delta * delta * gg + alpha * delta;
          if (rho > 0.0)
            obj += 0.5 * rho * ((t - anchor) * (t - anchor) -
                                (w[i] - anchor) * (w[i] - anchor));
          kernels::axpy(delta, g.data(), r.data(), d);
          w[i] = t;
        }
        max_change = std::max(max_change, std::abs(delta));
        if (trace_per_update) trace.push_back(obj);
      }
      if (!trace_per_update) trace.push_back(obj);
      ++sweeps_used;
      if (max_change < tol) {
        converged = true;
        break;
      }
    }
  }
};

// Submodel plus everything a distributed solver needs to talk to the
// global vector.
struct ClusterBlock {
  SubModel sub;
  std::vector<double> target;
  double alpha = 0.0;
};

std::vector<ClusterBlock> build_blocks(const BlendshapeModel& model,
                                       const Clustering& clustering,
                                       std::span<const double> target,
                                       const SolverConfig& config) {
  check(target.size() == model.dim(), "target length must equal 3n");
  if (!config.alpha_per_cluster.empty())
    check(static_cast<int>(config.alpha_per_cluster.size()) == clustering.K,
          "alpha_per_cluster must have K entries");
  clustering.validate(model.n, model.m, /*allow_empty_mesh=*/true);

  std::vector<ClusterBlock> blocks;
  for (int k = 0; k < clustering.K; ++k) {
    if (clustering.mesh_clusters[k].empty() || clustering.ctrl_clusters[k].empty())
      continue;  // nothing to solve; the controllers fall back to 0 or other clusters
    std::vector<int> mesh = clustering.mesh_clusters[k];
    std::vector<int> ctrls = clustering.ctrl_clusters[k];
    std::sort(mesh.begin(), mesh.end());
    std::sort(ctrls.begin(), ctrls.end());
    ClusterBlock b;
    b.sub = restrict_model(model, mesh, ctrls);
    b.target = restrict_vector(mesh, target);
    b.alpha = config.cluster_alpha(k);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

void refresh_targets(std::vector<ClusterBlock>& blocks, std::span<const double> target) {
  for (auto& b : blocks) b.target = restrict_vector(b.sub.mesh_vertices, target);
}

double holistic_objective(const BlendshapeModel& model, std::span<const double> target,
                          const std::vector<double>& w, double alpha) {
  std::vector<double> f = evaluate_rig(model, w);
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double d = f[j] - target[j];
    s += d * d;
  }
  return 0.5 * s + alpha * std::accumulate(w.begin(), w.end(), 0.0);
}

// Per-block CD iterates kept across frames under warm_start.
struct NaiveState {
  std::vector<std::vector<double>> w;
};

SolveResult naive_step(const BlendshapeModel& model, std::vector<ClusterBlock>& blocks,
                       NaiveState& st, std::span<const double> target,
                       const SolverConfig& config) {
  const auto start = Clock::now();
  if (st.w.size() != blocks.size()) {
    st.w.assign(blocks.size(), {});
    for (std::size_t k = 0; k < blocks.size(); ++k)
      st.w[k].assign(blocks[k].sub.model.m, 0.0);
  }

  std::vector<double> sums(model.m, 0.0);
  std::vector<int> counts(model.m, 0);
  int iterations = 0;
  bool converged = true;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& b = blocks[k];
    CdCore core{b.sub.model, b.target, b.alpha};
    core.max_sweeps = config.cd_iters;
    core.tol = config.cd_tol;
    core.randomized_order = config.randomized_order;
    core.w = std::move(st.w[k]);
    core.run();
    st.w[k] = std::move(core.w);
    for (int i = 0; i < b.sub.model.m; ++i) {
      sums[b.sub.controllers[i]] += st.w[k][i];
      ++counts[b.sub.controllers[i]];
    }
    iterations = std::max(iterations, core.sweeps_used);
    converged = converged && core.converged;
  }

  SolveResult res;
  res.w.assign(model.m, 0.0);
  for (int j = 0; j < model.m; ++j)
    if (counts[j] > 0) res.w[j] = sums[j] / counts[j];
  if (config.objective_trace)
    res.objective_trace = {holistic_objective(model, target, res.w, config.alpha)};
  res.iterations = iterations;
  res.converged = converged;
  res.time_ms = elapsed_ms(start);
  return res;
}

// Consensus state carried across frames under warm_start.
struct AdmmState {
  std::vector<double> z;
  std::vector<std::vector<double>> x, u;
};

SolveResult admm_step(const BlendshapeModel& model, std::vector<ClusterBlock>& blocks,
                      AdmmState& st, std::span<const double> target,
                      const SolverConfig& config) {
  const auto start = Clock::now();
  const double rho = config.rho;

  std::vector<int> s_diag(model.m, 0);
  for (const auto& b : blocks)
    for (int j : b.sub.controllers) ++s_diag[j];

  if (st.z.size() != static_cast<std::size_t>(model.m) || st.x.size() != blocks.size()) {
    st.z.assign(model.m, 0.0);
    st.x.assign(blocks.size(), {});
    st.u.assign(blocks.size(), {});
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      st.x[k].assign(blocks[k].sub.model.m, 0.0);
      st.u[k].assign(blocks[k].sub.model.m, 0.0);
    }
  }
  auto& z = st.z;
  auto& x = st.x;
  auto& u = st.u;

  SolveResult res;
  std::vector<double> anchors, sums(model.m), z_new(model.m);
  for (int it = 0; it < config.admm_iters; ++it) {
    // x-update: box-constrained proximal least squares per cluster
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& b = blocks[k];
      anchors.resize(b.sub.model.m);
      for (int i = 0; i < b.sub.model.m; ++i)
        anchors[i] = z[b.sub.controllers[i]] - u[k][i];
      CdCore core{b.sub.model, b.target, /*alpha=*/0.0, rho, &anchors};
      core.max_sweeps = config.inexact_admm ? 1 : config.cd_iters;
      core.tol = config.cd_tol;
      core.randomized_order = config.randomized_order;
      core.w = std::move(x[k]);
      core.run();
      x[k] = std::move(core.w);
    }

    // z-update: consensus averaging with the regularizer's shrinkage
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t k = 0; k < blocks.size(); ++k)
      for (int i = 0; i < blocks[k].sub.model.m; ++i)
        sums[blocks[k].sub.controllers[i]] += x[k][i] + u[k][i];
    for (int j = 0; j < model.m; ++j)
      z_new[j] = s_diag[j] > 0
                     ? std::clamp((sums[j] - config.alpha / rho) / s_diag[j], 0.0, 1.0)
                     : 0.0;

    double primal = 0.0;
    for (std::size_t k = 0; k < blocks.size(); ++k)
      for (int i = 0; i < blocks[k].sub.model.m; ++i)
        primal = std::max(primal,
                          std::abs(x[k][i] - z_new[blocks[k].sub.controllers[i]]));
    double dz = 0.0;
    for (int j = 0; j < model.m; ++j) dz = std::max(dz, std::abs(z_new[j] - z[j]));

    // dual update
    for (std::size_t k = 0; k < blocks.size(); ++k)
      for (int i = 0; i < blocks[k].sub.model.m; ++i)
        u[k][i] += x[k][i] - z_new[blocks[k].sub.controllers[i]];

    z = z_new;
    if (config.objective_trace)
      res.objective_trace.push_back(holistic_objective(model, target, z, config.alpha));
    res.iterations = it + 1;
    if (std::max(primal, dz) < config.admm_tol) {
      res.converged = true;
      break;
    }
  }

  res.w = z;
  res.time_ms = elapsed_ms(start);
  return res;
}

}  // namespace

double coordinate_update(const BlendshapeModel& model, std::span<const double> target,
                         std::span<const double> w, int i, double alpha,
                         const Prox* prox) {
  const std::size_t d = model.dim();
  check(target.size() == d, "target length must equal 3n");
  check(i >= 0 && i < model.m, "controller index out of range");

  std::vector<double> g = controller_gradient(model, w, i);
  std::vector<double> r = evaluate_rig(model, w);
  for (std::size_t j = 0; j < d; ++j) r[j] -= target[j];

  double gg, gr;
  kernels::dot2(g.data(), r.data(), d, gg, gr);
  const double rho = prox ? prox->rho : 0.0;
  const double anchor = prox ? prox->anchor : 0.0;
  const double denom = gg + rho;
  if (denom <= 0.0) return 0.0;
  return std::clamp((w[i] * gg - gr - alpha + rho * anchor) / denom, 0.0, 1.0);
}

namespace {
SolveResult solve_cd_from(const BlendshapeModel& model, std::span<const double> target,
                          const SolverConfig& config, std::vector<double> w0) {
  config.validate();
  const auto start = Clock::now();

  CdCore core{model, target, config.alpha};
  core.max_sweeps = config.cd_iters;
  core.tol = config.cd_tol;
  core.randomized_order = config.randomized_order;
  core.trace_per_update = config.trace_per_update;
  core.w = std::move(w0);
  core.run();

  SolveResult res;
  res.w = std::move(core.w);
  res.objective_trace = std::move(core.trace);
  res.iterations = core.sweeps_used;
  res.converged = core.converged;
  res.time_ms = elapsed_ms(start);
  return res;
}
}  // namespace

SolveResult solve_cd(const BlendshapeModel& model, std::span<const double> target,
                     const SolverConfig& config) {
  return solve_cd_from(model, target, config, std::vector<double>(model.m, 0.0));
}

SolveResult solve_naive_clustered(const BlendshapeModel& model, const Clustering& clustering,
                                  std::span<const double> target,
                                  const SolverConfig& config) {
  config.validate();
  auto blocks = build_blocks(model, clustering, target, config);
  NaiveState st;
  return naive_step(model, blocks, st, target, config);
}

SolveResult admm_solve(const BlendshapeModel& model, const Clustering& clustering,
                       std::span<const double> target, const SolverConfig& config) {
  config.validate();
  auto blocks = build_blocks(model, clustering, target, config);
  AdmmState st;
  return admm_step(model, blocks, st, target, config);
}

std::vector<SolveResult> solve_sequence(const BlendshapeModel& model,
                                        const Clustering* clustering,
                                        const std::vector<std::vector<double>>& targets,
                                        SolveMethod method, const SolverConfig& config) {
  config.validate();
  if (method != SolveMethod::Holistic)
    check(clustering != nullptr, "clustered methods require a clustering");
  for (const auto& t : targets)
    check(t.size() == model.dim(), "all targets must have length 3n");

  std::vector<SolveResult> results;
  results.reserve(targets.size());

  if (method == SolveMethod::Holistic) {
    std::vector<double> prev;
    for (const auto& t : targets) {
      if (config.warm_start && !prev.empty())
        results.push_back(solve_cd_from(model, t, config, prev));
      else
        results.push_back(solve_cd(model, t, config));
      if (config.warm_start) prev = results.back().w;
    }
    return results;
  }

  // Clustered methods: restrict the model once, refresh per-frame targets in
  // place. Under warm_start the solver state (CD iterates, consensus z/x/u)
  // carries across frames; otherwise it is reset each frame.
  std::vector<ClusterBlock> blocks;
  NaiveState naive_st;
  AdmmState admm_st;
  for (const auto& t : targets) {
    if (blocks.empty() && !targets.empty())
      blocks = build_blocks(model, *clustering, t, config);
    else
      refresh_targets(blocks, t);
    if (!config.warm_start) {
      naive_st = NaiveState{};
      admm_st = AdmmState{};
    }
    if (method == SolveMethod::Naive)
      results.push_back(naive_step(model, blocks, naive_st, t, config));
    else
      results.push_back(admm_step(model, blocks, admm_st, t, config));
  }
  return results;
}

}  // namespace rigsolve
