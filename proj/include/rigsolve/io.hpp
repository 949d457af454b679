#pragma once

#include <string>
#include <vector>

#include "rigsolve/clustering.hpp"
#include "rigsolve/common.hpp"
#include "rigsolve/evaluation.hpp"
#include "rigsolve/model.hpp"
#include "rigsolve/solvers.hpp"

namespace rigsolve::io {

// Model JSON: {n, m, neutral: [3n], blendshapes: [m][3n],
// correctives: [{ids, offset}]}. Coordinates in centimeters, vertex layout
// [x0,y0,z0, x1,y1,z1, ...].
BlendshapeModel load_model(const std::string& path);
void save_model(const BlendshapeModel& model, const std::string& path);

// Clustering JSON: {K, mesh_clusters, ctrl_clusters, method, seed}.
Clustering load_clustering(const std::string& path);
void save_clustering(const Clustering& clustering, const std::string& path);

// Manual segments: JSON list of vertex index lists.
std::vector<std::vector<int>> load_segments(const std::string& path);

// Solver config JSON mirroring SolverConfig; absent fields keep defaults.
SolverConfig load_config(const std::string& path, SolverConfig base = {});

// Weights CSV: header w0..w{m-1}, one row per frame.
Matrix load_weights_csv(const std::string& path);
void save_weights_csv(const Matrix& weights, const std::string& path);

// Targets CSV: header c0..c{3n-1}, one row per frame.
std::vector<std::vector<double>> load_targets_csv(const std::string& path);
void save_targets_csv(const std::vector<std::vector<double>>& targets,
                      const std::string& path);

// Sweep CSV: method,K,seed,E_D,E_ID,E_R (failed runs carry an error column).
void save_sweep_csv(const std::vector<SweepRecord>& records, const std::string& path);

// Per-frame results CSV: frame,method,rmse,cardinality,time_ms,iters,converged.
struct FrameRow {
  int frame = 0;
  std::string method;
  double rmse = 0.0;
  int cardinality = 0;
  double time_ms = 0.0;
  int iters = 0;
  bool converged = false;
};
void save_frame_metrics_csv(const std::vector<FrameRow>& rows, const std::string& path);

void save_tradeoff_csv(const TradeoffTable& table, const std::string& path);

}  // namespace rigsolve::io
