#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rigsolve/common.hpp"
#include "rigsolve/model.hpp"
#include "rigsolve/solvers.hpp"

namespace rigsolve {

struct FrameMetrics {
  double rmse = 0.0;   // cm
  int cardinality = 0;
  double time_ms = 0.0;
};

struct SequenceMetrics {
  std::vector<FrameMetrics> frames;
  std::vector<double> roughness_per_controller;  // empty when T < 3
  double mean_rmse = 0.0;
  double max_rmse = 0.0;
  double mean_cardinality = 0.0;
  double total_roughness = 0.0;
};

// sqrt(||f(w) - target||^2 / n) against the FULL model; the divisor is the
// vertex count n, not 3n.
double rmse(const BlendshapeModel& model, std::span<const double> w,
            std::span<const double> target);

int cardinality(std::span<const double> w, double zero_threshold);

// Sum of squared second-order differences of one controller's curve.
// Requires at least 3 frames.
double roughness(std::span<const double> curve);

// weights: one row per frame (T x m). Roughness fields are filled only for
// T >= 3.
SequenceMetrics sequence_metrics(const BlendshapeModel& model, const Matrix& weights,
                                 const std::vector<std::vector<double>>& targets,
                                 double zero_threshold,
                                 const std::vector<double>* times_ms = nullptr);

struct TradeoffRow {
  double alpha = 0.0;
  double mean_rmse = 0.0;
  double max_rmse = 0.0;
  double mean_cardinality = 0.0;
  double mean_time_ms = 0.0;
};

struct TradeoffTable {
  std::vector<TradeoffRow> rows;  // one per alpha, in grid order
  // Smallest grid alpha whose mean cardinality drops to or below the upper
  // edge of the reference band.
  std::optional<double> alpha_star;
};

// Solves the whole sequence once per alpha and reports aggregate metrics.
// `cardinality_band` is (lower, upper), e.g. ground-truth mean -/+ one std.
TradeoffTable tradeoff_table(const BlendshapeModel& model, const Clustering* clustering,
                             const std::vector<std::vector<double>>& targets,
                             SolveMethod method, const std::vector<double>& alpha_grid,
                             const SolverConfig& config,
                             std::optional<std::pair<double, double>> cardinality_band =
                                 std::nullopt);

}  // namespace rigsolve
