#include "rigsolve/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace rigsolve {

double rmse(const BlendshapeModel& model, std::span<const double> w,
            std::span<const double> target) {
  check(target.size() == model.dim(), "target length must equal 3n");
  const std::vector<double> f = evaluate_rig(model, w);
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double d = f[j] - target[j];
    s += d * d;
  }
  return std::sqrt(s / model.n);
}

int cardinality(std::span<const double> w, double zero_threshold) {
  int count = 0;
  for (double v : w)
    if (std::abs(v) > zero_threshold) ++count;
  return count;
}

double roughness(std::span<const double> curve) {
  check(curve.size() >= 3, "roughness requires at least 3 frames");
  double s = 0.0;
  for (std::size_t t = 1; t + 1 < curve.size(); ++t) {
    const double d2 = curve[t - 1] - 2.0 * curve[t] + curve[t + 1];
    s += d2 * d2;
  }
  return s;
}

SequenceMetrics sequence_metrics(const BlendshapeModel& model, const Matrix& weights,
                                 const std::vector<std::vector<double>>& targets,
                                 double zero_threshold,
                                 const std::vector<double>* times_ms) {
  const std::size_t T = weights.rows();
  check(weights.cols() == static_cast<std::size_t>(model.m),
        "weight rows must have m entries");
  check(targets.size() == T, "one target per frame required");
  if (times_ms) check(times_ms->size() == T, "one time entry per frame required");

  SequenceMetrics out;
  out.frames.resize(T);
  double card_sum = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    std::span<const double> w(weights.row(t), weights.cols());
    FrameMetrics& fm = out.frames[t];
    fm.rmse = rmse(model, w, targets[t]);
    fm.cardinality = cardinality(w, zero_threshold);
    fm.time_ms = times_ms ? (*times_ms)[t] : 0.0;
    out.mean_rmse += fm.rmse;
    out.max_rmse = std::max(out.max_rmse, fm.rmse);
    card_sum += fm.cardinality;
  }
  if (T > 0) {
    out.mean_rmse /= static_cast<double>(T);
    out.mean_cardinality = card_sum / static_cast<double>(T);
  }

  if (T >= 3) {
    out.roughness_per_controller.resize(model.m);
    std::vector<double> curve(T);
    for (int i = 0; i < model.m; ++i) {
      for (std::size_t t = 0; t < T; ++t) curve[t] = weights(t, i);
      out.roughness_per_controller[i] = roughness(curve);
      out.total_roughness += out.roughness_per_controller[i];
    }
  }
  return out;
}

TradeoffTable tradeoff_table(const BlendshapeModel& model, const Clustering* clustering,
                             const std::vector<std::vector<double>>& targets,
                             SolveMethod method, const std::vector<double>& alpha_grid,
                             const SolverConfig& config,
                             std::optional<std::pair<double, double>> cardinality_band) {
  check(!alpha_grid.empty(), "alpha grid must be nonempty");
  TradeoffTable table;
  for (double alpha : alpha_grid) {
    SolverConfig cfg = config;
    cfg.alpha = alpha;
    const auto results = solve_sequence(model, clustering, targets, method, cfg);

    TradeoffRow row;
    row.alpha = alpha;
    for (std::size_t t = 0; t < results.size(); ++t) {
      const double e = rmse(model, results[t].w, targets[t]);
      row.mean_rmse += e;
      row.max_rmse = std::max(row.max_rmse, e);
      row.mean_cardinality += cardinality(results[t].w, cfg.zero_threshold);
      row.mean_time_ms += results[t].time_ms;
    }
    if (!results.empty()) {
      const double inv = 1.0 / static_cast<double>(results.size());
      row.mean_rmse *= inv;
      row.mean_cardinality *= inv;
      row.mean_time_ms *= inv;
    }
    table.rows.push_back(row);
  }

  if (cardinality_band) {
    // smallest alpha on the grid whose mean cardinality reaches the band
    std::vector<const TradeoffRow*> by_alpha;
    for (const auto& r : table.rows) by_alpha.push_back(&r);
    std::sort(by_alpha.begin(), by_alpha.end(),
              [](auto* a, auto* b) { return a->alpha < b->alpha; });
    for (const auto* r : by_alpha)
      if (r->mean_cardinality <= cardinality_band->second) {
        table.alpha_star = r->alpha;
        break;
      }
  }
  return table;
}

}  // namespace rigsolve
