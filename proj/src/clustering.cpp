#include "rigsolve/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>

#include "rigsolve/kernels.hpp"

namespace rigsolve {

std::string method_name(ClusterMethod m) {
  switch (m) {
    case ClusterMethod::Rsjd: return "rsjd";
    case ClusterMethod::RsjdA: return "rsjd_a";
    case ClusterMethod::Rs: return "rs";
    case ClusterMethod::Sparse: return "sparse";
    case ClusterMethod::Ssk: return "ssk";
  }
  return "?";
}

std::optional<ClusterMethod> parse_method(const std::string& s) {
  if (s == "rsjd") return ClusterMethod::Rsjd;
  if (s == "rsjd_a") return ClusterMethod::RsjdA;
  if (s == "rs") return ClusterMethod::Rs;
  if (s == "sparse") return ClusterMethod::Sparse;
  if (s == "ssk") return ClusterMethod::Ssk;
  return std::nullopt;
}

void Clustering::validate(int n, int m, bool allow_empty_mesh) const {
  check(K == static_cast<int>(mesh_clusters.size()) &&
            K == static_cast<int>(ctrl_clusters.size()),
        "clustering must have K mesh clusters and K controller clusters");
  std::vector<char> seen(n, 0);
  for (const auto& mc : mesh_clusters) {
    if (!allow_empty_mesh) check(!mc.empty(), "empty mesh cluster");
    for (int v : mc) {
      check(v >= 0 && v < n, "vertex index out of range");
      check(!seen[v], "vertex assigned to two mesh clusters");
      seen[v] = 1;
    }
  }
  check(std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; }),
        "mesh clusters must cover all vertices");
  for (const auto& cc : ctrl_clusters) {
    std::vector<char> in(m, 0);
    for (int j : cc) {
      check(j >= 0 && j < m, "controller index out of range");
      check(!in[j], "controller repeated within one cluster");
      in[j] = 1;
    }
  }
}

std::vector<int> kmeans(const Matrix& rows, int K, std::uint64_t seed) {
  const int R = static_cast<int>(rows.rows());
  const std::size_t d = rows.cols();
  check(K >= 1 && K <= R, "K must be in [1, #rows]");

  std::mt19937_64 rng(seed);
  Matrix centroids(K, d);

  // k-means++ seeding
  {
    std::uniform_int_distribution<int> pick(0, R - 1);
    int first = pick(rng);
    std::memcpy(centroids.row(0), rows.row(first), d * sizeof(double));
    std::vector<double> best(R);
    for (int r = 0; r < R; ++r)
      best[r] = kernels::squared_distance(rows.row(r), centroids.row(0), d);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 1; k < K; ++k) {
      double total = std::accumulate(best.begin(), best.end(), 0.0);
      int chosen;
      if (total <= 0.0) {
        chosen = pick(rng);
      } else {
        double target = unit(rng) * total;
        double cum = 0.0;
        chosen = R - 1;
        for (int r = 0; r < R; ++r) {
          cum += best[r];
          if (cum >= target) {
            chosen = r;
            break;
          }
        }
      }
      std::memcpy(centroids.row(k), rows.row(chosen), d * sizeof(double));
      for (int r = 0; r < R; ++r)
        best[r] = std::min(best[r],
                           kernels::squared_distance(rows.row(r), centroids.row(k), d));
    }
  }

  std::vector<int> labels(R, -1), prev(R, -2);
  std::vector<int> counts(K);
  for (int iter = 0; iter < 300; ++iter) {
    // assignment (ties go to the lowest index)
    for (int r = 0; r < R; ++r) {
      int best_k = 0;
      double best_d = kernels::squared_distance(rows.row(r), centroids.row(0), d);
      for (int k = 1; k < K; ++k) {
        const double dd = kernels::squared_distance(rows.row(r), centroids.row(k), d);
        if (dd < best_d) {
          best_d = dd;
          best_k = k;
        }
      }
      labels[r] = best_k;
    }

    // repair empty clusters: seize the point farthest from its centroid
    std::fill(counts.begin(), counts.end(), 0);
    for (int r = 0; r < R; ++r) ++counts[labels[r]];
    for (int k = 0; k < K; ++k) {
      if (counts[k] > 0) continue;
      int far = -1;
      double far_d = -1.0;
      for (int r = 0; r < R; ++r) {
        if (counts[labels[r]] <= 1) continue;  // do not empty another cluster
        const double dd =
            kernels::squared_distance(rows.row(r), centroids.row(labels[r]), d);
        if (dd > far_d) {
          far_d = dd;
          far = r;
        }
      }
      check(far >= 0, "cannot repair empty cluster");
      --counts[labels[far]];
      labels[far] = k;
      counts[k] = 1;
    }

    if (labels == prev) break;
    prev = labels;

    // centroid update
    std::fill(centroids.data().begin(), centroids.data().end(), 0.0);
    for (int r = 0; r < R; ++r)
      kernels::axpy(1.0, rows.row(r), centroids.row(labels[r]), d);
    for (int k = 0; k < K; ++k) {
      const double inv = 1.0 / counts[k];
      double* c = centroids.row(k);
      for (std::size_t j = 0; j < d; ++j) c[j] *= inv;
    }
  }
  return labels;
}

namespace {
std::vector<std::vector<int>> labels_to_clusters(const std::vector<int>& labels, int K) {
  std::vector<std::vector<int>> clusters(K);
  for (std::size_t r = 0; r < labels.size(); ++r)
    clusters[labels[r]].push_back(static_cast<int>(r));
  return clusters;
}
}  // namespace

std::vector<std::vector<int>> segment_mesh_rsjd(const Matrix& D, int K, std::uint64_t seed) {
  return labels_to_clusters(kmeans(D, K, seed), K);
}

std::vector<std::vector<int>> segment_mesh_rs(const Matrix& delta, int K, std::uint64_t seed) {
  return labels_to_clusters(kmeans(delta, K, seed), K);
}

std::vector<std::vector<int>> assign_controllers_rsjd(
    const Matrix& D, const std::vector<std::vector<int>>& mesh_clusters) {
  const int K = static_cast<int>(mesh_clusters.size());
  const int m = static_cast<int>(D.cols());
  std::vector<std::vector<int>> ctrl(K);

  std::vector<double> h(K);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < K; ++k) {
      check(!mesh_clusters[k].empty(), "empty mesh cluster in controller assignment");
      double s = 0.0;
      for (int l : mesh_clusters[k]) s += D(l, i);
      h[k] = s / mesh_clusters[k].size();
    }

    if (K == 1) {
      ctrl[0].push_back(i);
      continue;
    }

    const auto [mn, mx] = std::minmax_element(h.begin(), h.end());
    if (*mn == *mx) {
      // degenerate tie (includes all-zero columns): keep the controller everywhere
      if (*mx == 0.0)
        std::cerr << "[rigsolve] controller " << i
                  << " is inactive (zero offsets); assigned to all clusters\n";
      for (int k = 0; k < K; ++k) ctrl[k].push_back(i);
      continue;
    }

    // exact 2-means on K scalars: optimal split is contiguous in sorted order
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return h[a] < h[b]; });
    std::vector<double> prefix(K + 1, 0.0), prefix2(K + 1, 0.0);
    for (int k = 0; k < K; ++k) {
      prefix[k + 1] = prefix[k] + h[order[k]];
      prefix2[k + 1] = prefix2[k] + h[order[k]] * h[order[k]];
    }
    int best_split = 1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int s = 1; s < K; ++s) {
      const double lo_n = s, hi_n = K - s;
      const double lo_cost = prefix2[s] - prefix[s] * prefix[s] / lo_n;
      const double hi_cost = (prefix2[K] - prefix2[s]) -
                             (prefix[K] - prefix[s]) * (prefix[K] - prefix[s]) / hi_n;
      const double cost = lo_cost + hi_cost;
      if (cost < best_cost) {
        best_cost = cost;
        best_split = s;
      }
    }
    for (int k = best_split; k < K; ++k) ctrl[order[k]].push_back(i);
  }
  for (auto& c : ctrl) std::sort(c.begin(), c.end());
  return ctrl;
}

Clustering adjust_assignment_rsjd_a(const Matrix& D, const Clustering& clustering) {
  const int m = static_cast<int>(D.cols());
  Clustering out = clustering;
  out.method = "rsjd_a";
  for (int k = 0; k < out.K; ++k) {
    const auto& mesh = out.mesh_clusters[k];
    auto& ctrls = out.ctrl_clusters[k];
    if (ctrls.empty()) {
      std::cerr << "[rigsolve] cluster " << k
                << " has no assigned controllers; threshold undefined, skipped\n";
      continue;
    }
    std::vector<double> mass(m, 0.0);
    for (int l : mesh)
      for (int j = 0; j < m; ++j) mass[j] += D(l, j);

    double threshold = std::numeric_limits<double>::infinity();
    std::vector<char> assigned(m, 0);
    for (int j : ctrls) {
      assigned[j] = 1;
      threshold = std::min(threshold, mass[j]);
    }
    for (int j = 0; j < m; ++j)
      if (!assigned[j] && mass[j] > threshold) ctrls.push_back(j);
    std::sort(ctrls.begin(), ctrls.end());
  }
  return out;
}

std::vector<std::vector<int>> assign_controllers_ssk(
    const Matrix& D, const std::vector<std::vector<int>>& manual_segments) {
  const int K = static_cast<int>(manual_segments.size());
  const int m = static_cast<int>(D.cols());
  check(K >= 1, "segments must be nonempty");
  std::vector<std::vector<int>> ctrl(K);

  std::vector<double> s(K);
  for (int i = 0; i < m; ++i) {
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      double sk = 0.0;
      for (int l : manual_segments[k]) sk += D(l, i);
      s[k] = sk;
      total += sk;
    }
    if (total == 0.0) {
      std::cerr << "[rigsolve] controller " << i
                << " is inert (zero total offset); assigned to segment 0\n";
      ctrl[0].push_back(i);
      continue;
    }
    int target = -1;
    for (int k = 0; k < K; ++k)
      if (s[k] > total / 2.0) {
        target = k;
        break;
      }
    if (target < 0)
      target = static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
    ctrl[target].push_back(i);
  }
  return ctrl;
}

Clustering sparse_clustering(const Matrix& D) {
  const int n = static_cast<int>(D.rows());
  const int m = static_cast<int>(D.cols());
  Clustering c;
  c.K = m;
  c.method = "sparse";
  c.mesh_clusters.resize(m);
  c.ctrl_clusters.resize(m);
  for (int k = 0; k < m; ++k) c.ctrl_clusters[k] = {k};
  for (int l = 0; l < n; ++l) {
    const double* row = D.row(l);
    int arg = static_cast<int>(std::max_element(row, row + m) - row);
    c.mesh_clusters[arg].push_back(l);
  }
  return c;
}

double density(const Clustering& clustering, int n, int m) {
  long long edges = 0;
  for (int k = 0; k < clustering.K; ++k)
    edges += static_cast<long long>(clustering.mesh_clusters[k].size()) *
             static_cast<long long>(clustering.ctrl_clusters[k].size());
  return static_cast<double>(edges) / (static_cast<double>(n) * m);
}

double inter_density(const Clustering& clustering, int n, int m) {
  std::vector<int> multiplicity(m, 0);
  for (const auto& cc : clustering.ctrl_clusters)
    for (int j : cc) ++multiplicity[j];
  long long shared = 0;
  for (int k = 0; k < clustering.K; ++k) {
    const long long nk = static_cast<long long>(clustering.mesh_clusters[k].size());
    for (int j : clustering.ctrl_clusters[k])
      if (multiplicity[j] >= 2) shared += nk;
  }
  return static_cast<double>(shared) / (static_cast<double>(n) * m);
}

double reconstruction_error(const Matrix& D, const Clustering& clustering) {
  const int m = static_cast<int>(D.cols());
  double kept = 0.0, rejected = 0.0;
  for (int k = 0; k < clustering.K; ++k) {
    const auto& ctrls = clustering.ctrl_clusters[k];
    for (int l : clustering.mesh_clusters[k]) {
      double row_total = 0.0;
      const double* row = D.row(l);
      for (int j = 0; j < m; ++j) row_total += row[j];
      double row_kept = 0.0;
      for (int j : ctrls) row_kept += row[j];
      kept += row_kept;
      rejected += row_total - row_kept;
    }
  }
  if (kept == 0.0) throw NumericalError("degenerate clustering: no blendshape mass kept");
  return rejected / kept;
}

ClusterScores score_clustering(const Matrix& D, const Clustering& clustering) {
  const int n = static_cast<int>(D.rows());
  const int m = static_cast<int>(D.cols());
  ClusterScores s;
  s.density = density(clustering, n, m);
  s.inter_density = inter_density(clustering, n, m);
  s.reconstruction_error = reconstruction_error(D, clustering);
  return s;
}

Clustering make_clustering(const Matrix& D, const Matrix& delta, ClusterMethod method,
                           int K, std::uint64_t seed,
                           const std::vector<std::vector<int>>* segments) {
  Clustering c;
  c.seed = seed;
  c.method = method_name(method);
  switch (method) {
    case ClusterMethod::Rsjd:
    case ClusterMethod::RsjdA: {
      c.K = K;
      c.mesh_clusters = segment_mesh_rsjd(D, K, seed);
      c.ctrl_clusters = assign_controllers_rsjd(D, c.mesh_clusters);
      if (method == ClusterMethod::RsjdA) c = adjust_assignment_rsjd_a(D, c);
      c.seed = seed;
      break;
    }
    case ClusterMethod::Rs: {
      check(delta.rows() == D.rows(), "delta matrix required for rs");
      c.K = K;
      c.mesh_clusters = segment_mesh_rs(delta, K, seed);
      c.ctrl_clusters = assign_controllers_rsjd(D, c.mesh_clusters);
      break;
    }
    case ClusterMethod::Sparse:
      c = sparse_clustering(D);
      c.seed = seed;
      break;
    case ClusterMethod::Ssk: {
      check(segments != nullptr && !segments->empty(), "ssk requires manual segments");
      c.K = static_cast<int>(segments->size());
      c.mesh_clusters = *segments;
      for (auto& mc : c.mesh_clusters) std::sort(mc.begin(), mc.end());
      c.ctrl_clusters = assign_controllers_ssk(D, c.mesh_clusters);
      break;
    }
  }
  return c;
}

namespace {
std::uint64_t mix_seed(std::uint64_t seed, int k, int repeat) {
  // splitmix64 over a distinct per-(K, repeat) input
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(k) * 4096 +
                                                    static_cast<std::uint64_t>(repeat) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace

std::vector<SweepRecord> sweep_k(const BlendshapeModel& model, ClusterMethod method,
                                 const std::vector<int>& k_values, int repeats,
                                 std::uint64_t seed,
                                 const std::vector<std::vector<int>>* segments) {
  const Matrix D = offset_matrix(model);
  Matrix delta;
  if (method == ClusterMethod::Rs) delta = delta_matrix(model);

  std::vector<SweepRecord> records;
  auto run_one = [&](int K, std::uint64_t run_seed) {
    SweepRecord rec;
    rec.method = method_name(method);
    rec.K = K;
    rec.seed = run_seed;
    try {
      Clustering c = make_clustering(D, delta, method, K, run_seed, segments);
      rec.scores = score_clustering(D, c);
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    records.push_back(std::move(rec));
  };

  if (method == ClusterMethod::Sparse) {
    run_one(model.m, seed);
    return records;
  }
  if (method == ClusterMethod::Ssk) {
    run_one(segments ? static_cast<int>(segments->size()) : 0, seed);
    return records;
  }

  check(!k_values.empty(), "k sweep requires at least one K");
  for (int K : k_values)
    for (int r = 0; r < repeats; ++r) run_one(K, mix_seed(seed, K, r));
  return records;
}

std::optional<int> knee_suggestion(const std::vector<SweepRecord>& records) {
  std::vector<const SweepRecord*> ok;
  for (const auto& r : records)
    if (r.ok) ok.push_back(&r);
  if (ok.size() < 3) return std::nullopt;

  auto x = [](const SweepRecord* r) { return r->scores.density; };
  auto y = [](const SweepRecord* r) { return r->scores.reconstruction_error; };
  const SweepRecord* lo = *std::min_element(ok.begin(), ok.end(),
      [&](auto* a, auto* b) { return x(a) < x(b); });
  const SweepRecord* hi = *std::max_element(ok.begin(), ok.end(),
      [&](auto* a, auto* b) { return x(a) < x(b); });
  const double dx = x(hi) - x(lo), dy = y(hi) - y(lo);
  const double len = std::hypot(dx, dy);
  if (len == 0.0) return std::nullopt;

  const SweepRecord* best = nullptr;
  double best_dist = -1.0;
  for (auto* r : ok) {
    const double dist = std::abs(dx * (y(r) - y(lo)) - dy * (x(r) - x(lo))) / len;
    if (dist > best_dist) {
      best_dist = dist;
      best = r;
    }
  }
  return best ? std::optional<int>(best->K) : std::nullopt;
}

}  // namespace rigsolve
