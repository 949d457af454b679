#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rigsolve/common.hpp"
#include "rigsolve/model.hpp"

namespace rigsolve {

enum class ClusterMethod { Rsjd, RsjdA, Rs, Sparse, Ssk };

std::string method_name(ClusterMethod m);
std::optional<ClusterMethod> parse_method(const std::string& s);

// A co-clustering of the model: mesh clusters partition the vertices,
// controller clusters may overlap (a controller can live in several clusters
// or in none). Together they define the bipartite vertex-controller graph
// whose edges are the retained matrix entries.
struct Clustering {
  int K = 0;
  std::vector<std::vector<int>> mesh_clusters;  // sorted vertex indices
  std::vector<std::vector<int>> ctrl_clusters;  // sorted controller indices
  std::string method;
  std::uint64_t seed = 0;

  // Throws ValidationError unless mesh clusters partition {0..n-1}
  // (Sparse is the one method allowed empty mesh clusters) and controller
  // indices are in range.
  void validate(int n, int m, bool allow_empty_mesh = false) const;
};

struct ClusterScores {
  double density = 0.0;               // E_D
  double inter_density = 0.0;         // E_ID
  double reconstruction_error = 0.0;  // E_R
};

struct SweepRecord {
  std::string method;
  int K = 0;
  std::uint64_t seed = 0;
  ClusterScores scores;
  bool ok = true;
  std::string error;
};

// Lloyd's algorithm from a k-means++ seeded start; runs to assignment
// fixpoint or 300 iterations. An emptied cluster is re-seeded at the point
// farthest from its assigned centroid, so every returned label occurs.
std::vector<int> kmeans(const Matrix& rows, int K, std::uint64_t seed);

// Mesh segmentation: k-means over the rows of the offset matrix D (RSJD)
// or of the rearranged matrix Delta (RS).
std::vector<std::vector<int>> segment_mesh_rsjd(const Matrix& D, int K, std::uint64_t seed);
std::vector<std::vector<int>> segment_mesh_rs(const Matrix& delta, int K, std::uint64_t seed);

// For each controller, compress its D column into per-cluster mean offsets,
// split those K scalars in two by 2-means, and assign the controller to every
// cluster on the high side. All-equal entries assign to all clusters.
std::vector<std::vector<int>> assign_controllers_rsjd(
    const Matrix& D, const std::vector<std::vector<int>>& mesh_clusters);

// Threshold adjustment: within each cluster, any unassigned controller whose
// deformation mass (strictly) exceeds the smallest mass among the assigned
// ones is pulled in. Output controller sets are supersets of the input's.
Clustering adjust_assignment_rsjd_a(const Matrix& D, const Clustering& clustering);

// Majority assignment over manually painted segments: controller goes to the
// unique segment holding more than half its deformation mass; with no
// majority, to the argmax segment. At most one cluster per controller.
std::vector<std::vector<int>> assign_controllers_ssk(
    const Matrix& D, const std::vector<std::vector<int>>& manual_segments);

// K = m; each vertex joins the controller producing its largest offset.
// Mesh clusters may be empty here (dropped before solving).
Clustering sparse_clustering(const Matrix& D);

double density(const Clustering& clustering, int n, int m);
double inter_density(const Clustering& clustering, int n, int m);
// Ratio of blendshape mass discarded by the clustering to the mass kept.
// Throws NumericalError if the clustering keeps no mass.
double reconstruction_error(const Matrix& D, const Clustering& clustering);

ClusterScores score_clustering(const Matrix& D, const Clustering& clustering);

// One full clustering run (segment + assign) for any method.
// `segments` is required for Ssk and ignored otherwise.
Clustering make_clustering(const Matrix& D, const Matrix& delta, ClusterMethod method,
                           int K, std::uint64_t seed,
                           const std::vector<std::vector<int>>* segments = nullptr);

// Runs the full pipeline for every (K, repeat) and scores the result.
// Per-run failures become flagged records; the sweep never aborts.
std::vector<SweepRecord> sweep_k(const BlendshapeModel& model, ClusterMethod method,
                                 const std::vector<int>& k_values, int repeats,
                                 std::uint64_t seed,
                                 const std::vector<std::vector<int>>* segments = nullptr);

// Heuristic K suggestion: the record at maximum distance from the chord
// between the extreme points of the E_R-vs-E_D curve. Advisory only.
std::optional<int> knee_suggestion(const std::vector<SweepRecord>& records);

}  // namespace rigsolve
