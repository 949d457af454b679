#include "rigsolve/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace rigsolve {

int GenSpec::effective_locality() const {
  if (locality > 0) return std::min(locality, n);
  return std::min(n, std::max(12, 3 * n / std::max(m, 1)));
}

void GenSpec::validate() const {
  check(n >= 4 && m >= 1, "spec needs n >= 4 and m >= 1");
  check(pairs >= 0 && triples >= 0 && quads >= 0, "corrective counts must be >= 0");
  check(frames >= 0, "frames must be >= 0");
  check(sparsity >= 0.0 && sparsity <= m, "sparsity must lie in [0, m]");
  check(noise_sigma >= 0.0, "noise_sigma must be >= 0");
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Fibonacci lattice on an ellipsoid 18 cm wide along x.
std::vector<double> ellipsoid_vertices(int n) {
  constexpr double kSemiX = 9.0, kSemiY = 6.5, kSemiZ = 7.5;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  std::vector<double> v(3 * n);
  for (int l = 0; l < n; ++l) {
    const double y = 1.0 - 2.0 * (l + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double theta = golden * l;
    v[3 * l] = kSemiX * r * std::cos(theta);
    v[3 * l + 1] = kSemiY * y;
    v[3 * l + 2] = kSemiZ * r * std::sin(theta);
  }
  return v;
}

std::vector<double> random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  double x, y, z, norm;
  do {
    x = gauss(rng);
    y = gauss(rng);
    z = gauss(rng);
    norm = std::sqrt(x * x + y * y + z * z);
  } while (norm < 1e-12);
  return {x / norm, y / norm, z / norm};
}

double vertex_distance(const std::vector<double>& verts, int a, int b) {
  const double dx = verts[3 * a] - verts[3 * b];
  const double dy = verts[3 * a + 1] - verts[3 * b + 1];
  const double dz = verts[3 * a + 2] - verts[3 * b + 2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::vector<int> sorted_intersection(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Gaussian bump over `support`, centered on the support vertex nearest its
// centroid, written as amp * falloff * dir into a 3n vector.
void write_bump(std::vector<double>& column, const std::vector<double>& verts,
                const std::vector<int>& support, const std::vector<double>& dir,
                double amp) {
  double cx = 0.0, cy = 0.0, cz = 0.0;
  for (int v : support) {
    cx += verts[3 * v];
    cy += verts[3 * v + 1];
    cz += verts[3 * v + 2];
  }
  cx /= support.size();
  cy /= support.size();
  cz /= support.size();

  std::vector<double> dist(support.size());
  double max_d = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    const int v = support[k];
    const double dx = verts[3 * v] - cx, dy = verts[3 * v + 1] - cy,
                 dz = verts[3 * v + 2] - cz;
    dist[k] = std::sqrt(dx * dx + dy * dy + dz * dz);
    max_d = std::max(max_d, dist[k]);
  }
  const double sigma = max_d > 0.0 ? max_d / 2.0 : 1.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    const int v = support[k];
    const double f = amp * std::exp(-(dist[k] * dist[k]) / (2.0 * sigma * sigma));
    column[3 * v] += f * dir[0];
    column[3 * v + 1] += f * dir[1];
    column[3 * v + 2] += f * dir[2];
  }
}

}  // namespace

BlendshapeModel generate_model(const GenSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(mix(spec.seed, 0x6d6f64656cULL));

  BlendshapeModel model;
  model.n = spec.n;
  model.m = spec.m;
  model.neutral = ellipsoid_vertices(spec.n);
  model.basis.assign(model.dim() * spec.m, 0.0);

  const int loc = spec.effective_locality();

  // footprint centers spread without replacement when possible
  std::vector<int> centers(spec.n);
  std::iota(centers.begin(), centers.end(), 0);
  std::shuffle(centers.begin(), centers.end(), rng);
  centers.resize(std::min(spec.n, spec.m));
  while (static_cast<int>(centers.size()) < spec.m)
    centers.push_back(std::uniform_int_distribution<int>(0, spec.n - 1)(rng));

  std::vector<std::vector<int>> footprints(spec.m);
  std::uniform_real_distribution<double> amp_dist(0.5, 1.5);
  std::vector<int> order(spec.n);
  for (int i = 0; i < spec.m; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::nth_element(order.begin(), order.begin() + loc - 1, order.end(),
                     [&](int a, int b) {
                       return vertex_distance(model.neutral, centers[i], a) <
                              vertex_distance(model.neutral, centers[i], b);
                     });
    footprints[i].assign(order.begin(), order.begin() + loc);
    std::sort(footprints[i].begin(), footprints[i].end());

    const auto dir = random_unit_vector(rng);
    const double amp = amp_dist(rng);
    std::vector<double> col(model.dim(), 0.0);
    write_bump(col, model.neutral, footprints[i], dir, amp);
    std::copy(col.begin(), col.end(), model.column(i));
  }

  // corrective terms over overlapping footprints
  std::set<std::vector<int>> used;
  auto add_corrective = [&](const std::vector<int>& ids, const std::vector<int>& support) {
    CorrectiveTerm t;
    t.ids = ids;
    t.offset.assign(model.dim(), 0.0);
    write_bump(t.offset, model.neutral, support, random_unit_vector(rng),
               0.2 * amp_dist(rng));
    model.correctives.push_back(std::move(t));
  };

  std::vector<std::pair<int, int>> pair_candidates;
  for (int i = 0; i < spec.m; ++i)
    for (int j = i + 1; j < spec.m; ++j)
      if (sorted_intersection(footprints[i], footprints[j]).size() >= 3)
        pair_candidates.emplace_back(i, j);

  check(static_cast<int>(pair_candidates.size()) >= spec.pairs,
        "infeasible spec: not enough overlapping footprint pairs");
  std::shuffle(pair_candidates.begin(), pair_candidates.end(), rng);
  for (int p = 0; p < spec.pairs; ++p) {
    const auto [i, j] = pair_candidates[p];
    std::vector<int> ids{i, j};
    used.insert(ids);
    add_corrective(ids, sorted_intersection(footprints[i], footprints[j]));
  }

  auto sample_tuple = [&](int size, int count) {
    if (count == 0) return;
    check(spec.m >= size, "infeasible spec: tuple size exceeds m");
    std::uniform_int_distribution<int> pick(0, spec.m - 1);
    int made = 0;
    for (long attempts = 0; made < count && attempts < 20000L * count; ++attempts) {
      std::set<int> chosen;
      while (static_cast<int>(chosen.size()) < size) chosen.insert(pick(rng));
      std::vector<int> ids(chosen.begin(), chosen.end());
      if (used.count(ids)) continue;
      std::vector<int> support = footprints[ids[0]];
      for (int k = 1; k < size && support.size() >= 3; ++k)
        support = sorted_intersection(support, footprints[ids[k]]);
      if (support.size() < 3) continue;
      used.insert(ids);
      add_corrective(ids, support);
      ++made;
    }
    check(made == count, "infeasible spec: not enough overlapping tuples of size " +
                             std::to_string(size));
  };
  sample_tuple(3, spec.triples);
  sample_tuple(4, spec.quads);

  model.validate();
  return model;
}

Matrix generate_animation(const BlendshapeModel& model, const GenSpec& spec) {
  spec.validate();
  check(model.m == spec.m, "model and spec disagree on m");
  const int T = spec.frames;
  Matrix w(T, spec.m, 0.0);
  if (T == 0 || spec.sparsity == 0.0) return w;

  const double active_fraction = spec.sparsity / spec.m;
  for (int i = 0; i < spec.m; ++i) {
    std::mt19937_64 rng(mix(spec.seed, 0x616e696dULL + i));
    std::uniform_int_distribution<int> length_dist(6, 14);
    std::uniform_real_distribution<double> peak_dist(0.4, 1.0);
    const double mean_len = 10.0;
    const double mean_gap =
        std::max(1.0, mean_len * (1.0 - active_fraction) / active_fraction);
    std::exponential_distribution<double> gap_dist(1.0 / mean_gap);

    int t = static_cast<int>(gap_dist(rng));
    while (t < T) {
      const int len = length_dist(rng);
      const double peak = peak_dist(rng);
      const int ramp = std::max(1, len / 4);
      for (int s = 0; s < len && t + s < T; ++s) {
        double v;
        if (s < ramp)
          v = peak * (s + 1) / static_cast<double>(ramp + 1);
        else if (s >= len - ramp)
          v = peak * (len - s) / static_cast<double>(ramp + 1);
        else
          v = peak;
        w(t + s, i) = std::clamp(v, 0.0, 1.0);
      }
      t += len + 1 + static_cast<int>(gap_dist(rng));
    }
  }
  return w;
}

std::vector<std::vector<double>> make_targets(const BlendshapeModel& model,
                                              const Matrix& weights, double noise_sigma,
                                              std::uint64_t seed) {
  check(weights.cols() == static_cast<std::size_t>(model.m),
        "weight rows must have m entries");
  std::mt19937_64 rng(mix(seed, 0x746172676574ULL));
  std::normal_distribution<double> noise(0.0, noise_sigma);

  std::vector<std::vector<double>> targets(weights.rows());
  for (std::size_t t = 0; t < weights.rows(); ++t) {
    targets[t] = evaluate_rig(model, std::span<const double>(weights.row(t), weights.cols()));
    if (noise_sigma > 0.0)
      for (double& v : targets[t]) v += noise(rng);
  }
  return targets;
}

}  // namespace rigsolve
