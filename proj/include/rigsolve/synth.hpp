#pragma once

#include <cstdint>
#include <vector>

#include "rigsolve/common.hpp"
#include "rigsolve/model.hpp"

namespace rigsolve {

// Recipe for a reproducible synthetic face model and animation. Vertices sit
// on an 18 cm wide ellipsoid; each blendshape deforms a contiguous local
// footprint with smooth falloff, and corrective terms connect controllers
// whose footprints overlap.
struct GenSpec {
  int n = 600;
  int m = 24;
  int pairs = 20;
  int triples = 6;
  int quads = 2;
  int locality = 0;          // footprint size in vertices; 0 -> 3n/m, at least 12
  int frames = 60;
  double sparsity = 5.0;     // expected active controllers per frame
  double noise_sigma = 0.03; // cm, per-coordinate standard deviation
  std::uint64_t seed = 0;

  int effective_locality() const;
  void validate() const;
};

// Deterministic under spec.seed. Throws ValidationError when the requested
// corrective counts cannot be met by overlapping footprints.
BlendshapeModel generate_model(const GenSpec& spec);

// T x m weight matrix: sparse active sets with temporally smooth ramp
// profiles, entries in [0,1].
Matrix generate_animation(const BlendshapeModel& model, const GenSpec& spec);

// Per frame: f(w) plus i.i.d. per-coordinate Gaussian noise.
std::vector<std::vector<double>> make_targets(const BlendshapeModel& model,
                                              const Matrix& weights, double noise_sigma,
                                              std::uint64_t seed);

}  // namespace rigsolve
