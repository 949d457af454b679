#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rigsolve/common.hpp"

namespace rigsolve {

// Higher-order term: an extra offset activated by the product of the weights
// named in `ids` (2 to 4 distinct controllers, strictly increasing).
struct CorrectiveTerm {
  std::vector<int> ids;
  std::vector<double> offset;  // length 3n
};

// A blendshape face model: neutral mesh, linear basis and corrective terms.
// Vertex coordinates are laid out [x0,y0,z0, x1,y1,z1, ...], so vertex l owns
// entries 3l..3l+2 of every 3n-vector. The basis is stored column-major: each
// controller's offset column is contiguous.
struct BlendshapeModel {
  int n = 0;  // vertices
  int m = 0;  // controllers
  std::vector<double> neutral;              // 3n
  std::vector<double> basis;                // 3n * m, column-major
  std::vector<CorrectiveTerm> correctives;

  const double* column(int i) const { return basis.data() + static_cast<std::size_t>(i) * 3 * n; }
  double* column(int i) { return basis.data() + static_cast<std::size_t>(i) * 3 * n; }
  std::size_t dim() const { return static_cast<std::size_t>(3) * n; }

  // Throws ValidationError on any broken invariant (dims, corrective ids,
  // duplicate tuples).
  void validate() const;
};

// A model restricted to a vertex subset and controller subset, with the index
// lists that map it back into the parent.
struct SubModel {
  int parent_n = 0;
  int parent_m = 0;
  std::vector<int> mesh_vertices;  // sorted, unique
  std::vector<int> controllers;    // sorted, unique; local i <-> global controllers[i]
  BlendshapeModel model;           // n = |mesh_vertices|, m = |controllers|
};

// f(w) = b0 + B w + sum over corrective terms of (prod of named weights) * offset.
std::vector<double> evaluate_rig(const BlendshapeModel& model, std::span<const double> w);
void evaluate_rig_into(const BlendshapeModel& model, std::span<const double> w,
                       std::span<double> out);

// g such that f(w) = f(w with w_i = 0) + w_i * g. Exploits that f is affine
// in each coordinate.
std::vector<double> controller_gradient(const BlendshapeModel& model,
                                        std::span<const double> w, int i);
void controller_gradient_into(const BlendshapeModel& model, std::span<const double> w,
                              int i, std::span<double> out);

// D[l][i] = squared norm of vertex l's displacement in blendshape i (linear
// basis only). n x m, row-major.
Matrix offset_matrix(const BlendshapeModel& model);

// Rearranges the basis into n x 3m: row l holds, per controller, the (x,y,z)
// components of vertex l.
Matrix delta_matrix(const BlendshapeModel& model);

// Keeps the listed vertices and controllers; corrective terms survive only if
// every id is among `controllers`. Both index lists must be sorted and unique.
SubModel restrict_model(const BlendshapeModel& model,
                        const std::vector<int>& mesh_vertices,
                        const std::vector<int>& controllers);

// Rows of `full` (length 3*parent_n) at the submodel's vertices, concatenated.
std::vector<double> restrict_vector(const std::vector<int>& mesh_vertices,
                                    std::span<const double> full);

}  // namespace rigsolve
