#include "rigsolve/model.hpp"

#include <algorithm>
#include <cstring>
#include <set>
#include <unordered_map>

#include "rigsolve/kernels.hpp"

namespace rigsolve {

void BlendshapeModel::validate() const {
  check(n > 0 && m > 0, "model must have n > 0 and m > 0");
  check(neutral.size() == dim(), "neutral must have length 3n");
  check(basis.size() == dim() * static_cast<std::size_t>(m),
        "basis must be 3n x m");
  std::set<std::vector<int>> seen;
  for (const auto& t : correctives) {
    check(t.ids.size() >= 2 && t.ids.size() <= 4,
          "corrective tuple size must be 2, 3 or 4");
    for (std::size_t k = 0; k < t.ids.size(); ++k) {
      check(t.ids[k] >= 0 && t.ids[k] < m, "corrective id out of range");
      if (k > 0) check(t.ids[k] > t.ids[k - 1], "corrective ids must be strictly increasing");
    }
    check(t.offset.size() == dim(), "corrective offset must have length 3n");
    check(seen.insert(t.ids).second, "duplicate corrective tuple");
  }
}

void evaluate_rig_into(const BlendshapeModel& model, std::span<const double> w,
                       std::span<double> out) {
  const std::size_t d = model.dim();
  check(w.size() == static_cast<std::size_t>(model.m), "weight vector length must equal m");
  check(out.size() == d, "output length must equal 3n");

  std::memcpy(out.data(), model.neutral.data(), d * sizeof(double));
  for (int i = 0; i < model.m; ++i) {
    if (w[i] != 0.0) kernels::axpy(w[i], model.column(i), out.data(), d);
  }
  for (const auto& t : model.correctives) {
    double p = 1.0;
    for (int id : t.ids) p *= w[id];
    if (p != 0.0) kernels::axpy(p, t.offset.data(), out.data(), d);
  }
}

std::vector<double> evaluate_rig(const BlendshapeModel& model, std::span<const double> w) {
  std::vector<double> out(model.dim());
  evaluate_rig_into(model, w, out);
  return out;
}

void controller_gradient_into(const BlendshapeModel& model, std::span<const double> w,
                              int i, std::span<double> out) {
  const std::size_t d = model.dim();
  check(i >= 0 && i < model.m, "controller index out of range");
  check(w.size() == static_cast<std::size_t>(model.m), "weight vector length must equal m");
  check(out.size() == d, "output length must equal 3n");

  std::memcpy(out.data(), model.column(i), d * sizeof(double));
  for (const auto& t : model.correctives) {
    if (std::find(t.ids.begin(), t.ids.end(), i) == t.ids.end()) continue;
    double p = 1.0;
    for (int id : t.ids)
      if (id != i) p *= w[id];
    if (p != 0.0) kernels::axpy(p, t.offset.data(), out.data(), d);
  }
}

std::vector<double> controller_gradient(const BlendshapeModel& model,
                                        std::span<const double> w, int i) {
  std::vector<double> out(model.dim());
  controller_gradient_into(model, w, i, out);
  return out;
}

Matrix offset_matrix(const BlendshapeModel& model) {
  Matrix d(model.n, model.m);
  for (int i = 0; i < model.m; ++i) {
    const double* col = model.column(i);
    for (int l = 0; l < model.n; ++l) {
      const double x = col[3 * l], y = col[3 * l + 1], z = col[3 * l + 2];
      d(l, i) = x * x + y * y + z * z;
    }
  }
  return d;
}

Matrix delta_matrix(const BlendshapeModel& model) {
  Matrix delta(model.n, static_cast<std::size_t>(3) * model.m);
  for (int i = 0; i < model.m; ++i) {
    const double* col = model.column(i);
    for (int l = 0; l < model.n; ++l) {
      delta(l, 3 * i) = col[3 * l];
      delta(l, 3 * i + 1) = col[3 * l + 1];
      delta(l, 3 * i + 2) = col[3 * l + 2];
    }
  }
  return delta;
}

namespace {
void check_index_list(const std::vector<int>& idx, int bound, const char* what) {
  check(!idx.empty(), std::string(what) + " list must be nonempty");
  for (std::size_t k = 0; k < idx.size(); ++k) {
    check(idx[k] >= 0 && idx[k] < bound, std::string(what) + " index out of range");
    if (k > 0) check(idx[k] > idx[k - 1], std::string(what) + " list must be sorted and unique");
  }
}
}  // namespace

std::vector<double> restrict_vector(const std::vector<int>& mesh_vertices,
                                    std::span<const double> full) {
  std::vector<double> out;
  out.reserve(mesh_vertices.size() * 3);
  for (int l : mesh_vertices) {
    out.push_back(full[3 * l]);
    out.push_back(full[3 * l + 1]);
    out.push_back(full[3 * l + 2]);
  }
  return out;
}

SubModel restrict_model(const BlendshapeModel& model,
                        const std::vector<int>& mesh_vertices,
                        const std::vector<int>& controllers) {
  check_index_list(mesh_vertices, model.n, "vertex");
  check_index_list(controllers, model.m, "controller");

  SubModel sub;
  sub.parent_n = model.n;
  sub.parent_m = model.m;
  sub.mesh_vertices = mesh_vertices;
  sub.controllers = controllers;

  BlendshapeModel& sm = sub.model;
  sm.n = static_cast<int>(mesh_vertices.size());
  sm.m = static_cast<int>(controllers.size());
  sm.neutral = restrict_vector(mesh_vertices, model.neutral);
  sm.basis.resize(sm.dim() * sm.m);
  for (int j = 0; j < sm.m; ++j) {
    const double* col = model.column(controllers[j]);
    double* out = sm.column(j);
    for (int l = 0; l < sm.n; ++l) {
      const int v = mesh_vertices[l];
      out[3 * l] = col[3 * v];
      out[3 * l + 1] = col[3 * v + 1];
      out[3 * l + 2] = col[3 * v + 2];
    }
  }

  std::unordered_map<int, int> global_to_local;
  for (int j = 0; j < sm.m; ++j) global_to_local[controllers[j]] = j;
  for (const auto& t : model.correctives) {
    std::vector<int> local_ids;
    local_ids.reserve(t.ids.size());
    bool keep = true;
    for (int id : t.ids) {
      auto it = global_to_local.find(id);
      if (it == global_to_local.end()) {
        keep = false;
        break;
      }
      local_ids.push_back(it->second);
    }
    if (!keep) continue;
    std::sort(local_ids.begin(), local_ids.end());
    CorrectiveTerm kept;
    kept.ids = std::move(local_ids);
    kept.offset = restrict_vector(mesh_vertices, t.offset);
    sm.correctives.push_back(std::move(kept));
  }
  return sub;
}

}  // namespace rigsolve
