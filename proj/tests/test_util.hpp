#pragma once

#include <random>
#include <vector>

#include "rigsolve/model.hpp"

namespace rigsolve::testutil {

// n=1, m=2 model with one pair corrective: b1=(1,0,0), b2=(0,1,0),
// b^{12}=(0,0,1).
inline BlendshapeModel tiny_model() {
  BlendshapeModel m;
  m.n = 1;
  m.m = 2;
  m.neutral = {0, 0, 0};
  m.basis = {1, 0, 0, 0, 1, 0};
  CorrectiveTerm t;
  t.ids = {0, 1};
  t.offset = {0, 0, 1};
  m.correctives.push_back(t);
  return m;
}

// Independent term-by-term rig oracle: neutral + sum w_i b_i + corrective
// products, written without the library's evaluation path.
inline std::vector<double> rig_oracle(const BlendshapeModel& model,
                                      const std::vector<double>& w) {
  std::vector<double> out = model.neutral;
  for (int i = 0; i < model.m; ++i) {
    const double* col = model.basis.data() + static_cast<std::size_t>(i) * 3 * model.n;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += w[i] * col[j];
  }
  for (const auto& t : model.correctives) {
    double p = 1.0;
    for (int id : t.ids) p *= w[id];
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += p * t.offset[j];
  }
  return out;
}

// Small dense random model with correctives, for property tests.
inline BlendshapeModel random_model(std::mt19937_64& rng, int n, int m,
                                    int pair_terms = 2, int triple_terms = 1) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BlendshapeModel model;
  model.n = n;
  model.m = m;
  model.neutral.resize(3 * n);
  for (auto& v : model.neutral) v = u(rng);
  model.basis.resize(static_cast<std::size_t>(3) * n * m);
  for (auto& v : model.basis) v = u(rng);

  auto add_term = [&](std::vector<int> ids) {
    CorrectiveTerm t;
    t.ids = std::move(ids);
    t.offset.resize(3 * n);
    for (auto& v : t.offset) v = 0.3 * u(rng);
    model.correctives.push_back(std::move(t));
  };
  std::uniform_int_distribution<int> pick(0, m - 1);
  auto distinct = [&](int k) {
    std::vector<int> ids;
    while (static_cast<int>(ids.size()) < k) {
      const int c = pick(rng);
      if (std::find(ids.begin(), ids.end(), c) == ids.end()) ids.push_back(c);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  };
  for (int p = 0; p < pair_terms && m >= 2; ++p) {
    auto ids = distinct(2);
    bool dup = false;
    for (const auto& t : model.correctives) dup = dup || t.ids == ids;
    if (!dup) add_term(ids);
  }
  for (int p = 0; p < triple_terms && m >= 3; ++p) {
    auto ids = distinct(3);
    bool dup = false;
    for (const auto& t : model.correctives) dup = dup || t.ids == ids;
    if (!dup) add_term(ids);
  }
  return model;
}

inline std::vector<double> random_weights(std::mt19937_64& rng, int m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(m);
  for (auto& v : w) v = u(rng);
  return w;
}

}  // namespace rigsolve::testutil
