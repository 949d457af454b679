// NEON variants of the dense kernels (aarch64 baseline).

#include <arm_neon.h>

#include <cstddef>

namespace rigsolve::kernels::neon {

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float64x2_t y0 = vld1q_f64(y + i);
    float64x2_t y1 = vld1q_f64(y + i + 2);
    y0 = vfmaq_f64(y0, va, vld1q_f64(x + i));
    y1 = vfmaq_f64(y1, va, vld1q_f64(x + i + 2));
    vst1q_f64(y + i, y0);
    vst1q_f64(y + i + 2, y1);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(acc0) + vaddvq_f64(acc1);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void dot2(const double* g, const double* r, std::size_t n, double& gg, double& gr) {
  float64x2_t agg = vdupq_n_f64(0.0);
  float64x2_t agr = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vg = vld1q_f64(g + i);
    agg = vfmaq_f64(agg, vg, vg);
    agr = vfmaq_f64(agr, vg, vld1q_f64(r + i));
  }
  double sgg = vaddvq_f64(agg);
  double sgr = vaddvq_f64(agr);
  for (; i < n; ++i) {
    sgg += g[i] * g[i];
    sgr += g[i] * r[i];
  }
  gg = sgg;
  gr = sgr;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace rigsolve::kernels::neon
