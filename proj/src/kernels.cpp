#include "rigsolve/kernels.hpp"

#include <stdexcept>

namespace rigsolve::kernels {

namespace scalar {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void dot2(const double* g, const double* r, std::size_t n, double& gg, double& gr) {
  double sgg = 0.0, sgr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sgg += g[i] * g[i];
    sgr += g[i] * r[i];
  }
  gg = sgg;
  gr = sgr;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace scalar

#if defined(RIGSOLVE_HAVE_AVX2)
namespace avx2 {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void dot2(const double* g, const double* r, std::size_t n, double& gg, double& gr);
double squared_distance(const double* a, const double* b, std::size_t n);
bool supported();
}  // namespace avx2
#endif

#if defined(RIGSOLVE_HAVE_NEON)
namespace neon {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void dot2(const double* g, const double* r, std::size_t n, double& gg, double& gr);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace neon
#endif

namespace {

struct Table {
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  void (*dot2)(const double*, const double*, std::size_t, double&, double&);
  double (*squared_distance)(const double*, const double*, std::size_t);
};

constexpr Table kScalarTable{scalar::axpy, scalar::dot, scalar::dot2,
                             scalar::squared_distance};

Table table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return kScalarTable;
#if defined(RIGSOLVE_HAVE_AVX2)
    case Backend::Avx2:
      return Table{avx2::axpy, avx2::dot, avx2::dot2, avx2::squared_distance};
#endif
#if defined(RIGSOLVE_HAVE_NEON)
    case Backend::Neon:
      return Table{neon::axpy, neon::dot, neon::dot2, neon::squared_distance};
#endif
    default:
      throw std::runtime_error("kernel backend not supported on this machine");
  }
}

Backend detect() {
#if defined(RIGSOLVE_HAVE_AVX2)
  if (avx2::supported()) return Backend::Avx2;
#endif
#if defined(RIGSOLVE_HAVE_NEON)
  return Backend::Neon;  // baseline on aarch64
#endif
  return Backend::Scalar;
}

Backend g_active = detect();
Table g_table = table_for(g_active);

}  // namespace

Backend detected_backend() {
  static const Backend b = detect();
  return b;
}

Backend active_backend() { return g_active; }

void set_backend(Backend b) {
  g_table = table_for(b);
  g_active = b;
}

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "?";
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  g_table.axpy(a, x, y, n);
}

double dot(const double* x, const double* y, std::size_t n) {
  return g_table.dot(x, y, n);
}

void dot2(const double* g, const double* r, std::size_t n, double& gg, double& gr) {
  g_table.dot2(g, r, n, gg, gr);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  return g_table.squared_distance(a, b, n);
}

}  // namespace rigsolve::kernels
