#pragma once

#include <cstddef>
#include <string>

// Vectorized primitives behind the dense inner loops (rig evaluation,
// coordinate descent dots, k-means distances). A scalar reference path is
// always available; an AVX2/FMA (x86-64) or NEON (aarch64) path is selected
// at runtime when the CPU supports it. All variants must agree to floating
// point reassociation tolerance; see tests/test_kernels.cpp.
namespace rigsolve::kernels {

enum class Backend { Scalar, Avx2, Neon };

// Backend chosen at startup (best supported by the CPU).
Backend detected_backend();

// Currently active backend.
Backend active_backend();

// Force a backend, mainly for equivalence tests. Throws if unsupported
// on this machine.
void set_backend(Backend b);

std::string backend_name(Backend b);

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);

// <x, y>
double dot(const double* x, const double* y, std::size_t n);

// Fused pair of dot products sharing g: gg = <g,g>, gr = <g,r>.
void dot2(const double* g, const double* r, std::size_t n, double& gg, double& gr);

// ||a - b||^2
double squared_distance(const double* a, const double* b, std::size_t n);

// Scalar reference implementations, exposed for equivalence testing.
namespace scalar {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void dot2(const double* g, const double* r, std::size_t n, double& gg, double& gr);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace scalar

}  // namespace rigsolve::kernels
