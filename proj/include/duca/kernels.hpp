#pragma once

#include <cstddef>

namespace duca::kernels {

// Dense double-precision primitives under the solver and pooling inner
// loops. Every operation has a scalar reference implementation and, on
// x86-64, an AVX2+FMA variant; the dispatched entry points below select the
// best supported backend once at startup. The two backends are
// equivalence-tested against each other (SIMD reductions reassociate, so
// agreement is to rounding, not bitwise).

enum class Backend { Auto, Scalar, Avx2 };

const char* backend_name(Backend b);
bool avx2_supported();

// Resolved backend currently in use by the dispatched entry points.
Backend active_backend();

// Forces a backend (tests; DUCA_KERNELS=scalar|avx2 does the same at
// startup). Throws Unsupported if the machine cannot run it.
void set_backend(Backend b);

double dot(const double* a, const double* b, std::size_t n);
double nrm2sq(const double* x, std::size_t n);
double sum(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
void scal(double alpha, double* x, std::size_t n);
void elem_max(double* acc, const double* x, std::size_t n);  // acc = max(acc, x)
void elem_add(double* acc, const double* x, std::size_t n);  // acc += x

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double nrm2sq(const double* x, std::size_t n);
double sum(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
void elem_max(double* acc, const double* x, std::size_t n);
void elem_add(double* acc, const double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
// Defined only in the AVX2 translation unit; call through the dispatched
// entry points unless avx2_supported() has been checked.
double dot(const double* a, const double* b, std::size_t n);
double nrm2sq(const double* x, std::size_t n);
double sum(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
void elem_max(double* acc, const double* x, std::size_t n);
void elem_add(double* acc, const double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace duca::kernels
