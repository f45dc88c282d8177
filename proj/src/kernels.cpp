#include "duca/kernels.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

#include "duca/error.hpp"
#include "duca/log.hpp"

namespace duca::kernels {

namespace {

struct Vtable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*nrm2sq)(const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*max_abs)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  void (*elem_max)(double*, const double*, std::size_t);
  void (*elem_add)(double*, const double*, std::size_t);
};

constexpr Vtable kScalar{scalar::dot, scalar::nrm2sq, scalar::sum, scalar::max_abs,
                         scalar::axpy, scalar::scal, scalar::elem_max, scalar::elem_add};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Vtable kAvx2{avx2::dot, avx2::nrm2sq, avx2::sum, avx2::max_abs,
                       avx2::axpy, avx2::scal, avx2::elem_max, avx2::elem_add};
#endif

const Vtable* g_vtable = nullptr;
Backend g_backend = Backend::Scalar;
std::once_flag g_init_flag;

Backend detect_best() {
  if (avx2_supported()) return Backend::Avx2;
  return Backend::Scalar;
}

void apply(Backend b) {
  switch (b) {
    case Backend::Scalar:
      g_vtable = &kScalar;
      g_backend = Backend::Scalar;
      return;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (avx2_supported()) {
        g_vtable = &kAvx2;
        g_backend = Backend::Avx2;
        return;
      }
#endif
      fail(ErrorKind::Unsupported, "kernel backend avx2 not supported on this machine");
    case Backend::Auto:
      apply(detect_best());
      return;
  }
}

void init_once() {
  std::call_once(g_init_flag, [] {
    Backend choice = Backend::Auto;
    if (const char* env = std::getenv("DUCA_KERNELS")) {
      const std::string name(env);
      if (name == "scalar") {
        choice = Backend::Scalar;
      } else if (name == "avx2") {
        choice = Backend::Avx2;
      } else if (!name.empty() && name != "auto") {
        log_warn("ignoring unknown DUCA_KERNELS value '" + name + "'");
      }
    }
    apply(choice);
    log_debug(std::string("kernel backend: ") + backend_name(g_backend));
  });
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Auto:   return "auto";
    case Backend::Scalar: return "scalar";
    case Backend::Avx2:   return "avx2";
  }
  return "?";
}

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() {
  init_once();
  return g_backend;
}

void set_backend(Backend b) {
  init_once();
  apply(b);
}

double dot(const double* a, const double* b, std::size_t n) {
  init_once();
  return g_vtable->dot(a, b, n);
}

double nrm2sq(const double* x, std::size_t n) {
  init_once();
  return g_vtable->nrm2sq(x, n);
}

double sum(const double* x, std::size_t n) {
  init_once();
  return g_vtable->sum(x, n);
}

double max_abs(const double* x, std::size_t n) {
  init_once();
  return g_vtable->max_abs(x, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  init_once();
  g_vtable->axpy(alpha, x, y, n);
}

void scal(double alpha, double* x, std::size_t n) {
  init_once();
  g_vtable->scal(alpha, x, n);
}

void elem_max(double* acc, const double* x, std::size_t n) {
  init_once();
  g_vtable->elem_max(acc, x, n);
}

void elem_add(double* acc, const double* x, std::size_t n) {
  init_once();
  g_vtable->elem_add(acc, x, n);
}

}  // namespace duca::kernels
