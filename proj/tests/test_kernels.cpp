#include <doctest.h>

#include <cmath>
#include <vector>

#include "duca/kernels.hpp"
#include "duca/rng.hpp"

namespace dk = duca::kernels;

namespace {

std::vector<double> random_vec(duca::Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * (2.0 * rng.uniform01() - 1.0);
  return v;
}

// SIMD reductions reassociate; agreement with the scalar reference is to
// rounding, proportional to length.
double tol_for(std::size_t n) { return 1e-12 * (1.0 + static_cast<double>(n)); }

const std::vector<std::size_t> kLengths = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 63, 64, 257, 1000, 4096};

}  // namespace

TEST_CASE("scalar kernel reference values") {
  const std::vector<double> a = {1.0, -2.0, 3.0, 0.5};
  const std::vector<double> b = {2.0, 1.0, -1.0, 4.0};
  CHECK(dk::scalar::dot(a.data(), b.data(), 4) == doctest::Approx(-1.0));
  CHECK(dk::scalar::nrm2sq(a.data(), 4) == doctest::Approx(14.25));
  CHECK(dk::scalar::sum(a.data(), 4) == doctest::Approx(2.5));
  CHECK(dk::scalar::max_abs(a.data(), 4) == doctest::Approx(3.0));

  std::vector<double> y = b;
  dk::scalar::axpy(2.0, a.data(), y.data(), 4);
  CHECK(y[0] == doctest::Approx(4.0));
  CHECK(y[1] == doctest::Approx(-3.0));

  std::vector<double> acc = {0.0, 5.0, -10.0, 0.0};
  dk::scalar::elem_max(acc.data(), a.data(), 4);
  CHECK(acc[0] == doctest::Approx(1.0));
  CHECK(acc[1] == doctest::Approx(5.0));
  CHECK(acc[2] == doctest::Approx(3.0));

  CHECK(dk::scalar::dot(a.data(), b.data(), 0) == 0.0);
  CHECK(dk::scalar::max_abs(a.data(), 0) == 0.0);
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernels match the scalar reference") {
  if (!dk::avx2_supported()) {
    MESSAGE("avx2 not supported on this machine; skipping");
    return;
  }
  duca::Rng rng(20240811);
  for (const std::size_t n : kLengths) {
    const auto a = random_vec(rng, n, 3.0);
    const auto b = random_vec(rng, n, 2.0);
    const double tol = tol_for(n);
    CAPTURE(n);

    CHECK(std::fabs(dk::avx2::dot(a.data(), b.data(), n) - dk::scalar::dot(a.data(), b.data(), n)) <= tol);
    CHECK(std::fabs(dk::avx2::nrm2sq(a.data(), n) - dk::scalar::nrm2sq(a.data(), n)) <= tol);
    CHECK(std::fabs(dk::avx2::sum(a.data(), n) - dk::scalar::sum(a.data(), n)) <= tol);
    CHECK(dk::avx2::max_abs(a.data(), n) == dk::scalar::max_abs(a.data(), n));

    std::vector<double> y_ref = b, y_simd = b;
    dk::scalar::axpy(1.5, a.data(), y_ref.data(), n);
    dk::avx2::axpy(1.5, a.data(), y_simd.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(y_ref[i] - y_simd[i]) <= tol);

    std::vector<double> s_ref = a, s_simd = a;
    dk::scalar::scal(-0.75, s_ref.data(), n);
    dk::avx2::scal(-0.75, s_simd.data(), n);
    CHECK(s_ref == s_simd);

    std::vector<double> m_ref = b, m_simd = b;
    dk::scalar::elem_max(m_ref.data(), a.data(), n);
    dk::avx2::elem_max(m_simd.data(), a.data(), n);
    CHECK(m_ref == m_simd);

    std::vector<double> p_ref = b, p_simd = b;
    dk::scalar::elem_add(p_ref.data(), a.data(), n);
    dk::avx2::elem_add(p_simd.data(), a.data(), n);
    CHECK(p_ref == p_simd);
  }
}
#endif

TEST_CASE("dispatched kernels agree with the active backend") {
  duca::Rng rng(7);
  const auto a = random_vec(rng, 100);
  const auto b = random_vec(rng, 100);
  const dk::Backend active = dk::active_backend();
  CHECK((active == dk::Backend::Scalar || active == dk::Backend::Avx2));
  const double got = dk::dot(a.data(), b.data(), a.size());
  const double ref = dk::scalar::dot(a.data(), b.data(), a.size());
  CHECK(std::fabs(got - ref) <= tol_for(a.size()));
}

TEST_CASE("backend can be forced to scalar and restored") {
  const dk::Backend before = dk::active_backend();
  dk::set_backend(dk::Backend::Scalar);
  CHECK(dk::active_backend() == dk::Backend::Scalar);
  const std::vector<double> a = {1.0, 2.0, 3.0};
  CHECK(dk::dot(a.data(), a.data(), 3) == doctest::Approx(14.0));
  dk::set_backend(dk::Backend::Auto);
  CHECK(dk::active_backend() == (dk::avx2_supported() ? dk::Backend::Avx2 : dk::Backend::Scalar));
  dk::set_backend(before);
}
