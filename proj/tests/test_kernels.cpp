#include <cmath>
#include <random>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "pavemind/simd/kernels.hpp"

using namespace pavemind;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Restores the dispatch choice on scope exit.
struct BackendGuard {
  simd::Backend saved = simd::active_backend();
  ~BackendGuard() { simd::force_backend(saved); }
};

}  // namespace

TEST_CASE("scalar kernels on small inputs") {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(simd::scalar::dot(a.data(), b.data(), 3) == 32.0);
  std::vector<double> y{1, 1, 1};
  simd::scalar::axpy(2.0, a.data(), y.data(), 3);
  CHECK(y == std::vector<double>{3, 5, 7});
  CHECK(simd::scalar::dot(a.data(), b.data(), 0) == 0.0);
}

#if PAVEMIND_HAVE_AVX2_KERNELS
TEST_CASE("avx2 kernels match scalar across lengths and tails") {
  if (!simd::backend_available(simd::Backend::Avx2)) return;
  std::mt19937_64 rng(3);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 33u, 100u, 1023u}) {
    CAPTURE(n);
    const auto a = random_vec(n, rng), b = random_vec(n, rng);
    const double ref = simd::scalar::dot(a.data(), b.data(), n);
    const double vec = simd::avx2::dot(a.data(), b.data(), n);
    // Summation order differs; bound by n * eps * sum|a_i b_i|.
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(ref - vec) <= 4.0 * static_cast<double>(n + 1) * 1e-16 * (mag + 1.0));

    auto y1 = random_vec(n, rng);
    auto y2 = y1;
    simd::scalar::axpy(0.37, a.data(), y1.data(), n);
    simd::avx2::axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
  }
}

TEST_CASE("dispatched matrix helpers agree between backends") {
  if (!simd::backend_available(simd::Backend::Avx2)) return;
  BackendGuard guard;
  std::mt19937_64 rng(11);
  const std::size_t rows = 13, cols = 37;
  const auto w = random_vec(rows * cols, rng), x = random_vec(cols, rng), g = random_vec(rows, rng);

  auto run = [&](simd::Backend b) {
    simd::force_backend(b);
    std::vector<double> y(rows, 0.5), t(cols, 0.25), wm = w;
    simd::gemv(w, rows, cols, x, y, true);
    simd::gemv_t(w, rows, cols, g, t);
    simd::ger(wm, rows, cols, -0.3, g, x);
    return std::make_tuple(y, t, wm);
  };
  const auto [ys, ts, ws] = run(simd::Backend::Scalar);
  const auto [yv, tv, wv] = run(simd::Backend::Avx2);
  for (std::size_t i = 0; i < rows; ++i) CHECK(ys[i] == doctest::Approx(yv[i]).epsilon(1e-13));
  for (std::size_t i = 0; i < cols; ++i) CHECK(ts[i] == doctest::Approx(tv[i]).epsilon(1e-13));
  for (std::size_t i = 0; i < ws.size(); ++i) CHECK(ws[i] == doctest::Approx(wv[i]).epsilon(1e-13));
}
#endif

TEST_CASE("gemv reference values") {
  BackendGuard guard;
  const std::vector<double> w{1, 2, 3, 4, 5, 6};  // 2 x 3
  const std::vector<double> x{1, 0, -1};
  for (auto b : {simd::Backend::Scalar, simd::Backend::Avx2}) {
    if (!simd::backend_available(b)) continue;
    simd::force_backend(b);
    std::vector<double> y(2, 10.0);
    simd::gemv(w, 2, 3, x, y);
    CHECK(y == std::vector<double>{-2, -2});
    std::vector<double> t(3, 0.0);
    simd::gemv_t(w, 2, 3, std::vector<double>{1, 1}, t);
    CHECK(t == std::vector<double>{5, 7, 9});
  }
}

TEST_CASE("backend names and forcing") {
  CHECK(simd::backend_name(simd::Backend::Scalar) == "scalar");
  CHECK(simd::backend_available(simd::Backend::Scalar));
  BackendGuard guard;
  simd::force_backend(simd::Backend::Scalar);
  CHECK(simd::active_backend() == simd::Backend::Scalar);
}
