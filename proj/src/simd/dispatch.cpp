#include "pavemind/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace pavemind::simd {
namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);

struct KernelTable {
  Backend backend;
  DotFn dot;
  AxpyFn axpy;
};

constexpr KernelTable kScalarTable{Backend::Scalar, &scalar::dot, &scalar::axpy};
#if PAVEMIND_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table{Backend::Avx2, &avx2::dot, &avx2::axpy};
#endif

const KernelTable* table_for(Backend b) {
#if PAVEMIND_HAVE_AVX2_KERNELS
  if (b == Backend::Avx2) return &kAvx2Table;
#endif
  return &kScalarTable;
}

const KernelTable* detect() {
  if (const char* env = std::getenv("PAVEMIND_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return &kScalarTable;
    if (v == "avx2" && backend_available(Backend::Avx2)) return table_for(Backend::Avx2);
  }
  if (backend_available(Backend::Avx2)) return table_for(Backend::Avx2);
  return &kScalarTable;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  if (b == Backend::Scalar) return true;
#if PAVEMIND_HAVE_AVX2_KERNELS
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() { return current().load()->backend; }

void force_backend(Backend b) {
  if (!backend_available(b))
    throw std::invalid_argument("SIMD backend not available: " + std::string(backend_name(b)));
  current().store(table_for(b));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  return current().load()->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  current().load()->axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y, bool accumulate) {
  if (w.size() != rows * cols || x.size() != cols || y.size() != rows)
    throw std::invalid_argument("gemv: dimension mismatch");
  const DotFn d = current().load()->dot;
  for (std::size_t r = 0; r < rows; ++r) {
    const double v = d(w.data() + r * cols, x.data(), cols);
    y[r] = accumulate ? y[r] + v : v;
  }
}

void gemv_t(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> g, std::span<double> out) {
  if (w.size() != rows * cols || g.size() != rows || out.size() != cols)
    throw std::invalid_argument("gemv_t: dimension mismatch");
  const AxpyFn a = current().load()->axpy;
  for (std::size_t r = 0; r < rows; ++r)
    if (g[r] != 0.0) a(g[r], w.data() + r * cols, out.data(), cols);
}

void ger(std::span<double> w, std::size_t rows, std::size_t cols, double alpha,
         std::span<const double> g, std::span<const double> x) {
  if (w.size() != rows * cols || g.size() != rows || x.size() != cols)
    throw std::invalid_argument("ger: dimension mismatch");
  const AxpyFn a = current().load()->axpy;
  for (std::size_t r = 0; r < rows; ++r)
    if (g[r] != 0.0) a(alpha * g[r], x.data(), w.data() + r * cols, cols);
}

}  // namespace pavemind::simd
