#pragma once
// Dense double-precision kernels used by the LSTM and Q-network inner loops.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is picked once at startup from CPUID; the
// PAVEMIND_SIMD environment variable ("scalar" or "avx2") or force_backend()
// overrides the choice. Vectorized reductions sum in a different order than
// the scalar loop, so results agree to rounding, not bitwise.

#include <cstddef>
#include <span>
#include <string_view>

namespace pavemind::simd {

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend b);
bool backend_available(Backend b);
Backend active_backend();
// Throws std::invalid_argument if the backend is not available on this CPU.
void force_backend(Backend b);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define PAVEMIND_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#else
#define PAVEMIND_HAVE_AVX2_KERNELS 0
#endif

// Dispatched entry points.
double dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Row-major matrix helpers built on dot/axpy. `w` holds rows*cols entries.
// y = W x (+ y if accumulate)
void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y, bool accumulate = false);
// out += W^T g
void gemv_t(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> g, std::span<double> out);
// W += alpha * g x^T
void ger(std::span<double> w, std::size_t rows, std::size_t cols, double alpha,
         std::span<const double> g, std::span<const double> x);

}  // namespace pavemind::simd
