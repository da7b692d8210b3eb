#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops used by the exact-chain and linear-algebra paths.
// A scalar reference implementation always exists; on x86-64 an AVX2/FMA
// variant is selected at runtime when the CPU supports it. The environment
// variable QNET_SIMD (auto|scalar|avx2) overrides the selection, and the
// test suite checks scalar/simd equivalence on every kernel.
namespace qnet::simd {

enum class Backend { Scalar, Avx2 };

// Backend chosen at process start (cpuid + QNET_SIMD override).
Backend active_backend();
const char* backend_name(Backend b);
bool cpu_supports_avx2();

// y[i] dot x[i]
double dot(const double* a, const double* b, std::size_t n);

// sum of a[0..n)
double sum(const double* a, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x *= alpha
void scale(double alpha, double* x, std::size_t n);

// sum_i vals[i] * x[idx[i]]  (one CSR row against a dense vector)
double sparse_dot(const double* vals, const std::uint32_t* idx, std::size_t nnz,
                  const double* x);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
double sparse_dot(const double* vals, const std::uint32_t* idx, std::size_t nnz,
                  const double* x);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
double sparse_dot(const double* vals, const std::uint32_t* idx, std::size_t nnz,
                  const double* x);
}  // namespace avx2
#endif

}  // namespace qnet::simd
