#include "qnet/kernels.hpp"

namespace qnet::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double sparse_dot(const double* vals, const std::uint32_t* idx, std::size_t nnz,
                  const double* x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < nnz; ++i) acc += vals[i] * x[idx[i]];
    return acc;
}

}  // namespace qnet::simd::scalar
