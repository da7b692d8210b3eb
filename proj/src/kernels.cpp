#include "qnet/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace qnet::simd {

bool cpu_supports_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

Backend resolve_backend() {
    const char* env = std::getenv("QNET_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_supports_avx2()) return Backend::Avx2;
        // anything else (including "auto") falls through to detection
    }
    return cpu_supports_avx2() ? Backend::Avx2 : Backend::Scalar;
}

}  // namespace

Backend active_backend() {
    static const Backend b = resolve_backend();
    return b;
}

const char* backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

#if defined(__x86_64__) || defined(_M_X64)
#define QNET_DISPATCH(fn, ...) \
    (active_backend() == Backend::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define QNET_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(const double* a, const double* b, std::size_t n) {
    return QNET_DISPATCH(dot, a, b, n);
}

double sum(const double* a, std::size_t n) { return QNET_DISPATCH(sum, a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    QNET_DISPATCH(axpy, alpha, x, y, n);
}

void scale(double alpha, double* x, std::size_t n) { QNET_DISPATCH(scale, alpha, x, n); }

double sparse_dot(const double* vals, const std::uint32_t* idx, std::size_t nnz,
                  const double* x) {
    return QNET_DISPATCH(sparse_dot, vals, idx, nnz, x);
}

#undef QNET_DISPATCH

}  // namespace qnet::simd
