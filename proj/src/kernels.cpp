#include "ddes/kernels.hpp"

#include "ddes/errors.hpp"

#include <cstdlib>
#include <cstring>

namespace ddes::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double sum_sq_scalar(const double* a, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * a[i];
    return sum;
}

double weighted_sum_sq_scalar(const double* w, const double* a, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += w[i] * a[i] * a[i];
    return sum;
}

void matvec_scalar(const double* m, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = m + r * cols;
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) sum += row[c] * x[c];
        y[r] = sum;
    }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void ew_mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void ew_step_update_scalar(const double* e, const double* p, const double* f, double h, double* c,
                           std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) c[i] = e[i] * c[i] + h * p[i] * f[i];
}

Isa detect_isa() {
    if (const char* env = std::getenv("DDES_ISA")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
        if (std::strcmp(env, "avx2") == 0 && isa_available(Isa::avx2)) return Isa::avx2;
        if (std::strcmp(env, "neon") == 0 && isa_available(Isa::neon)) return Isa::neon;
    }
    if (isa_available(Isa::avx2)) return Isa::avx2;
    if (isa_available(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

Isa g_isa = detect_isa();

const Ops& ops_for(Isa isa) {
    switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2:
        return avx2_ops();
#endif
#if defined(__aarch64__)
    case Isa::neon:
        return neon_ops();
#endif
    default:
        return scalar_ops();
    }
}

const Ops* g_ops = &ops_for(g_isa);

} // namespace

const Ops& scalar_ops() {
    static const Ops ops{dot_scalar,    sum_sq_scalar, weighted_sum_sq_scalar, matvec_scalar,
                         axpy_scalar,   ew_mul_scalar, ew_step_update_scalar};
    return ops;
}

bool isa_available(Isa isa) {
    switch (isa) {
    case Isa::scalar:
        return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
        return true;
#else
        return false;
#endif
    }
    return false;
}

Isa active_isa() { return g_isa; }

const char* isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar:
        return "scalar";
    case Isa::avx2:
        return "avx2";
    case Isa::neon:
        return "neon";
    }
    return "unknown";
}

void force_isa(Isa isa) {
    if (!isa_available(isa)) throw ContractError("kernel lane not available on this host");
    g_isa = isa;
    g_ops = &ops_for(isa);
}

double dot(const double* a, const double* b, std::size_t n) { return g_ops->dot(a, b, n); }

double sum_sq(const double* a, std::size_t n) { return g_ops->sum_sq(a, n); }

double weighted_sum_sq(const double* w, const double* a, std::size_t n) {
    return g_ops->weighted_sum_sq(w, a, n);
}

void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
    g_ops->matvec(m, rows, cols, x, y);
}

void axpy(double a, const double* x, double* y, std::size_t n) { g_ops->axpy(a, x, y, n); }

void ew_mul(const double* a, const double* b, double* out, std::size_t n) {
    g_ops->ew_mul(a, b, out, n);
}

void ew_step_update(const double* e, const double* p, const double* f, double h, double* c,
                    std::size_t n) {
    g_ops->ew_step_update(e, p, f, h, c, n);
}

} // namespace ddes::kernels
