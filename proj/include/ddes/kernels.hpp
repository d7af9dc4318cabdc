#pragma once

#include <cstddef>

namespace ddes::kernels {

// Instruction-set lanes for the arithmetic kernels. The scalar lane is the
// reference implementation; SIMD lanes must match it to round-off.
enum class Isa { scalar, avx2, neon };

struct Ops {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum_sq)(const double*, std::size_t);
    double (*weighted_sum_sq)(const double*, const double*, std::size_t);
    void (*matvec)(const double*, std::size_t, std::size_t, const double*, double*);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*ew_mul)(const double*, const double*, double*, std::size_t);
    void (*ew_step_update)(const double*, const double*, const double*, double, double*,
                           std::size_t);
};

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

// Lane selected at startup: best available, unless the DDES_ISA environment
// variable (scalar|avx2|neon) forces one.
Isa active_isa();
const char* isa_name(Isa isa);
bool isa_available(Isa isa);

// Test hook. Throws ContractError if the lane is not available on this host.
void force_isa(Isa isa);

// Dispatched entry points.
double dot(const double* a, const double* b, std::size_t n);
double sum_sq(const double* a, std::size_t n);
// sum of w[i] * a[i]^2 (weighted norms)
double weighted_sum_sq(const double* w, const double* a, std::size_t n);
// y = M x, row-major M of shape rows x cols
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);
// out = a .* b
void ew_mul(const double* a, const double* b, double* out, std::size_t n);
// c = e .* c + h * (p .* f)   (exponential-integrator modal update)
void ew_step_update(const double* e, const double* p, const double* f, double h, double* c,
                    std::size_t n);

} // namespace ddes::kernels
