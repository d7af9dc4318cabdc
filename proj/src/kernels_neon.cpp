#if defined(__aarch64__)

#include "ddes/kernels.hpp"

#include <arm_neon.h>

namespace ddes::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double sum_sq_neon(const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        float64x2_t va = vld1q_f64(a + i);
        acc = vfmaq_f64(acc, va, va);
    }
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i) sum += a[i] * a[i];
    return sum;
}

double weighted_sum_sq_neon(const double* w, const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        float64x2_t va = vld1q_f64(a + i);
        float64x2_t vw = vld1q_f64(w + i);
        acc = vfmaq_f64(acc, vmulq_f64(vw, va), va);
    }
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i) sum += w[i] * a[i] * a[i];
    return sum;
}

void matvec_neon(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = m + r * cols;
        float64x2_t acc = vdupq_n_f64(0.0);
        std::size_t c = 0;
        for (; c + 1 < cols; c += 2) {
            acc = vfmaq_f64(acc, vld1q_f64(row + c), vld1q_f64(x + c));
        }
        double sum = vaddvq_f64(acc);
        for (; c < cols; ++c) sum += row[c] * x[c];
        y[r] = sum;
    }
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vst1q_f64(y + i, vfmaq_f64(vy, va, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void ew_mul_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void ew_step_update_neon(const double* e, const double* p, const double* f, double h, double* c,
                         std::size_t n) {
    float64x2_t vh = vdupq_n_f64(h);
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        float64x2_t nonlin = vmulq_f64(vmulq_f64(vh, vld1q_f64(p + i)), vld1q_f64(f + i));
        vst1q_f64(c + i, vfmaq_f64(nonlin, vld1q_f64(e + i), vld1q_f64(c + i)));
    }
    for (; i < n; ++i) c[i] = e[i] * c[i] + h * p[i] * f[i];
}

} // namespace

const Ops& neon_ops() {
    static const Ops ops{dot_neon,  sum_sq_neon, weighted_sum_sq_neon, matvec_neon,
                         axpy_neon, ew_mul_neon, ew_step_update_neon};
    return ops;
}

} // namespace ddes::kernels

#endif
