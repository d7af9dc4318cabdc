#if defined(__x86_64__) || defined(_M_X64)

#include "ddes/kernels.hpp"

#include <immintrin.h>

namespace ddes::kernels {

namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 3 < n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_fmadd_pd(va, vb, acc);
    }
    double sum = hsum(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double sum_sq_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 3 < n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(va, va, acc);
    }
    double sum = hsum(acc);
    for (; i < n; ++i) sum += a[i] * a[i];
    return sum;
}

double weighted_sum_sq_avx2(const double* w, const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 3 < n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vw = _mm256_loadu_pd(w + i);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(vw, va), va, acc);
    }
    double sum = hsum(acc);
    for (; i < n; ++i) sum += w[i] * a[i] * a[i];
    return sum;
}

void matvec_avx2(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = m + r * cols;
        __m256d acc = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 3 < cols; c += 4) {
            __m256d vm = _mm256_loadu_pd(row + c);
            __m256d vx = _mm256_loadu_pd(x + c);
            acc = _mm256_fmadd_pd(vm, vx, acc);
        }
        double sum = hsum(acc);
        for (; c < cols; ++c) sum += row[c] * x[c];
        y[r] = sum;
    }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 3 < n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, vx, vy));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void ew_mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 3 < n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(va, vb));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void ew_step_update_avx2(const double* e, const double* p, const double* f, double h, double* c,
                         std::size_t n) {
    __m256d vh = _mm256_set1_pd(h);
    std::size_t i = 0;
    for (; i + 3 < n; i += 4) {
        __m256d ve = _mm256_loadu_pd(e + i);
        __m256d vp = _mm256_loadu_pd(p + i);
        __m256d vf = _mm256_loadu_pd(f + i);
        __m256d vc = _mm256_loadu_pd(c + i);
        __m256d nonlin = _mm256_mul_pd(_mm256_mul_pd(vh, vp), vf);
        _mm256_storeu_pd(c + i, _mm256_fmadd_pd(ve, vc, nonlin));
    }
    for (; i < n; ++i) c[i] = e[i] * c[i] + h * p[i] * f[i];
}

} // namespace

const Ops& avx2_ops() {
    static const Ops ops{dot_avx2,  sum_sq_avx2, weighted_sum_sq_avx2, matvec_avx2,
                         axpy_avx2, ew_mul_avx2, ew_step_update_avx2};
    return ops;
}

} // namespace ddes::kernels

#endif
