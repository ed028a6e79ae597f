// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include <immintrin.h>

#include <cmath>

#include "sdfilter/simd/kernels.hpp"

namespace sdfilter::simd::detail {

namespace {

inline float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
}

// Per-row reduction shared by dot and dot_rows: two 8-wide FMA accumulators
// over 16-float blocks, one 8-wide step, then a scalar tail.
inline float finish(__m256 acc0, __m256 acc1, const float* a, const float* b, std::size_t i,
                    std::size_t n) {
    if (i + 8 <= n) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
        i += 8;
    }
    float sum = hsum(_mm256_add_ps(acc0, acc1));
    for (; i < n; ++i) {
        sum = std::fma(a[i], b[i], sum);
    }
    return sum;
}

}  // namespace

float dot_avx2(const float* a, const float* b, std::size_t n) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    }
    return finish(acc0, acc1, a, b, i, n);
}

void dot_rows_avx2(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                   float* out) {
    std::size_t r = 0;
    for (; r + 4 <= n_rows; r += 4) {
        const float* r0 = rows + (r + 0) * dim;
        const float* r1 = rows + (r + 1) * dim;
        const float* r2 = rows + (r + 2) * dim;
        const float* r3 = rows + (r + 3) * dim;
        __m256 a0 = _mm256_setzero_ps(), b0 = _mm256_setzero_ps();
        __m256 a1 = _mm256_setzero_ps(), b1 = _mm256_setzero_ps();
        __m256 a2 = _mm256_setzero_ps(), b2 = _mm256_setzero_ps();
        __m256 a3 = _mm256_setzero_ps(), b3 = _mm256_setzero_ps();
        std::size_t i = 0;
        for (; i + 16 <= dim; i += 16) {
            const __m256 qlo = _mm256_loadu_ps(query + i);
            const __m256 qhi = _mm256_loadu_ps(query + i + 8);
            a0 = _mm256_fmadd_ps(qlo, _mm256_loadu_ps(r0 + i), a0);
            b0 = _mm256_fmadd_ps(qhi, _mm256_loadu_ps(r0 + i + 8), b0);
            a1 = _mm256_fmadd_ps(qlo, _mm256_loadu_ps(r1 + i), a1);
            b1 = _mm256_fmadd_ps(qhi, _mm256_loadu_ps(r1 + i + 8), b1);
            a2 = _mm256_fmadd_ps(qlo, _mm256_loadu_ps(r2 + i), a2);
            b2 = _mm256_fmadd_ps(qhi, _mm256_loadu_ps(r2 + i + 8), b2);
            a3 = _mm256_fmadd_ps(qlo, _mm256_loadu_ps(r3 + i), a3);
            b3 = _mm256_fmadd_ps(qhi, _mm256_loadu_ps(r3 + i + 8), b3);
        }
        out[r + 0] = finish(a0, b0, query, r0, i, dim);
        out[r + 1] = finish(a1, b1, query, r1, i, dim);
        out[r + 2] = finish(a2, b2, query, r2, i, dim);
        out[r + 3] = finish(a3, b3, query, r3, i, dim);
    }
    for (; r < n_rows; ++r) {
        out[r] = dot_avx2(query, rows + r * dim, dim);
    }
}

}  // namespace sdfilter::simd::detail
