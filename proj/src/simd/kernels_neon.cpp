// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include <arm_neon.h>

#include <cmath>

#include "sdfilter/simd/kernels.hpp"

namespace sdfilter::simd::detail {

namespace {

inline float finish(float32x4_t acc0, float32x4_t acc1, const float* a, const float* b,
                    std::size_t i, std::size_t n) {
    if (i + 4 <= n) {
        acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
        i += 4;
    }
    float sum = vaddvq_f32(vaddq_f32(acc0, acc1));
    for (; i < n; ++i) {
        sum = std::fma(a[i], b[i], sum);
    }
    return sum;
}

}  // namespace

float dot_neon(const float* a, const float* b, std::size_t n) {
    float32x4_t acc0 = vdupq_n_f32(0.0f);
    float32x4_t acc1 = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
        acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
    }
    return finish(acc0, acc1, a, b, i, n);
}

void dot_rows_neon(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                   float* out) {
    std::size_t r = 0;
    for (; r + 2 <= n_rows; r += 2) {
        const float* r0 = rows + r * dim;
        const float* r1 = r0 + dim;
        float32x4_t a0 = vdupq_n_f32(0.0f), b0 = vdupq_n_f32(0.0f);
        float32x4_t a1 = vdupq_n_f32(0.0f), b1 = vdupq_n_f32(0.0f);
        std::size_t i = 0;
        for (; i + 8 <= dim; i += 8) {
            const float32x4_t qlo = vld1q_f32(query + i);
            const float32x4_t qhi = vld1q_f32(query + i + 4);
            a0 = vfmaq_f32(a0, qlo, vld1q_f32(r0 + i));
            b0 = vfmaq_f32(b0, qhi, vld1q_f32(r0 + i + 4));
            a1 = vfmaq_f32(a1, qlo, vld1q_f32(r1 + i));
            b1 = vfmaq_f32(b1, qhi, vld1q_f32(r1 + i + 4));
        }
        out[r] = finish(a0, b0, query, r0, i, dim);
        out[r + 1] = finish(a1, b1, query, r1, i, dim);
    }
    for (; r < n_rows; ++r) {
        out[r] = dot_neon(query, rows + r * dim, dim);
    }
}

}  // namespace sdfilter::simd::detail
