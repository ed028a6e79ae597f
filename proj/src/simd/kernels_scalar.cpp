// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>

#include "sdfilter/simd/kernels.hpp"

namespace sdfilter::simd::detail {

namespace {

constexpr std::size_t kLanes = 16;

}  // namespace

// Sixteen lane-wise partial sums, folded pairwise at the end.
float dot_scalar(const float* a, const float* b, std::size_t n) {
    std::array<float, kLanes> acc{};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (std::size_t l = 0; l < kLanes; ++l) {
            acc[l] += a[i + l] * b[i + l];
        }
    }
    for (std::size_t l = 0; i < n; ++i, ++l) {
        acc[l] += a[i] * b[i];
    }
    for (std::size_t width = kLanes / 2; width > 0; width /= 2) {
        for (std::size_t l = 0; l < width; ++l) {
            acc[l] += acc[l + width];
        }
    }
    return acc[0];
}

void dot_rows_scalar(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                     float* out) {
    for (std::size_t r = 0; r < n_rows; ++r) {
        out[r] = dot_scalar(query, rows + r * dim, dim);
    }
}

}  // namespace sdfilter::simd::detail
