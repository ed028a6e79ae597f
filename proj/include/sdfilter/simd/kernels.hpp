// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Inner-product kernels behind every similarity computation.
//
// Each backend exposes the same two entry points. `dot_rows` must produce,
// for every row, exactly the bits `dot` would produce for that row alone, so
// callers may split a matrix into arbitrary chunks without changing results.
// Backends differ from each other only by floating-point summation order.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace sdfilter::simd {

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend b) noexcept;
std::optional<Backend> parse_backend(std::string_view name) noexcept;

/// Backends compiled into this binary and supported by the running CPU.
std::vector<Backend> available_backends();

/// Backend used by the dispatching entry points. Chosen on first use as the
/// widest available, unless SDFILTER_SIMD names another available backend.
Backend active_backend();

/// Overrides the dispatch choice. Returns false (and changes nothing) if the
/// backend is not available here.
bool set_active_backend(Backend b);

using DotFn = float (*)(const float* a, const float* b, std::size_t n);
using DotRowsFn = void (*)(const float* query, const float* rows, std::size_t n_rows,
                           std::size_t dim, float* out);

struct KernelTable {
    Backend backend;
    DotFn dot;
    DotRowsFn dot_rows;
};

/// Kernel table for a specific backend; nullptr if unavailable.
const KernelTable* kernels_for(Backend b);

const KernelTable& active_kernels();

inline float dot(const float* a, const float* b, std::size_t n) {
    return active_kernels().dot(a, b, n);
}

/// out[r] = dot(query, rows + r * dim) for r in [0, n_rows).
inline void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                     float* out) {
    active_kernels().dot_rows(query, rows, n_rows, dim, out);
}

namespace detail {
float dot_scalar(const float* a, const float* b, std::size_t n);
void dot_rows_scalar(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                     float* out);
#if defined(SDFILTER_HAVE_AVX2)
float dot_avx2(const float* a, const float* b, std::size_t n);
void dot_rows_avx2(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                   float* out);
#endif
#if defined(SDFILTER_HAVE_NEON)
float dot_neon(const float* a, const float* b, std::size_t n);
void dot_rows_neon(const float* query, const float* rows, std::size_t n_rows, std::size_t dim,
                   float* out);
#endif
}  // namespace detail

}  // namespace sdfilter::simd
