// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>

#include "sdfilter/simd/kernels.hpp"

namespace sdfilter::simd {

namespace {

constexpr KernelTable kScalar{Backend::scalar, &detail::dot_scalar, &detail::dot_rows_scalar};
#if defined(SDFILTER_HAVE_AVX2)
constexpr KernelTable kAvx2{Backend::avx2, &detail::dot_avx2, &detail::dot_rows_avx2};
#endif
#if defined(SDFILTER_HAVE_NEON)
constexpr KernelTable kNeon{Backend::neon, &detail::dot_neon, &detail::dot_rows_neon};
#endif

bool cpu_supports(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(SDFILTER_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::neon:
#if defined(SDFILTER_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable* pick_default() {
    if (const char* env = std::getenv("SDFILTER_SIMD")) {
        if (auto b = parse_backend(env)) {
            if (const KernelTable* t = kernels_for(*b)) {
                return t;
            }
        }
    }
    const auto backends = available_backends();
    return kernels_for(backends.back());
}

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{pick_default()};
    return slot;
}

}  // namespace

std::string_view backend_name(Backend b) noexcept {
    switch (b) {
        case Backend::scalar:
            return "scalar";
        case Backend::avx2:
            return "avx2";
        case Backend::neon:
            return "neon";
    }
    return "unknown";
}

std::optional<Backend> parse_backend(std::string_view name) noexcept {
    if (name == "scalar") return Backend::scalar;
    if (name == "avx2") return Backend::avx2;
    if (name == "neon") return Backend::neon;
    return std::nullopt;
}

std::vector<Backend> available_backends() {
    std::vector<Backend> out;
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
        if (cpu_supports(b)) {
            out.push_back(b);
        }
    }
    return out;
}

const KernelTable* kernels_for(Backend b) {
    if (!cpu_supports(b)) {
        return nullptr;
    }
    switch (b) {
        case Backend::scalar:
            return &kScalar;
#if defined(SDFILTER_HAVE_AVX2)
        case Backend::avx2:
            return &kAvx2;
#endif
#if defined(SDFILTER_HAVE_NEON)
        case Backend::neon:
            return &kNeon;
#endif
        default:
            return nullptr;
    }
}

Backend active_backend() { return active_kernels().backend; }

bool set_active_backend(Backend b) {
    const KernelTable* t = kernels_for(b);
    if (t == nullptr) {
        return false;
    }
    active_slot().store(t, std::memory_order_release);
    return true;
}

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

}  // namespace sdfilter::simd
