// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdfilter/vecmath.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "sdfilter/errors.hpp"
#include "sdfilter/simd/kernels.hpp"

namespace sdfilter {

EmbeddingVector::EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw DimensionError(1, 0);
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw NonFiniteError(i);
        }
    }
}

EmbeddingVector EmbeddingVector::zeros(std::size_t dim) {
    return EmbeddingVector(std::vector<float>(dim, 0.0f));
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim) : dim_(dim) {
    if (dim == 0) {
        throw DimensionError(1, 0);
    }
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::span<const EmbeddingVector> rows)
    : EmbeddingMatrix(dim) {
    reserve(rows.size());
    for (const auto& r : rows) {
        push_back(r);
    }
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::vector<float> data) : EmbeddingMatrix(dim) {
    if (data.size() % dim != 0) {
        throw DimensionError(dim, data.size() % dim);
    }
    data_ = std::move(data);
}

std::span<const float> EmbeddingMatrix::row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
}

EmbeddingVector EmbeddingMatrix::row_vector(std::size_t i) const {
    auto r = row(i);
    return EmbeddingVector(std::vector<float>(r.begin(), r.end()));
}

void EmbeddingMatrix::push_back(const EmbeddingVector& v) { push_back(v.values()); }

void EmbeddingMatrix::push_back(std::span<const float> v) {
    if (v.size() != dim_) {
        throw DimensionError(dim_, v.size());
    }
    data_.insert(data_.end(), v.begin(), v.end());
}

float dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw DimensionError(a.dim(), b.dim());
    }
    return simd::dot(a.data(), b.data(), a.dim());
}

float norm(std::span<const float> v) { return std::sqrt(simd::dot(v.data(), v.data(), v.size())); }

float norm(const EmbeddingVector& v) { return norm(v.values()); }

float cosine_from_parts(float dot, float norm_a, float norm_b) noexcept {
    const float c = dot / (norm_a * norm_b);
    return std::clamp(c, -1.0f, 1.0f);
}

float cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw DimensionError(a.dim(), b.dim());
    }
    const float na = norm(a);
    const float nb = norm(b);
    if (na == 0.0f || nb == 0.0f) {
        throw DegenerateVectorError();
    }
    return cosine_from_parts(simd::dot(a.data(), b.data(), a.dim()), na, nb);
}

EmbeddingVector normalize(const EmbeddingVector& v) {
    const float n = norm(v);
    if (n == 0.0f) {
        throw DegenerateVectorError();
    }
    std::vector<float> out(v.values().begin(), v.values().end());
    for (float& x : out) {
        x /= n;
    }
    return EmbeddingVector(std::move(out));
}

std::vector<float> row_norms(const EmbeddingMatrix& m) {
    std::vector<float> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out[i] = norm(m.row(i));
        if (out[i] == 0.0f) {
            throw DegenerateVectorError();
        }
    }
    return out;
}

namespace detail {
unsigned resolve_threads(unsigned requested) noexcept {
    if (requested != 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}
}  // namespace detail

SimilarityMatrix batch_similarity(const EmbeddingMatrix& queries, const EmbeddingMatrix& targets,
                                  const BatchOptions& options) {
    if (queries.dim() != targets.dim()) {
        throw DimensionError(queries.dim(), targets.dim());
    }
    const std::size_t dim = queries.dim();
    const auto qn = row_norms(queries);
    const auto tn = row_norms(targets);
    SimilarityMatrix out(queries.rows(), targets.rows());
    const auto& k = simd::active_kernels();

    detail::parallel_chunks(
        targets.rows(), options.chunk_rows, detail::resolve_threads(options.threads),
        [&](std::size_t begin, std::size_t end) {
            std::vector<float> dots(end - begin);
            for (std::size_t i = 0; i < queries.rows(); ++i) {
                k.dot_rows(queries.row(i).data(), targets.data() + begin * dim, end - begin, dim,
                           dots.data());
                auto dst = out.row(i);
                for (std::size_t j = begin; j < end; ++j) {
                    dst[j] = cosine_from_parts(dots[j - begin], qn[i], tn[j]);
                }
            }
        });
    return out;
}

SimilarityMatrix batch_similarity(std::span<const EmbeddingVector> queries,
                                  std::span<const EmbeddingVector> targets,
                                  const BatchOptions& options) {
    if (queries.empty() || targets.empty()) {
        return SimilarityMatrix(queries.size(), targets.size());
    }
    const std::size_t dim = queries.front().dim();
    return batch_similarity(EmbeddingMatrix(dim, queries), EmbeddingMatrix(dim, targets), options);
}

}  // namespace sdfilter
