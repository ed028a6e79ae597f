// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdfilter {

inline constexpr std::size_t kClipDim = 768;

/// Fixed-dimension f32 embedding. Non-empty and finite; may be zero or non-unit.
class EmbeddingVector {
public:
    /// Throws DimensionError for an empty vector, NonFiniteError for NaN/Inf entries.
    explicit EmbeddingVector(std::vector<float> values);

    static EmbeddingVector zeros(std::size_t dim);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const float> values() const noexcept { return values_; }
    const float* data() const noexcept { return values_.data(); }
    float operator[](std::size_t i) const { return values_[i]; }

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    std::vector<float> values_;
};

/// Row-major matrix of equal-dimension embeddings, stored contiguously for the
/// batched kernels.
class EmbeddingMatrix {
public:
    explicit EmbeddingMatrix(std::size_t dim);
    EmbeddingMatrix(std::size_t dim, std::span<const EmbeddingVector> rows);
    /// Adopts row-major storage; data.size() must be a multiple of dim.
    EmbeddingMatrix(std::size_t dim, std::vector<float> data);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t rows() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const float> row(std::size_t i) const;
    EmbeddingVector row_vector(std::size_t i) const;
    const float* data() const noexcept { return data_.data(); }

    void reserve(std::size_t n_rows) { data_.reserve(n_rows * dim_); }
    void push_back(const EmbeddingVector& v);
    void push_back(std::span<const float> v);

private:
    std::size_t dim_;
    std::vector<float> data_;
};

class SimilarityMatrix {
public:
    SimilarityMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    float operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    float& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<float> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<float> data_;
};

struct BatchOptions {
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
    /// Target rows per work item.
    std::size_t chunk_rows = 4096;
};

float dot(const EmbeddingVector& a, const EmbeddingVector& b);
float norm(std::span<const float> v);
float norm(const EmbeddingVector& v);

/// Cosine similarity in f32, clamped to [-1, 1].
/// Throws DimensionError on mismatch and DegenerateVectorError on a zero-norm input.
float cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Combines a dot product and the two norms the same way cosine_similarity does.
float cosine_from_parts(float dot, float norm_a, float norm_b) noexcept;

EmbeddingVector normalize(const EmbeddingVector& v);

/// result(i, j) == cosine_similarity(queries[i], targets[j]) bit for bit, for
/// any BatchOptions.
SimilarityMatrix batch_similarity(const EmbeddingMatrix& queries, const EmbeddingMatrix& targets,
                                  const BatchOptions& options = {});
SimilarityMatrix batch_similarity(std::span<const EmbeddingVector> queries,
                                  std::span<const EmbeddingVector> targets,
                                  const BatchOptions& options = {});

/// Row norms via the active kernel; throws DegenerateVectorError on a zero row.
std::vector<float> row_norms(const EmbeddingMatrix& m);

namespace detail {
unsigned resolve_threads(unsigned requested) noexcept;
}  // namespace detail

}  // namespace sdfilter

#include "sdfilter/detail/parallel.hpp"
