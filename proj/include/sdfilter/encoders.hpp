// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sdfilter/embfile.hpp"
#include "sdfilter/vecmath.hpp"

namespace sdfilter {

/// Maps text to unit-norm embeddings. Implementations are immutable after
/// construction and `encode` is safe to call concurrently.
class TextEncoder {
public:
    virtual ~TextEncoder() = default;

    virtual std::size_t dim() const noexcept = 0;

    /// Throws EncoderError (or a subclass) when the text cannot be encoded.
    virtual EmbeddingVector encode(std::string_view text) const = 0;

    /// Stable description, e.g. "toy:42".
    virtual std::string describe() const = 0;

    /// Encodes many texts into one matrix, row i for texts[i].
    virtual EmbeddingMatrix encode_batch(std::span<const std::string> texts,
                                         unsigned threads = 0) const;
};

/// Deterministic compositional stand-in for a CLIP text tower.
///
/// Each lowercased word maps to a unit vector of seeded Gaussian samples drawn
/// from a counter-based generator keyed by hash(seed, word). A text embeds as
/// the normalized mean of its word vectors, summed in sorted word order so the
/// result is bitwise independent of word order.
///
/// A lexicon may pin specific words to given directions (normalized on
/// construction); other words fall back to the seeded vectors.
class ToyEncoder final : public TextEncoder {
public:
    explicit ToyEncoder(std::uint64_t seed, std::size_t dim = kClipDim);
    ToyEncoder(std::uint64_t seed, const EmbeddingFile& lexicon);

    std::size_t dim() const noexcept override { return dim_; }
    std::uint64_t seed() const noexcept { return seed_; }
    EmbeddingVector encode(std::string_view text) const override;
    std::string describe() const override;

    /// Unit vector for a single (already lowercased) word.
    std::vector<float> word_vector(std::string_view word) const;

private:
    std::uint64_t seed_;
    std::size_t dim_;
    std::unordered_map<std::string, std::vector<float>> lexicon_;
};

/// Looks texts up in an EMB1 file whose row labels are the keys. Rows with
/// empty labels are not addressable.
class CachedEncoder final : public TextEncoder {
public:
    /// Throws DuplicateKeyError if two rows share a trimmed label and
    /// DegenerateVectorError for a zero row.
    explicit CachedEncoder(const EmbeddingFile& file, std::string source = "<memory>");

    static CachedEncoder from_file(const std::filesystem::path& path);

    std::size_t dim() const noexcept override { return dim_; }
    /// Throws CacheMissError for unknown keys.
    EmbeddingVector encode(std::string_view text) const override;
    std::string describe() const override;

    bool contains(std::string_view text) const;
    std::size_t size() const noexcept { return index_.size(); }

private:
    std::size_t dim_;
    std::string source_;
    std::unordered_map<std::string, EmbeddingVector> index_;
};

/// Parses "toy:<seed>" or "cache:<emb1-path>". A lexicon is only accepted for
/// the toy encoder. Throws ParameterError for malformed specs.
std::unique_ptr<TextEncoder> make_encoder(std::string_view spec,
                                          const std::optional<std::filesystem::path>& lexicon = {});

namespace detail {
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view s) noexcept;
}  // namespace detail

}  // namespace sdfilter
