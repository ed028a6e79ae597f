// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dictionary attack on obfuscated concept embeddings: encode every candidate
// phrase, rank candidates by cosine similarity to each target, and report a
// preimage when the best candidate matches the target to within epsilon.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdfilter/encoders.hpp"
#include "sdfilter/vecmath.hpp"

namespace sdfilter {

/// Normalized, deduplicated candidate phrases in first-occurrence order.
struct Vocabulary {
    std::vector<std::string> entries;
    /// Source names (file paths), one per input.
    std::vector<std::string> provenance;
    /// provenance index for each entry.
    std::vector<std::size_t> source_of;

    std::size_t size() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }

    /// Appends entries from one source, normalizing (lowercase, trim, collapse
    /// whitespace) and skipping empties and duplicates.
    void add_source(std::string name, std::span<const std::string> raw_entries);
};

/// Reads newline-delimited UTF-8 wordlists; lines starting with '#' are
/// comments. Throws IoError for unreadable files and EncodingError (with the
/// 1-based line number) for invalid UTF-8.
Vocabulary load_vocabulary(std::span<const std::filesystem::path> paths);

struct Candidate {
    std::string text;
    float similarity;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct MatchReport {
    std::size_t target_index = 0;
    /// k the report was produced with; top_k may be shorter for tiny vocabularies.
    std::size_t k = 0;
    std::optional<std::string> exact_match;
    /// Sorted by similarity descending, then text ascending.
    std::vector<Candidate> top_k;

    std::optional<float> best_similarity() const {
        if (top_k.empty()) return std::nullopt;
        return top_k.front().similarity;
    }

    friend bool operator==(const MatchReport&, const MatchReport&) = default;
};

inline constexpr std::size_t kDefaultTopK = 10;
inline constexpr float kDefaultExactEpsilon = 1e-5f;

struct AttackOptions {
    std::size_t k = kDefaultTopK;
    float epsilon_exact = kDefaultExactEpsilon;
    unsigned threads = 0;
    /// Vocabulary rows per work item; small enough that a chunk stays in L2
    /// while every target is scored against it.
    std::size_t chunk_rows = 256;
};

/// Ranking order used everywhere: higher similarity first, ties by text.
bool ranks_before(const Candidate& a, const Candidate& b) noexcept;

/// A vocabulary together with its embeddings under one encoder. Building it is
/// the only step that calls the encoder; attacks reuse it across targets.
class EncodedVocabulary {
public:
    /// Encodes each entry once. Throws EncoderError on failure.
    EncodedVocabulary(const Vocabulary& vocab, const TextEncoder& encoder, unsigned threads = 0);

    const Vocabulary& vocabulary() const noexcept { return *vocab_; }
    const EmbeddingMatrix& embeddings() const noexcept { return embeddings_; }
    const std::vector<float>& norms() const noexcept { return norms_; }
    std::size_t dim() const noexcept { return embeddings_.dim(); }

private:
    const Vocabulary* vocab_;
    EmbeddingMatrix embeddings_;
    std::vector<float> norms_;
};

/// Similarity phase only: ranks the encoded vocabulary against every target.
/// Throws ParameterError for k == 0, DimensionError on dimension mismatch.
std::vector<MatchReport> dictionary_attack(std::span<const EmbeddingVector> targets,
                                           const EncodedVocabulary& encoded,
                                           const AttackOptions& options = {});

/// Encodes the vocabulary (each entry once, shared by all targets) and ranks it.
std::vector<MatchReport> dictionary_attack(std::span<const EmbeddingVector> targets,
                                           const Vocabulary& vocab, const TextEncoder& encoder,
                                           const AttackOptions& options = {});

/// Ordered two-phrase concatenations of the report's top-m candidates,
/// excluding self-pairs, in (outer rank, inner rank) order.
/// Throws ParameterError if m == 0 or m > report.k.
std::vector<std::string> compose_candidates(const MatchReport& report, std::size_t m);

/// Single-word pass, then for every target left without an exact match, adds
/// compose_candidates(report, m) to its pool and re-ranks.
std::vector<MatchReport> refine_attack(std::span<const EmbeddingVector> targets,
                                       const Vocabulary& vocab, const TextEncoder& encoder,
                                       std::size_t m, const AttackOptions& options = {});

/// Second pass of refine_attack on one report. Reports that already carry an
/// exact match are returned unchanged.
MatchReport refine_report(const MatchReport& report, const EmbeddingVector& target,
                          const TextEncoder& encoder, std::size_t m, const AttackOptions& options = {});

}  // namespace sdfilter
