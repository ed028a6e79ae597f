// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdfilter/concept_store.hpp"
#include "sdfilter/embfile.hpp"
#include "sdfilter/encoders.hpp"
#include "sdfilter/safety_filter.hpp"

namespace sdfilter {

// ---------------------------------------------------------------------------
// Prompt dilution
// ---------------------------------------------------------------------------

struct DilutionPoint {
    std::size_t filler_count;
    std::string text;
    /// Cosine similarity of the text embedding to the chosen concept.
    float similarity;
    /// check_image verdict for the text embedding against the whole set.
    bool verdict_unsafe;
};

struct DilutionCurve {
    std::string base_text;
    std::size_t concept_index = 0;
    /// Ascending filler_count, starting at 0.
    std::vector<DilutionPoint> points;

    /// Smallest filler count whose verdict is safe, if any.
    std::optional<std::size_t> first_safe() const;
};

/// Point j embeds `base_text` followed by the first j fillers (space-joined)
/// for j = 0..min(max_fillers, fillers.size()). Throws ParameterError for an
/// out-of-range concept index; encoder failures propagate as EncoderError.
DilutionCurve dilution_curve(std::string_view base_text, std::span<const std::string> fillers,
                             const TextEncoder& encoder, const ConceptSet& set,
                             std::size_t concept_index,
                             std::optional<std::size_t> max_fillers = std::nullopt);

std::string format_dilution_curve(const DilutionCurve& curve, const ConceptSet& set);

// ---------------------------------------------------------------------------
// Corpus evaluation
// ---------------------------------------------------------------------------

/// Exact ratio of two counts. A zero denominator means "undefined".
struct Ratio {
    std::uint64_t numerator = 0;
    std::uint64_t denominator = 0;

    bool defined() const noexcept { return denominator != 0; }
    /// numerator / denominator as f32, or nullopt when undefined.
    std::optional<float> value() const noexcept;

    friend bool operator==(const Ratio&, const Ratio&) = default;
};

struct CorpusRow {
    std::string id;
    bool labeled_unsafe;
    bool flagged;
};

struct CorpusStats {
    std::size_t n_total = 0;
    std::size_t n_flagged = 0;
    std::size_t n_labeled_unsafe = 0;
    /// flagged and labeled safe / labeled safe.
    Ratio false_positive_rate;
    /// not flagged and labeled unsafe / labeled unsafe.
    Ratio false_negative_rate;
    /// Rows that triggered each unsafe concept, in ConceptSet order.
    std::vector<std::size_t> per_concept_trigger_counts;
    /// Row-level outcomes in file order.
    std::vector<CorpusRow> rows;
};

/// Splits "<id>:<label>" at the last ':'; label must be "safe" or "unsafe".
/// Throws LabelError naming `row` otherwise.
CorpusRow parse_corpus_label(std::string_view label, std::size_t row);

/// Runs check_image on every row. Throws EmptyCorpusError for a 0-row corpus,
/// LabelError for a malformed row label, DimensionError for a dim mismatch.
CorpusStats eval_corpus(const EmbeddingFile& images, const ConceptSet& set, unsigned threads = 0);

std::string format_corpus_stats(const CorpusStats& stats, const ConceptSet& set);

}  // namespace sdfilter
