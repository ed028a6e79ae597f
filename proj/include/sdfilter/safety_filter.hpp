// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sdfilter/concept_store.hpp"
#include "sdfilter/vecmath.hpp"

namespace sdfilter {

struct FilterVerdict {
    /// Cosine similarity to each unsafe concept, in ConceptSet order.
    std::vector<float> unsafe_scores;
    /// Cosine similarity to each special-care concept.
    std::vector<float> special_scores;
    std::vector<bool> special_triggered;
    /// 0, or the set's adjustment when any special-care concept fired.
    float adjustment_applied = 0.0f;
    /// Ascending indices into ConceptSet::unsafe().
    std::vector<std::size_t> triggered_concepts;
    bool is_unsafe = false;

    friend bool operator==(const FilterVerdict&, const FilterVerdict&) = default;
};

/// Two-stage decision:
///   1. special_triggered[i] = special_scores[i] > special_care[i].threshold
///   2. adjustment_applied   = set.adjustment() if any special_triggered, else 0
///   3. unsafe concept i triggers iff unsafe_scores[i] > threshold[i] - adjustment_applied
/// All comparisons are strict. Throws DimensionError / DegenerateVectorError.
FilterVerdict check_image(const EmbeddingVector& image_embed, const ConceptSet& set);

/// Threshold actually compared against for unsafe concept `index`.
float effective_threshold(const FilterVerdict& v, const ConceptSet& set, std::size_t index);

/// Plain-text report: a SAFE/UNSAFE header, the adjustment state, then every
/// concept with score, effective threshold, margin and status, ordered by
/// descending margin. Throws ConsistencyError if `v` does not match `set`.
std::string explain_verdict(const FilterVerdict& v, const ConceptSet& set);

}  // namespace sdfilter
