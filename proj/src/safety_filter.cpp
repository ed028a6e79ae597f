// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdfilter/safety_filter.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "sdfilter/errors.hpp"
#include "sdfilter/simd/kernels.hpp"

namespace sdfilter {

namespace {

std::vector<float> score_against(const EmbeddingVector& image, float image_norm,
                                 const EmbeddingMatrix& concepts) {
    std::vector<float> scores(concepts.rows());
    if (concepts.empty()) {
        return scores;
    }
    simd::dot_rows(image.data(), concepts.data(), concepts.rows(), concepts.dim(), scores.data());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i] = cosine_from_parts(scores[i], image_norm, norm(concepts.row(i)));
    }
    return scores;
}

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

}  // namespace

FilterVerdict check_image(const EmbeddingVector& image_embed, const ConceptSet& set) {
    if (image_embed.dim() != set.dim()) {
        throw DimensionError(set.dim(), image_embed.dim());
    }
    const float image_norm = norm(image_embed);
    if (image_norm == 0.0f) {
        throw DegenerateVectorError();
    }

    FilterVerdict v;
    v.special_scores = score_against(image_embed, image_norm, set.special_care_matrix());
    v.special_triggered.resize(v.special_scores.size());
    bool any_special = false;
    for (std::size_t i = 0; i < v.special_scores.size(); ++i) {
        v.special_triggered[i] = v.special_scores[i] > set.special_care()[i].threshold;
        any_special = any_special || v.special_triggered[i];
    }
    v.adjustment_applied = any_special ? set.adjustment() : 0.0f;

    v.unsafe_scores = score_against(image_embed, image_norm, set.unsafe_matrix());
    for (std::size_t i = 0; i < v.unsafe_scores.size(); ++i) {
        if (v.unsafe_scores[i] > set.unsafe()[i].threshold - v.adjustment_applied) {
            v.triggered_concepts.push_back(i);
        }
    }
    v.is_unsafe = !v.triggered_concepts.empty();
    return v;
}

float effective_threshold(const FilterVerdict& v, const ConceptSet& set, std::size_t index) {
    return set.unsafe().at(index).threshold - v.adjustment_applied;
}

std::string explain_verdict(const FilterVerdict& v, const ConceptSet& set) {
    if (v.unsafe_scores.size() != set.unsafe().size() ||
        v.special_scores.size() != set.special_care().size() ||
        v.special_triggered.size() != set.special_care().size()) {
        throw ConsistencyError("verdict has " + std::to_string(v.unsafe_scores.size()) + "+" +
                               std::to_string(v.special_scores.size()) +
                               " scores but the concept set has " +
                               std::to_string(set.unsafe().size()) + "+" +
                               std::to_string(set.special_care().size()) + " concepts");
    }
    for (std::size_t i : v.triggered_concepts) {
        if (i >= set.unsafe().size()) {
            throw ConsistencyError("triggered concept index " + std::to_string(i) + " out of range");
        }
    }

    std::string out;
    out += v.is_unsafe ? "UNSAFE" : "SAFE";
    out += ": " + std::to_string(v.triggered_concepts.size()) + " of " +
           std::to_string(set.unsafe().size()) + " unsafe concepts triggered\n";

    std::string active;
    for (std::size_t i = 0; i < v.special_triggered.size(); ++i) {
        if (v.special_triggered[i]) {
            active += (active.empty() ? "" : ", ") + set.display_label(ConceptGroup::special_care, i);
        }
    }
    if (v.adjustment_applied > 0.0f) {
        out += "adjustment " + fmt("%.2f", v.adjustment_applied) + " active (special-care: " + active + ")\n";
    } else {
        out += "adjustment inactive";
        if (!active.empty()) {
            out += " (special-care " + active + " fired, set adjustment is 0)";
        }
        out += "\n";
    }

    std::vector<std::size_t> order(set.unsafe().size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto margin = [&](std::size_t i) { return v.unsafe_scores[i] - effective_threshold(v, set, i); };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return margin(a) > margin(b); });

    char line[256];
    out += "\nunsafe concepts\n";
    std::snprintf(line, sizeof line, "  %-10s %-24s %8s %10s %10s %9s\n", "status", "concept", "score",
                  "threshold", "effective", "margin");
    out += line;
    for (std::size_t i : order) {
        const bool hit = std::binary_search(v.triggered_concepts.begin(), v.triggered_concepts.end(), i);
        std::snprintf(line, sizeof line, "  %-10s %-24s %8.4f %10.4f %10.4f %+9.4f\n",
                      hit ? "TRIGGERED" : "-", set.display_label(ConceptGroup::unsafe, i).c_str(),
                      v.unsafe_scores[i], set.unsafe()[i].threshold, effective_threshold(v, set, i),
                      margin(i));
        out += line;
    }

    if (!set.special_care().empty()) {
        std::vector<std::size_t> sorder(set.special_care().size());
        std::iota(sorder.begin(), sorder.end(), std::size_t{0});
        auto smargin = [&](std::size_t i) { return v.special_scores[i] - set.special_care()[i].threshold; };
        std::stable_sort(sorder.begin(), sorder.end(),
                         [&](std::size_t a, std::size_t b) { return smargin(a) > smargin(b); });
        out += "\nspecial-care concepts\n";
        std::snprintf(line, sizeof line, "  %-10s %-24s %8s %10s %9s\n", "status", "concept", "score",
                      "threshold", "margin");
        out += line;
        for (std::size_t i : sorder) {
            std::snprintf(line, sizeof line, "  %-10s %-24s %8.4f %10.4f %+9.4f\n",
                          v.special_triggered[i] ? "ACTIVE" : "-",
                          set.display_label(ConceptGroup::special_care, i).c_str(), v.special_scores[i],
                          set.special_care()[i].threshold, smargin(i));
            out += line;
        }
    }
    return out;
}

}  // namespace sdfilter
