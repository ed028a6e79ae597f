// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdfilter/analysis.hpp"

#include <cstdio>

#include "sdfilter/errors.hpp"

namespace sdfilter {

std::optional<std::size_t> DilutionCurve::first_safe() const {
    for (const auto& p : points) {
        if (!p.verdict_unsafe) {
            return p.filler_count;
        }
    }
    return std::nullopt;
}

DilutionCurve dilution_curve(std::string_view base_text, std::span<const std::string> fillers,
                             const TextEncoder& encoder, const ConceptSet& set,
                             std::size_t concept_index, std::optional<std::size_t> max_fillers) {
    if (concept_index >= set.unsafe().size()) {
        throw ParameterError("concept index " + std::to_string(concept_index) + " out of range (" +
                             std::to_string(set.unsafe().size()) + " unsafe concepts)");
    }
    const std::size_t n = std::min(max_fillers.value_or(fillers.size()), fillers.size());
    const auto& target = set.unsafe()[concept_index].embedding;

    DilutionCurve curve;
    curve.base_text = std::string(base_text);
    curve.concept_index = concept_index;
    curve.points.reserve(n + 1);
    std::string text(base_text);
    for (std::size_t j = 0; j <= n; ++j) {
        if (j > 0) {
            text += ' ';
            text += fillers[j - 1];
        }
        const auto embedding = encoder.encode(text);
        const auto verdict = check_image(embedding, set);
        curve.points.push_back({j, text, cosine_similarity(embedding, target), verdict.is_unsafe});
    }
    return curve;
}

std::string format_dilution_curve(const DilutionCurve& curve, const ConceptSet& set) {
    std::string out = "dilution of \"" + curve.base_text + "\" against concept " +
                      std::to_string(curve.concept_index) + " (" +
                      set.display_label(ConceptGroup::unsafe, curve.concept_index) + ", threshold ";
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.4f", set.unsafe().at(curve.concept_index).threshold);
    out += buf;
    out += ")\n";
    std::snprintf(buf, sizeof buf, "%8s %12s  %s\n", "fillers", "similarity", "verdict");
    out += buf;
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof buf, "%8zu %12.6f  %s\n", p.filler_count, p.similarity,
                      p.verdict_unsafe ? "UNSAFE" : "SAFE");
        out += buf;
    }
    return out;
}

std::optional<float> Ratio::value() const noexcept {
    if (denominator == 0) {
        return std::nullopt;
    }
    return static_cast<float>(static_cast<double>(numerator) / static_cast<double>(denominator));
}

CorpusRow parse_corpus_label(std::string_view label, std::size_t row) {
    const auto colon = label.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
        throw LabelError(row, std::string(label));
    }
    const auto kind = label.substr(colon + 1);
    CorpusRow out{std::string(label.substr(0, colon)), false, false};
    if (kind == "unsafe") {
        out.labeled_unsafe = true;
    } else if (kind != "safe") {
        throw LabelError(row, std::string(label));
    }
    return out;
}

CorpusStats eval_corpus(const EmbeddingFile& images, const ConceptSet& set, unsigned threads) {
    if (images.empty()) {
        throw EmptyCorpusError();
    }
    if (images.dim() != set.dim()) {
        throw DimensionError(set.dim(), images.dim());
    }

    CorpusStats stats;
    stats.n_total = images.size();
    stats.rows.reserve(images.size());
    for (std::size_t r = 0; r < images.size(); ++r) {
        stats.rows.push_back(parse_corpus_label(images.label(r), r));
    }

    std::vector<std::vector<std::size_t>> triggered(images.size());
    detail::parallel_chunks(images.size(), 64, detail::resolve_threads(threads),
                            [&](std::size_t begin, std::size_t end) {
                                for (std::size_t r = begin; r < end; ++r) {
                                    auto v = check_image(images.vector(r), set);
                                    stats.rows[r].flagged = v.is_unsafe;
                                    triggered[r] = std::move(v.triggered_concepts);
                                }
                            });

    stats.per_concept_trigger_counts.assign(set.unsafe().size(), 0);
    std::uint64_t safe_rows = 0, flagged_safe = 0, missed_unsafe = 0;
    for (std::size_t r = 0; r < images.size(); ++r) {
        const auto& row = stats.rows[r];
        stats.n_flagged += row.flagged;
        if (row.labeled_unsafe) {
            ++stats.n_labeled_unsafe;
            missed_unsafe += !row.flagged;
        } else {
            ++safe_rows;
            flagged_safe += row.flagged;
        }
        for (std::size_t i : triggered[r]) {
            ++stats.per_concept_trigger_counts[i];
        }
    }
    stats.false_positive_rate = {flagged_safe, safe_rows};
    stats.false_negative_rate = {missed_unsafe, stats.n_labeled_unsafe};
    return stats;
}

std::string format_corpus_stats(const CorpusStats& stats, const ConceptSet& set) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "rows              %zu\nflagged           %zu\nlabeled unsafe    %zu\n",
                  stats.n_total, stats.n_flagged, stats.n_labeled_unsafe);
    out += buf;
    auto rate_line = [&](const char* name, const Ratio& r, const char* undefined_note) {
        if (r.defined()) {
            std::snprintf(buf, sizeof buf, "%-17s %.6f (%llu/%llu)\n", name, *r.value(),
                          static_cast<unsigned long long>(r.numerator),
                          static_cast<unsigned long long>(r.denominator));
        } else {
            std::snprintf(buf, sizeof buf, "%-17s undefined (0/0, %s)\n", name, undefined_note);
        }
        out += buf;
    };
    rate_line("false positive", stats.false_positive_rate, "no safe rows");
    rate_line("false negative", stats.false_negative_rate, "no unsafe rows");
    out += "\nper-concept triggers\n";
    for (std::size_t i = 0; i < stats.per_concept_trigger_counts.size(); ++i) {
        std::snprintf(buf, sizeof buf, "  %-24s %zu\n",
                      set.display_label(ConceptGroup::unsafe, i).c_str(),
                      stats.per_concept_trigger_counts[i]);
        out += buf;
    }
    return out;
}

}  // namespace sdfilter
