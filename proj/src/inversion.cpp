// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdfilter/inversion.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "sdfilter/errors.hpp"
#include "sdfilter/simd/kernels.hpp"
#include "sdfilter/text.hpp"

namespace sdfilter {

namespace {

struct Scored {
    float similarity;
    std::size_t index;
};

void check_options(const AttackOptions& options) {
    if (options.k == 0) {
        throw ParameterError("k must be at least 1");
    }
    if (!(options.epsilon_exact >= 0.0f)) {
        throw ParameterError("epsilon_exact must be >= 0");
    }
}

void set_exact(MatchReport& report, float epsilon) {
    report.exact_match.reset();
    if (!report.top_k.empty() && report.top_k.front().similarity >= 1.0f - epsilon) {
        report.exact_match = report.top_k.front().text;
    }
}

}  // namespace

void Vocabulary::add_source(std::string name, std::span<const std::string> raw_entries) {
    // Reserve before taking views so no reallocation moves the strings they see.
    entries.reserve(entries.size() + raw_entries.size());
    source_of.reserve(entries.capacity());
    std::unordered_set<std::string_view> seen(entries.begin(), entries.end());
    const std::size_t source = provenance.size();
    provenance.push_back(std::move(name));
    for (const auto& raw : raw_entries) {
        auto entry = text::normalize_phrase(raw);
        if (entry.empty() || seen.contains(entry)) {
            continue;
        }
        entries.push_back(std::move(entry));
        source_of.push_back(source);
        seen.insert(entries.back());
    }
}

Vocabulary load_vocabulary(std::span<const std::filesystem::path> paths) {
    Vocabulary vocab;
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw IoError("cannot open wordlist " + path.string());
        }
        std::vector<std::string> lines;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (!text::is_valid_utf8(line)) {
                throw EncodingError(path.string(), line_no);
            }
            const auto t = text::trim(line);
            if (t.empty() || t.front() == '#') {
                continue;
            }
            lines.emplace_back(t);
        }
        if (in.bad()) {
            throw IoError("failed reading wordlist " + path.string());
        }
        vocab.add_source(path.string(), lines);
    }
    return vocab;
}

bool ranks_before(const Candidate& a, const Candidate& b) noexcept {
    if (a.similarity != b.similarity) {
        return a.similarity > b.similarity;
    }
    return a.text < b.text;
}

EncodedVocabulary::EncodedVocabulary(const Vocabulary& vocab, const TextEncoder& encoder,
                                     unsigned threads)
    : vocab_(&vocab), embeddings_(encoder.encode_batch(vocab.entries, threads)) {
    norms_ = row_norms(embeddings_);
}

std::vector<MatchReport> dictionary_attack(std::span<const EmbeddingVector> targets,
                                           const EncodedVocabulary& encoded,
                                           const AttackOptions& options) {
    check_options(options);
    if (targets.empty()) {
        throw ParameterError("dictionary attack needs at least one target");
    }
    const std::size_t dim = encoded.dim();
    std::vector<float> target_norms(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (targets[t].dim() != dim) {
            throw DimensionError(dim, targets[t].dim());
        }
        target_norms[t] = norm(targets[t]);
        if (target_norms[t] == 0.0f) {
            throw DegenerateVectorError();
        }
    }

    const auto& entries = encoded.vocabulary().entries;
    const auto& rows = encoded.embeddings();
    const auto& row_norm = encoded.norms();
    const std::size_t n = rows.rows();
    const std::size_t k = options.k;
    auto before = [&](const Scored& a, const Scored& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return entries[a.index] < entries[b.index];
    };

    // best[chunk][target] holds that chunk's top-k; merged below in chunk order.
    const std::size_t chunk = std::max<std::size_t>(options.chunk_rows, 1);
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<std::vector<std::vector<Scored>>> best(n_chunks,
                                                       std::vector<std::vector<Scored>>(targets.size()));
    const auto& kern = simd::active_kernels();
    detail::parallel_chunks(n, chunk, detail::resolve_threads(options.threads),
                            [&](std::size_t begin, std::size_t end) {
                                std::vector<float> dots(end - begin);
                                std::vector<Scored> scored(end - begin);
                                for (std::size_t t = 0; t < targets.size(); ++t) {
                                    kern.dot_rows(targets[t].data(), rows.data() + begin * dim,
                                                  end - begin, dim, dots.data());
                                    for (std::size_t j = begin; j < end; ++j) {
                                        scored[j - begin] = {cosine_from_parts(dots[j - begin],
                                                                               target_norms[t], row_norm[j]),
                                                             j};
                                    }
                                    const std::size_t keep = std::min(k, scored.size());
                                    std::partial_sort(scored.begin(), scored.begin() + keep,
                                                      scored.end(), before);
                                    best[begin / chunk][t].assign(scored.begin(), scored.begin() + keep);
                                }
                            });

    std::vector<MatchReport> reports(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        std::vector<Scored> merged;
        for (const auto& per_chunk : best) {
            merged.insert(merged.end(), per_chunk[t].begin(), per_chunk[t].end());
        }
        const std::size_t keep = std::min(k, merged.size());
        std::partial_sort(merged.begin(), merged.begin() + keep, merged.end(), before);
        auto& report = reports[t];
        report.target_index = t;
        report.k = k;
        report.top_k.reserve(keep);
        for (std::size_t i = 0; i < keep; ++i) {
            report.top_k.push_back({entries[merged[i].index], merged[i].similarity});
        }
        set_exact(report, options.epsilon_exact);
    }
    return reports;
}

std::vector<MatchReport> dictionary_attack(std::span<const EmbeddingVector> targets,
                                           const Vocabulary& vocab, const TextEncoder& encoder,
                                           const AttackOptions& options) {
    check_options(options);
    if (targets.empty()) {
        throw ParameterError("dictionary attack needs at least one target");
    }
    for (const auto& t : targets) {
        if (t.dim() != encoder.dim()) {
            throw DimensionError(encoder.dim(), t.dim());
        }
    }
    const EncodedVocabulary encoded(vocab, encoder, options.threads);
    return dictionary_attack(targets, encoded, options);
}

std::vector<std::string> compose_candidates(const MatchReport& report, std::size_t m) {
    if (m == 0) {
        throw ParameterError("composition width m must be at least 1");
    }
    if (m > report.k) {
        throw ParameterError("composition width m=" + std::to_string(m) + " exceeds k=" +
                             std::to_string(report.k));
    }
    const std::size_t width = std::min(m, report.top_k.size());
    std::vector<std::string> out;
    out.reserve(width * (width > 0 ? width - 1 : 0));
    for (std::size_t i = 0; i < width; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            if (i != j) {
                out.push_back(report.top_k[i].text + " " + report.top_k[j].text);
            }
        }
    }
    return out;
}

MatchReport refine_report(const MatchReport& report, const EmbeddingVector& target,
                          const TextEncoder& encoder, std::size_t m, const AttackOptions& options) {
    check_options(options);
    if (report.exact_match) {
        return report;
    }
    if (target.dim() != encoder.dim()) {
        throw DimensionError(encoder.dim(), target.dim());
    }

    // Anything already in the vocabulary but outside top_k ranks below all of
    // top_k, so deduplicating against top_k alone is enough.
    std::unordered_set<std::string> present;
    for (const auto& c : report.top_k) {
        present.insert(c.text);
    }
    MatchReport refined = report;
    for (auto& phrase : compose_candidates(report, m)) {
        phrase = text::normalize_phrase(phrase);
        if (!present.insert(phrase).second) {
            continue;
        }
        const float sim = cosine_similarity(encoder.encode(phrase), target);
        refined.top_k.push_back({std::move(phrase), sim});
    }
    std::sort(refined.top_k.begin(), refined.top_k.end(), ranks_before);
    if (refined.top_k.size() > report.k) {
        refined.top_k.resize(report.k);
    }
    set_exact(refined, options.epsilon_exact);
    return refined;
}

std::vector<MatchReport> refine_attack(std::span<const EmbeddingVector> targets,
                                       const Vocabulary& vocab, const TextEncoder& encoder,
                                       std::size_t m, const AttackOptions& options) {
    if (m == 0 || m > options.k) {
        throw ParameterError("composition width m=" + std::to_string(m) + " must be in [1, k=" +
                             std::to_string(options.k) + "]");
    }
    auto reports = dictionary_attack(targets, vocab, encoder, options);
    for (auto& r : reports) {
        r = refine_report(r, targets[r.target_index], encoder, m, options);
    }
    return reports;
}

}  // namespace sdfilter
