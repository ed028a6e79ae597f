// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdfilter/concept_store.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

#include "sdfilter/errors.hpp"

namespace sdfilter {

namespace {

using nlohmann::json;

// Shortest decimal that round-trips to the same f32, so manifests read "0.18"
// rather than the widened double.
double manifest_number(float f) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, f);
    return std::stod(std::string(buf, res.ptr));
}

bool valid_threshold(double t) noexcept { return t > 0.0 && t < 1.0; }

void prepare(std::vector<Concept>& concepts, std::size_t dim, EmbeddingMatrix& matrix) {
    matrix.reserve(concepts.size());
    for (std::size_t i = 0; i < concepts.size(); ++i) {
        auto& c = concepts[i];
        if (c.embedding.dim() != dim) {
            throw DimensionError(dim, c.embedding.dim());
        }
        if (!valid_threshold(c.threshold)) {
            throw ParameterError("concept " + std::to_string(i) + " threshold " +
                                 std::to_string(c.threshold) + " is outside (0, 1)");
        }
        c.embedding = normalize(c.embedding);
        matrix.push_back(c.embedding);
    }
}

std::vector<Concept> read_group(const json& manifest, const char* key, const EmbeddingFile& emb) {
    std::vector<Concept> out;
    if (!manifest.contains(key)) {
        throw ManifestError(std::string("manifest is missing \"") + key + "\"");
    }
    const auto& entries = manifest.at(key);
    if (!entries.is_array()) {
        throw ManifestError(std::string("\"") + key + "\" must be an array");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("row") || !e.contains("threshold") ||
            !e.at("row").is_number_integer() || !e.at("threshold").is_number()) {
            throw ManifestError(where + " must be {\"row\": int, \"threshold\": float}");
        }
        const auto row = e.at("row").get<long long>();
        if (row < 0 || static_cast<unsigned long long>(row) >= emb.size()) {
            throw ManifestError(where + ": row " + std::to_string(row) + " out of range (file has " +
                                std::to_string(emb.size()) + " rows)");
        }
        const double threshold = e.at("threshold").get<double>();
        if (!valid_threshold(threshold)) {
            throw ManifestError(where + ": threshold " + std::to_string(threshold) +
                                " is outside (0, 1)");
        }
        const auto& label = emb.label(static_cast<std::size_t>(row));
        out.push_back(Concept{label.empty() ? std::nullopt : std::optional<std::string>(label),
                              emb.vector(static_cast<std::size_t>(row)),
                              static_cast<float>(threshold)});
    }
    return out;
}

}  // namespace

ConceptSet::ConceptSet(std::size_t dim, std::vector<Concept> unsafe, std::vector<Concept> special_care,
                       float adjustment)
    : dim_(dim),
      unsafe_(std::move(unsafe)),
      special_care_(std::move(special_care)),
      adjustment_(adjustment),
      unsafe_matrix_(dim),
      special_matrix_(dim) {
    if (!(adjustment >= 0.0f) || !std::isfinite(adjustment)) {
        throw ParameterError("adjustment must be a finite value >= 0");
    }
    prepare(unsafe_, dim_, unsafe_matrix_);
    prepare(special_care_, dim_, special_matrix_);
}

ConceptSet ConceptSet::with_adjustment(float adjustment) const {
    return ConceptSet(dim_, unsafe_, special_care_, adjustment);
}

std::string ConceptSet::display_label(ConceptGroup group, std::size_t index) const {
    const auto& list = group == ConceptGroup::unsafe ? unsafe_ : special_care_;
    const auto& c = list.at(index);
    if (c.label && !c.label->empty()) {
        return *c.label;
    }
    return "<obfuscated #" + std::to_string(index) + ">";
}

std::optional<std::size_t> ConceptSet::find_unsafe(std::string_view label) const {
    for (std::size_t i = 0; i < unsafe_.size(); ++i) {
        if (unsafe_[i].label && *unsafe_[i].label == label) {
            return i;
        }
    }
    return std::nullopt;
}

ConceptSet canonical_fixture(const TextEncoder& encoder) {
    auto build = [&](auto const& specs) {
        std::vector<Concept> out;
        out.reserve(specs.size());
        for (const auto& s : specs) {
            out.push_back(Concept{std::string(s.text), encoder.encode(s.text), s.threshold});
        }
        return out;
    };
    return ConceptSet(encoder.dim(), build(kCanonicalUnsafe), build(kCanonicalSpecialCare),
                      kDefaultAdjustment);
}

ConceptSet load_concept_set(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw IoError("cannot open manifest " + manifest_path.string());
    }
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw ManifestError(manifest_path.string() + ": invalid JSON: " + e.what());
    }
    if (!manifest.is_object()) {
        throw ManifestError(manifest_path.string() + ": manifest must be a JSON object");
    }
    if (!manifest.contains("emb_file") || !manifest.at("emb_file").is_string()) {
        throw ManifestError(manifest_path.string() + ": \"emb_file\" must be a string");
    }
    std::filesystem::path emb_path = manifest.at("emb_file").get<std::string>();
    if (emb_path.is_relative()) {
        emb_path = manifest_path.parent_path() / emb_path;
    }
    const auto emb = load_emb(emb_path);

    if (manifest.contains("dim")) {
        if (!manifest.at("dim").is_number_integer() || manifest.at("dim").get<long long>() <= 0) {
            throw ManifestError(manifest_path.string() + ": \"dim\" must be a positive integer");
        }
        const auto dim = static_cast<std::size_t>(manifest.at("dim").get<long long>());
        if (dim != emb.dim()) {
            throw DimensionError(dim, emb.dim());
        }
    }

    float adjustment = kDefaultAdjustment;
    if (manifest.contains("adjustment")) {
        if (!manifest.at("adjustment").is_number() || manifest.at("adjustment").get<double>() < 0.0) {
            throw ManifestError(manifest_path.string() + ": \"adjustment\" must be a number >= 0");
        }
        adjustment = manifest.at("adjustment").get<float>();
    }

    try {
        return ConceptSet(emb.dim(), read_group(manifest, "unsafe", emb),
                          read_group(manifest, "special_care", emb), adjustment);
    } catch (const ManifestError& e) {
        throw ManifestError(manifest_path.string() + ": " + e.what());
    }
}

void save_concept_set(const ConceptSet& set, const std::filesystem::path& manifest_path,
                      const std::filesystem::path& emb_path) {
    EmbeddingFile emb(set.dim());
    json manifest;
    manifest["dim"] = set.dim();
    manifest["emb_file"] = emb_path.filename().string();
    manifest["adjustment"] = manifest_number(set.adjustment());
    auto emit = [&](const std::vector<Concept>& group, const char* key) {
        json entries = json::array();
        for (const auto& c : group) {
            entries.push_back({{"row", emb.size()}, {"threshold", manifest_number(c.threshold)}});
            emb.add_row(c.label.value_or(""), c.embedding);
        }
        manifest[key] = std::move(entries);
    };
    emit(set.unsafe(), "unsafe");
    emit(set.special_care(), "special_care");
    save_emb(emb, emb_path);

    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + manifest_path.string() + " for writing");
    }
    out << manifest.dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing " + manifest_path.string());
    }
}

}  // namespace sdfilter
