// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdfilter/encoders.hpp"
#include "sdfilter/vecmath.hpp"

namespace sdfilter {

inline constexpr float kDefaultAdjustment = 0.01f;

struct Concept {
    /// Absent for obfuscated concepts known only by their embedding.
    std::optional<std::string> label;
    /// Unit norm once owned by a ConceptSet.
    EmbeddingVector embedding;
    /// Cosine-similarity threshold in (0, 1).
    float threshold;
};

enum class ConceptGroup { unsafe, special_care };

/// Unsafe and special-care concepts with their thresholds and the global
/// threshold adjustment. Immutable after construction.
class ConceptSet {
public:
    /// Normalizes every embedding. Throws DimensionError if an embedding does
    /// not have `dim` components, ParameterError for a threshold outside (0, 1)
    /// or a negative adjustment, DegenerateVectorError for a zero embedding.
    ConceptSet(std::size_t dim, std::vector<Concept> unsafe, std::vector<Concept> special_care,
               float adjustment = kDefaultAdjustment);

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<Concept>& unsafe() const noexcept { return unsafe_; }
    const std::vector<Concept>& special_care() const noexcept { return special_care_; }
    float adjustment() const noexcept { return adjustment_; }

    /// Contiguous copies of the embeddings for batched scoring.
    const EmbeddingMatrix& unsafe_matrix() const noexcept { return unsafe_matrix_; }
    const EmbeddingMatrix& special_care_matrix() const noexcept { return special_matrix_; }

    ConceptSet with_adjustment(float adjustment) const;

    /// The label, or "<obfuscated #i>" when unknown.
    std::string display_label(ConceptGroup group, std::size_t index) const;

    /// Index of the unsafe concept with this label, if any.
    std::optional<std::size_t> find_unsafe(std::string_view label) const;

private:
    std::size_t dim_;
    std::vector<Concept> unsafe_;
    std::vector<Concept> special_care_;
    float adjustment_;
    EmbeddingMatrix unsafe_matrix_;
    EmbeddingMatrix special_matrix_;
};

struct ConceptSpec {
    std::string_view text;
    float threshold;
};

/// The 17 unsafe concepts recovered from the Stable Diffusion safety checker.
inline constexpr std::array<ConceptSpec, 17> kCanonicalUnsafe{{
    {"sexual", 0.18f},
    {"nude", 0.19f},
    {"sex", 0.21f},
    {"18+", 0.21f},
    {"naked", 0.19f},
    {"nsfw", 0.19f},
    {"porn", 0.19f},
    {"dick", 0.19f},
    {"vagina", 0.19f},
    {"explicit content", 0.19f},
    {"uncensored", 0.19f},
    {"fuck", 0.19f},
    {"nipples", 0.21f},
    {"naked breast", 0.21f},
    {"areola", 0.20f},
    {"naked child", 0.22f},
    {"visible nipples", 0.21f},
}};

/// The 3 special-care concepts; any of them firing lowers every unsafe threshold.
inline constexpr std::array<ConceptSpec, 3> kCanonicalSpecialCare{{
    {"young girl", 0.20f},
    {"young child", 0.22f},
    {"little girl", 0.19f},
}};

/// Canonical concept set with every string embedded by `encoder`. Encoder
/// failures propagate as EncoderError.
ConceptSet canonical_fixture(const TextEncoder& encoder);

/// Reads a JSON manifest:
///   { "dim": int, "emb_file": string, "adjustment": float,
///     "unsafe": [{"row": int, "threshold": float}, ...],
///     "special_care": [{"row": int, "threshold": float}, ...] }
/// `emb_file` is resolved relative to the manifest's directory; `row` indexes
/// it. Row labels become concept labels (empty = obfuscated).
/// Throws ManifestError for schema violations, bad rows or thresholds,
/// DimensionError when `dim` disagrees with the EMB1 file.
ConceptSet load_concept_set(const std::filesystem::path& manifest_path);

/// Writes the set as an EMB1 file (unsafe rows, then special-care rows) and a
/// manifest referencing it by file name. Inverse of load_concept_set.
void save_concept_set(const ConceptSet& set, const std::filesystem::path& manifest_path,
                      const std::filesystem::path& emb_path);

}  // namespace sdfilter
