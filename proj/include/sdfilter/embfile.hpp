// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// EMB1: labeled f32 embedding matrices on disk.
//
// Little-endian throughout:
//
//   offset  size  field
//   0       4     magic "EMB1"
//   4       4     u32 version (= 1)
//   8       4     u32 dim (> 0)
//   12      4     u32 row_count
//   16      ...   row_count x { u16 label_len; label_len bytes UTF-8; dim x f32 }
//
// An empty label marks an obfuscated row (embedding known, text unknown).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sdfilter/vecmath.hpp"

namespace sdfilter {

inline constexpr std::uint32_t kEmbVersion = 1;
inline constexpr std::size_t kEmbHeaderBytes = 16;
inline constexpr std::uint64_t kDefaultEmbLoadCap = std::uint64_t{2} << 30;

class EmbeddingFile {
public:
    explicit EmbeddingFile(std::size_t dim) : vectors_(dim) {}

    std::size_t dim() const noexcept { return vectors_.dim(); }
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }

    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    EmbeddingVector vector(std::size_t i) const;
    std::span<const float> row(std::size_t i) const { return vectors_.row(i); }
    const EmbeddingMatrix& matrix() const noexcept { return vectors_; }

    void add_row(std::string label, const EmbeddingVector& v);
    void add_row(std::string label, std::span<const float> v);

private:
    std::vector<std::string> labels_;
    EmbeddingMatrix vectors_;
};

struct EmbLoadOptions {
    /// Upper bound on the payload a header may declare.
    std::uint64_t max_bytes = kDefaultEmbLoadCap;
};

/// Byte-exact EMB1 encoding. Throws FormatError("label") for labels that are
/// longer than 65535 bytes or not UTF-8.
std::vector<std::uint8_t> serialize_emb(const EmbeddingFile& file);

/// Inverse of serialize_emb. FormatError reasons: "magic", "version", "dim",
/// "size", "truncated", "trailing", "label", "value".
EmbeddingFile parse_emb(std::span<const std::uint8_t> bytes, const EmbLoadOptions& options = {});

/// Throws IoError when the file cannot be written.
void save_emb(const EmbeddingFile& file, const std::filesystem::path& path);

/// Throws IoError when the file cannot be read, FormatError when it is malformed.
EmbeddingFile load_emb(const std::filesystem::path& path, const EmbLoadOptions& options = {});

}  // namespace sdfilter
