// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdfilter/embfile.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "sdfilter/errors.hpp"
#include "sdfilter/text.hpp"

namespace sdfilter {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) {
        out.push_back(static_cast<std::uint8_t>(v >> s));
    }
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n) {
            throw FormatError("truncated", std::string("unexpected end of data in ") + what);
        }
    }

    std::uint16_t u16(const char* what) {
        need(2, what);
        const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int k = 3; k >= 0; --k) {
            v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(k)];
        }
        pos_ += 4;
        return v;
    }

    std::span<const std::uint8_t> take(std::size_t n, const char* what) {
        need(n, what);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

void check_label(const std::string& label) {
    if (label.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw FormatError("label", "label exceeds 65535 bytes");
    }
    if (!text::is_valid_utf8(label)) {
        throw FormatError("label", "label is not valid UTF-8");
    }
}

}  // namespace

EmbeddingVector EmbeddingFile::vector(std::size_t i) const {
    if (i >= size()) {
        throw std::out_of_range("EMB1 row " + std::to_string(i) + " out of range (" +
                                std::to_string(size()) + " rows)");
    }
    return vectors_.row_vector(i);
}

void EmbeddingFile::add_row(std::string label, const EmbeddingVector& v) {
    add_row(std::move(label), v.values());
}

void EmbeddingFile::add_row(std::string label, std::span<const float> v) {
    vectors_.push_back(v);
    labels_.push_back(std::move(label));
}

std::vector<std::uint8_t> serialize_emb(const EmbeddingFile& file) {
    if (file.size() > std::numeric_limits<std::uint32_t>::max() ||
        file.dim() > std::numeric_limits<std::uint32_t>::max()) {
        throw FormatError("size", "too many rows or dimensions for EMB1");
    }
    std::size_t total = kEmbHeaderBytes;
    for (const auto& l : file.labels()) {
        check_label(l);
        total += 2 + l.size() + 4 * file.dim();
    }
    std::vector<std::uint8_t> out;
    out.reserve(total);
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u32(out, kEmbVersion);
    put_u32(out, static_cast<std::uint32_t>(file.dim()));
    put_u32(out, static_cast<std::uint32_t>(file.size()));
    for (std::size_t r = 0; r < file.size(); ++r) {
        const auto& l = file.label(r);
        put_u16(out, static_cast<std::uint16_t>(l.size()));
        out.insert(out.end(), l.begin(), l.end());
        for (float x : file.row(r)) {
            put_u32(out, std::bit_cast<std::uint32_t>(x));
        }
    }
    return out;
}

EmbeddingFile parse_emb(std::span<const std::uint8_t> bytes, const EmbLoadOptions& options) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError("magic", "missing EMB1 magic");
    }
    Reader in(bytes.subspan(4));
    const std::uint32_t version = in.u32("header");
    const std::uint32_t dim = in.u32("header");
    const std::uint32_t rows = in.u32("header");
    if (version != kEmbVersion) {
        throw FormatError("version", "unsupported version " + std::to_string(version));
    }
    if (dim == 0) {
        throw FormatError("dim", "declared dimension is zero");
    }
    const std::uint64_t row_bytes = 2 + std::uint64_t{4} * dim;
    const std::uint64_t min_payload = row_bytes * rows;
    if (min_payload > options.max_bytes) {
        throw FormatError("size", "declared payload of " + std::to_string(min_payload) +
                                      " bytes exceeds cap of " + std::to_string(options.max_bytes));
    }
    if (min_payload > in.remaining()) {
        throw FormatError("truncated", "declared " + std::to_string(rows) + " rows need at least " +
                                           std::to_string(min_payload) + " bytes, have " +
                                           std::to_string(in.remaining()));
    }

    EmbeddingFile file(dim);
    std::vector<float> values(dim);
    for (std::uint32_t r = 0; r < rows; ++r) {
        const std::uint16_t len = in.u16("label length");
        auto label_bytes = in.take(len, "label");
        std::string label(reinterpret_cast<const char*>(label_bytes.data()), label_bytes.size());
        if (!text::is_valid_utf8(label)) {
            throw FormatError("label", "row " + std::to_string(r) + " label is not valid UTF-8");
        }
        auto raw = in.take(std::size_t{4} * dim, "vector");
        for (std::uint32_t k = 0; k < dim; ++k) {
            const std::uint8_t* p = raw.data() + 4 * k;
            const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                                       (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
            values[k] = std::bit_cast<float>(bits);
            if (!std::isfinite(values[k])) {
                throw FormatError("value", "row " + std::to_string(r) + " component " +
                                               std::to_string(k) + " is not finite");
            }
        }
        file.add_row(std::move(label), values);
    }
    if (in.remaining() != 0) {
        throw FormatError("trailing", std::to_string(in.remaining()) + " bytes after last row");
    }
    return file;
}

void save_emb(const EmbeddingFile& file, const std::filesystem::path& path) {
    const auto bytes = serialize_emb(file);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

EmbeddingFile load_emb(const std::filesystem::path& path, const EmbLoadOptions& options) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) {
        throw IoError("cannot read " + path.string() + ": " + ec.message());
    }
    if (size > options.max_bytes) {
        throw FormatError("size", path.string() + " is larger than the " +
                                      std::to_string(options.max_bytes) + "-byte load cap");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes(size);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (static_cast<std::uintmax_t>(in.gcount()) != size) {
        throw IoError("short read on " + path.string());
    }
    try {
        return parse_emb(bytes, options);
    } catch (const FormatError& e) {
        throw FormatError(e.reason(), path.string() + ": " + e.detail());
    }
}

}  // namespace sdfilter
