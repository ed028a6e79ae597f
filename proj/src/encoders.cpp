// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdfilter/encoders.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "sdfilter/errors.hpp"
#include "sdfilter/text.hpp"

namespace sdfilter {

namespace detail {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace detail

namespace {

// Uniform in (0, 1]; never zero so log() stays finite.
double to_unit_open(std::uint32_t bits) noexcept { return (static_cast<double>(bits) + 1.0) / 4294967296.0; }

std::vector<float> normalized_copy(std::span<const float> v) {
    double sq = 0.0;
    for (float x : v) sq += static_cast<double>(x) * x;
    if (sq == 0.0) {
        throw DegenerateVectorError();
    }
    const double inv = 1.0 / std::sqrt(sq);
    std::vector<float> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = static_cast<float>(v[i] * inv);
    }
    return out;
}

}  // namespace

EmbeddingMatrix TextEncoder::encode_batch(std::span<const std::string> texts, unsigned threads) const {
    const std::size_t d = dim();
    std::vector<float> flat(texts.size() * d);
    detail::parallel_chunks(texts.size(), 256, detail::resolve_threads(threads),
                            [&](std::size_t begin, std::size_t end) {
                                for (std::size_t i = begin; i < end; ++i) {
                                    const auto v = encode(texts[i]);
                                    std::copy(v.values().begin(), v.values().end(),
                                              flat.begin() + static_cast<std::ptrdiff_t>(i * d));
                                }
                            });
    return EmbeddingMatrix(d, std::move(flat));
}

ToyEncoder::ToyEncoder(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {
    if (dim == 0) {
        throw DimensionError(1, 0);
    }
}

ToyEncoder::ToyEncoder(std::uint64_t seed, const EmbeddingFile& lexicon)
    : ToyEncoder(seed, lexicon.dim()) {
    for (std::size_t i = 0; i < lexicon.size(); ++i) {
        auto words = text::split_words(lexicon.label(i));
        if (words.size() != 1) {
            throw EncoderError("lexicon row " + std::to_string(i) + " label \"" + lexicon.label(i) +
                               "\" is not a single word");
        }
        auto [it, inserted] = lexicon_.emplace(std::move(words[0]), normalized_copy(lexicon.row(i)));
        if (!inserted) {
            throw DuplicateKeyError(it->first);
        }
    }
}

std::vector<float> ToyEncoder::word_vector(std::string_view word) const {
    if (auto it = lexicon_.find(std::string(word)); it != lexicon_.end()) {
        return it->second;
    }
    const std::uint64_t key = detail::splitmix64(seed_ ^ detail::splitmix64(detail::fnv1a64(word)));
    std::vector<double> g(dim_);
    for (std::size_t i = 0; i < dim_; i += 2) {
        const std::uint64_t r = detail::splitmix64(key + i / 2);
        const double u1 = to_unit_open(static_cast<std::uint32_t>(r));
        const double u2 = to_unit_open(static_cast<std::uint32_t>(r >> 32));
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        g[i] = radius * std::cos(angle);
        if (i + 1 < dim_) {
            g[i + 1] = radius * std::sin(angle);
        }
    }
    double sq = 0.0;
    for (double x : g) sq += x * x;
    const double inv = 1.0 / std::sqrt(sq);
    std::vector<float> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        out[i] = static_cast<float>(g[i] * inv);
    }
    return out;
}

EmbeddingVector ToyEncoder::encode(std::string_view text) const {
    auto words = text::split_words(text);
    if (words.empty()) {
        throw EncoderError("cannot encode empty text");
    }
    std::sort(words.begin(), words.end());
    std::vector<double> sum(dim_, 0.0);
    for (const auto& w : words) {
        const auto v = word_vector(w);
        for (std::size_t i = 0; i < dim_; ++i) {
            sum[i] += v[i];
        }
    }
    double sq = 0.0;
    for (double& x : sum) {
        x /= static_cast<double>(words.size());
        sq += x * x;
    }
    if (sq == 0.0) {
        throw EncoderError("text \"" + std::string(text) + "\" pools to a zero vector");
    }
    const double inv = 1.0 / std::sqrt(sq);
    std::vector<float> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        out[i] = static_cast<float>(sum[i] * inv);
    }
    return EmbeddingVector(std::move(out));
}

std::string ToyEncoder::describe() const {
    std::string s = "toy:" + std::to_string(seed_);
    if (dim_ != kClipDim) s += " dim=" + std::to_string(dim_);
    if (!lexicon_.empty()) s += " lexicon=" + std::to_string(lexicon_.size());
    return s;
}

CachedEncoder::CachedEncoder(const EmbeddingFile& file, std::string source)
    : dim_(file.dim()), source_(std::move(source)) {
    for (std::size_t i = 0; i < file.size(); ++i) {
        const auto key = text::trim(file.label(i));
        if (key.empty()) {
            continue;
        }
        auto v = normalize(file.vector(i));
        auto [it, inserted] = index_.emplace(std::string(key), std::move(v));
        if (!inserted) {
            throw DuplicateKeyError(it->first);
        }
    }
}

CachedEncoder CachedEncoder::from_file(const std::filesystem::path& path) {
    return CachedEncoder(load_emb(path), path.string());
}

EmbeddingVector CachedEncoder::encode(std::string_view text) const {
    const auto key = std::string(text::trim(text));
    auto it = index_.find(key);
    if (it == index_.end()) {
        throw CacheMissError(key);
    }
    return it->second;
}

bool CachedEncoder::contains(std::string_view text) const {
    return index_.contains(std::string(text::trim(text)));
}

std::string CachedEncoder::describe() const { return "cache:" + source_; }

std::unique_ptr<TextEncoder> make_encoder(std::string_view spec,
                                          const std::optional<std::filesystem::path>& lexicon) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw ParameterError("encoder spec \"" + std::string(spec) +
                             "\" must be toy:<seed> or cache:<emb1-path>");
    }
    const auto kind = spec.substr(0, colon);
    const auto arg = spec.substr(colon + 1);
    if (kind == "toy") {
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), seed);
        if (ec != std::errc{} || ptr != arg.data() + arg.size() || arg.empty()) {
            throw ParameterError("toy encoder seed \"" + std::string(arg) + "\" is not an unsigned integer");
        }
        if (lexicon) {
            return std::make_unique<ToyEncoder>(seed, load_emb(*lexicon));
        }
        return std::make_unique<ToyEncoder>(seed);
    }
    if (kind == "cache") {
        if (lexicon) {
            throw ParameterError("a lexicon only applies to the toy encoder");
        }
        if (arg.empty()) {
            throw ParameterError("cache encoder needs an EMB1 path");
        }
        return std::make_unique<CachedEncoder>(CachedEncoder::from_file(std::filesystem::path(arg)));
    }
    throw ParameterError("unknown encoder kind \"" + std::string(kind) + "\"");
}

}  // namespace sdfilter
