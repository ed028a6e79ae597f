// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdfilter {

/// Root of every error raised by the toolkit. The CLI maps any of these to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    DimensionError(std::size_t expected, std::size_t actual)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(actual)),
          expected_(expected),
          actual_(actual) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

class DegenerateVectorError : public Error {
public:
    DegenerateVectorError() : Error("vector has zero norm") {}
};

class NonFiniteError : public Error {
public:
    explicit NonFiniteError(std::size_t index)
        : Error("non-finite value at component " + std::to_string(index)) {}
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed EMB1 payload; `reason()` names the failed check (see parse_emb).
class FormatError : public Error {
public:
    FormatError(std::string reason, const std::string& detail)
        : Error("EMB1 format error (" + reason + "): " + detail),
          reason_(std::move(reason)),
          detail_(detail) {}

    const std::string& reason() const noexcept { return reason_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string reason_;
    std::string detail_;
};

class ManifestError : public Error {
public:
    using Error::Error;
};

class EncoderError : public Error {
public:
    using Error::Error;
};

class CacheMissError : public EncoderError {
public:
    explicit CacheMissError(const std::string& key)
        : EncoderError("cache miss for key \"" + key + "\""), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class DuplicateKeyError : public EncoderError {
public:
    explicit DuplicateKeyError(const std::string& key)
        : EncoderError("duplicate cache key \"" + key + "\""), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class EncodingError : public Error {
public:
    EncodingError(const std::string& path, std::size_t line)
        : Error(path + ":" + std::to_string(line) + ": line is not valid UTF-8"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class LabelError : public Error {
public:
    LabelError(std::size_t row, const std::string& label)
        : Error("row " + std::to_string(row) + ": malformed corpus label \"" + label +
                "\" (expected <id>:safe or <id>:unsafe)"),
          row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class EmptyCorpusError : public Error {
public:
    EmptyCorpusError() : Error("corpus has no rows") {}
};

}  // namespace sdfilter
