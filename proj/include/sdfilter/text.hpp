// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sdfilter::text {

bool is_valid_utf8(std::string_view s) noexcept;

/// Strips leading/trailing ASCII whitespace.
std::string_view trim(std::string_view s) noexcept;

/// ASCII-lowercases, trims and collapses internal whitespace runs to one space.
std::string normalize_phrase(std::string_view s);

/// Lowercased whitespace-separated words.
std::vector<std::string> split_words(std::string_view s);

}  // namespace sdfilter::text
