// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pcil {

/// NFC-normalised UTF-8. Invalid UTF-8 is a data error.
std::string nfc_normalize(std::string_view utf8);
/// Unicode simple case folding, for case-insensitive comparisons.
std::string case_fold(std::string_view utf8);
std::size_t code_point_count(std::string_view utf8);

std::string_view trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split_on(std::string_view text, char sep);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xCBF29CE484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace pcil
