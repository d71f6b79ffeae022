#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dygrag::text {

std::string_view trim(std::string_view s);

/// ASCII case fold; bytes >= 0x80 pass through untouched.
std::string fold_case(std::string_view s);

std::string collapse_whitespace(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);
bool equals_icase(std::string_view a, std::string_view b);

/// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string_view> split_whitespace(std::string_view s);

/// Lower-cased alphanumeric words with punctuation stripped from both ends.
std::vector<std::string> words(std::string_view s);

bool is_stopword(std::string_view lower_word);
bool is_month_word(std::string_view lower_word);

/// Lower-cased words minus stopwords, month names and bare numbers.
std::vector<std::string> content_words(std::string_view s);

/// FNV-1a, 64-bit. Stable across platforms; used for mock embeddings and config hashes.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t v);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

/// Strips an optional ```json fence and returns the outermost {...} span, or the input.
std::string_view extract_json_object(std::string_view s);

}  // namespace dygrag::text
