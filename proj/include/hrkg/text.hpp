#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace hrkg::text {

/// ASCII lowercase; bytes >= 0x80 pass through untouched.
std::string to_lower(std::string_view s);

/// Lowercase, trim, and collapse internal whitespace runs to one space.
std::string canonicalize(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

std::size_t token_count(std::string_view s);

/// Letters, digits, and any non-ASCII byte count as word characters.
inline bool is_word_char(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline bool is_letter(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// English stopword list shared by refinement and the TF-IDF vectorizer.
const std::unordered_set<std::string>& english_stopwords();

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

}  // namespace hrkg::text
