#include "hrkg/text.hpp"

#include <cstdio>

namespace hrkg::text {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string canonicalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::size_t token_count(std::string_view s) { return split_whitespace(s).size(); }

const std::unordered_set<std::string>& english_stopwords() {
  static const std::unordered_set<std::string> words = {
      "i",        "me",      "my",      "myself",  "we",        "our",     "ours",    "ourselves",
      "you",      "your",    "yours",   "yourself", "yourselves", "he",    "him",     "his",
      "himself",  "she",     "her",     "hers",    "herself",   "it",      "its",     "itself",
      "they",     "them",    "their",   "theirs",  "themselves", "what",   "which",   "who",
      "whom",     "this",    "that",    "these",   "those",     "am",      "is",      "are",
      "was",      "were",    "be",      "been",    "being",     "have",    "has",     "had",
      "having",   "do",      "does",    "did",     "doing",     "a",       "an",      "the",
      "and",      "but",     "if",      "or",      "because",   "as",      "until",   "while",
      "of",       "at",      "by",      "for",     "with",      "about",   "against", "between",
      "into",     "through", "during",  "before",  "after",     "above",   "below",   "to",
      "from",     "up",      "down",    "in",      "out",       "on",      "off",     "over",
      "under",    "again",   "further", "then",    "once",      "here",    "there",   "when",
      "where",    "why",     "how",     "all",     "any",       "both",    "each",    "few",
      "more",     "most",    "other",   "some",    "such",      "no",      "nor",     "not",
      "only",     "own",     "same",    "so",      "than",      "too",     "very",    "s",
      "t",        "can",     "will",    "just",    "don",       "should",  "now",     "d",
      "ll",       "m",       "o",       "re",      "ve",        "y",       "ain",     "aren",
      "couldn",   "didn",    "doesn",   "hadn",    "hasn",      "haven",   "isn",     "ma",
      "mightn",   "mustn",   "needn",   "shan",    "shouldn",   "wasn",    "weren",   "won",
      "wouldn",
  };
  return words;
}

std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace hrkg::text
