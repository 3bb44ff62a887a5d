#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dsearch {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Collapses any run of whitespace to a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);
std::size_t whitespace_token_count(std::string_view s);

// Lowercase + trim + collapse inner whitespace. Used for keyword and
// sub-query normalization.
std::string normalize_phrase(std::string_view s);

// Case-insensitive, word-boundary-matched occurrence count of `phrase`
// inside `text`. Boundaries are non-alphanumeric characters (or the string
// ends). Phrases may contain spaces.
std::size_t count_word_occurrences(std::string_view text, std::string_view phrase);

// True iff `needle` occurs in `haystack` as a contiguous whitespace-token
// subsequence after both sides are passed through `normalize_answer`.
bool contains_token_subsequence(std::string_view haystack, std::string_view needle);

// QA answer normalization: lowercase, strip punctuation, drop the articles
// a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view s);

// -- UTF-8 / script-class helpers -----------------------------------------

// Decodes one UTF-8 code point starting at `i`; advances `i` past it.
// Malformed bytes decode to U+FFFD and advance by one byte.
char32_t utf8_next(std::string_view s, std::size_t& i);

enum class ScriptClass : std::uint8_t {
    latin,
    cyrillic,
    greek,
    arabic,
    hebrew,
    devanagari,
    cjk,
    kana,
    hangul,
    other_letter,
    not_letter,
};

ScriptClass script_class_of(char32_t cp);

struct ScriptShares {
    std::size_t total_letters = 0;
    // One slot per ScriptClass value up to other_letter.
    std::vector<std::size_t> counts;

    // Share of the second most frequent class, 0 when fewer than two
    // classes are present.
    double minority_share() const;
    std::size_t classes_present() const { return classes_present_; }
    std::size_t classes_present_ = 0;
};

ScriptShares script_shares(std::string_view text);

// Fraction of bytes that are ASCII control characters other than \n \r \t.
double control_char_ratio(std::string_view text);

// Fraction of word 4-gram occurrences that repeat an earlier 4-gram.
// Returns 0 when the text has fewer than `min_total` 4-grams.
double repeated_ngram_share(std::string_view text, std::size_t n = 4, std::size_t min_total = 8);

// Replaces invalid UTF-8 sequences with U+FFFD so downstream JSON
// serialization never sees broken byte sequences.
std::string sanitize_utf8(std::string_view s);

}  // namespace dsearch
