#include "dsearch/text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

namespace dsearch {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

char lower_ascii(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true;  // leading whitespace dropped
    for (char c : s) {
        if (is_space(c)) {
            if (!in_ws) out.push_back(' ');
            in_ws = true;
        } else {
            out.push_back(c);
            in_ws = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

std::size_t whitespace_token_count(std::string_view s) {
    std::size_t count = 0, i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        if (i < s.size()) ++count;
        while (i < s.size() && !is_space(s[i])) ++i;
    }
    return count;
}

std::string normalize_phrase(std::string_view s) {
    return collapse_whitespace(to_lower(s));
}

std::size_t count_word_occurrences(std::string_view text, std::string_view phrase) {
    if (phrase.empty() || text.size() < phrase.size()) return 0;
    const std::string lt = to_lower(text);
    const std::string lp = to_lower(std::string(phrase));
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = lt.find(lp, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(lt[pos - 1]);
        const std::size_t end = pos + lp.size();
        const bool right_ok = end == lt.size() || !is_word_char(lt[end]);
        if (left_ok && right_ok) {
            ++count;
            pos = end;
        } else {
            ++pos;
        }
    }
    return count;
}

std::string normalize_answer(std::string_view s) {
    std::string lowered;
    lowered.reserve(s.size());
    for (char c : s) {
        if (std::ispunct(static_cast<unsigned char>(c))) continue;
        lowered.push_back(lower_ascii(c));
    }
    const auto tokens = split_whitespace(lowered);
    std::string out;
    for (const auto& tok : tokens) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

bool contains_token_subsequence(std::string_view haystack, std::string_view needle) {
    const auto h = split_whitespace(normalize_answer(haystack));
    const auto n = split_whitespace(normalize_answer(needle));
    if (n.empty()) return false;
    if (n.size() > h.size()) return false;
    for (std::size_t i = 0; i + n.size() <= h.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < n.size(); ++j) {
            if (h[i + j] != n[j]) {
                match = false;
                break;
            }
        }
        if (match) return true;
    }
    return false;
}

char32_t utf8_next(std::string_view s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    auto cont = [&](std::size_t k) {
        return k < s.size() && (byte(k) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(i + 1)) {
        char32_t cp = (static_cast<char32_t>(b0 & 0x1F) << 6) | (byte(i + 1) & 0x3F);
        i += 2;
        return cp < 0x80 ? 0xFFFD : cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
        char32_t cp = (static_cast<char32_t>(b0 & 0x0F) << 12) |
                      (static_cast<char32_t>(byte(i + 1) & 0x3F) << 6) | (byte(i + 2) & 0x3F);
        i += 3;
        return cp < 0x800 ? 0xFFFD : cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        char32_t cp = (static_cast<char32_t>(b0 & 0x07) << 18) |
                      (static_cast<char32_t>(byte(i + 1) & 0x3F) << 12) |
                      (static_cast<char32_t>(byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F);
        i += 4;
        return (cp < 0x10000 || cp > 0x10FFFF) ? 0xFFFD : cp;
    }
    ++i;
    return 0xFFFD;
}

ScriptClass script_class_of(char32_t cp) {
    auto in = [cp](char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; };
    if (in('A', 'Z') || in('a', 'z') || in(0x00C0, 0x024F) || in(0x1E00, 0x1EFF))
        return ScriptClass::latin;
    if (in(0x0400, 0x04FF) || in(0x0500, 0x052F)) return ScriptClass::cyrillic;
    if (in(0x0370, 0x03FF)) return ScriptClass::greek;
    if (in(0x0600, 0x06FF) || in(0x0750, 0x077F)) return ScriptClass::arabic;
    if (in(0x0590, 0x05FF)) return ScriptClass::hebrew;
    if (in(0x0900, 0x097F)) return ScriptClass::devanagari;
    if (in(0x4E00, 0x9FFF) || in(0x3400, 0x4DBF) || in(0xF900, 0xFAFF)) return ScriptClass::cjk;
    if (in(0x3040, 0x309F) || in(0x30A0, 0x30FF)) return ScriptClass::kana;
    if (in(0xAC00, 0xD7AF) || in(0x1100, 0x11FF)) return ScriptClass::hangul;
    // Everything else: letters we do not classify vs. non-letters. A rough
    // letter test: anything above ASCII that is not punctuation-ish.
    if (cp >= 0x80 && cp != 0xFFFD && !in(0x2000, 0x206F) && !in(0x20A0, 0x20CF) &&
        !in(0x2190, 0x2BFF) && !in(0x3000, 0x303F) && !in(0xFE30, 0xFE4F) &&
        !in(0xFF01, 0xFF20))
        return ScriptClass::other_letter;
    return ScriptClass::not_letter;
}

double ScriptShares::minority_share() const {
    if (total_letters == 0) return 0.0;
    std::vector<std::size_t> sorted = counts;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    if (sorted.size() < 2 || sorted[1] == 0) return 0.0;
    return static_cast<double>(sorted[1]) / static_cast<double>(total_letters);
}

ScriptShares script_shares(std::string_view text) {
    ScriptShares shares;
    shares.counts.assign(static_cast<std::size_t>(ScriptClass::other_letter) + 1, 0);
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = utf8_next(text, i);
        const ScriptClass cls = script_class_of(cp);
        if (cls == ScriptClass::not_letter) continue;
        if (cp < 0x80 && !std::isalpha(static_cast<int>(cp))) continue;
        ++shares.total_letters;
        ++shares.counts[static_cast<std::size_t>(cls)];
    }
    for (std::size_t c : shares.counts)
        if (c > 0) ++shares.classes_present_;
    return shares;
}

double control_char_ratio(std::string_view text) {
    if (text.empty()) return 0.0;
    std::size_t bad = 0;
    for (char ch : text) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if ((c < 0x20 && c != '\n' && c != '\r' && c != '\t') || c == 0x7F) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(text.size());
}

double repeated_ngram_share(std::string_view text, std::size_t n, std::size_t min_total) {
    const auto tokens = split_whitespace(to_lower(text));
    if (tokens.size() < n) return 0.0;
    const std::size_t total = tokens.size() - n + 1;
    if (total < min_total) return 0.0;
    std::unordered_set<std::string> seen;
    std::size_t repeats = 0;
    for (std::size_t i = 0; i < total; ++i) {
        std::string gram;
        for (std::size_t j = 0; j < n; ++j) {
            gram += tokens[i + j];
            gram.push_back('\x1F');
        }
        if (!seen.insert(gram).second) ++repeats;
    }
    return static_cast<double>(repeats) / static_cast<double>(total);
}

std::string sanitize_utf8(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const std::size_t start = i;
        const char32_t cp = utf8_next(s, i);
        if (cp == 0xFFFD && !(i - start == 3 && s.substr(start, 3) == "\xEF\xBF\xBD")) {
            out += "\xEF\xBF\xBD";
        } else {
            out.append(s.substr(start, i - start));
        }
    }
    return out;
}

}  // namespace dsearch
