#include "dsearch/extract_text.hpp"

#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <unordered_map>

#include "dsearch/text.hpp"

namespace dsearch {

namespace {

bool iequals_at(std::string_view s, std::size_t pos, std::string_view word) {
    if (pos + word.size() > s.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[pos + i])) !=
            std::tolower(static_cast<unsigned char>(word[i])))
            return false;
    }
    return true;
}

// Matches "<tag" at pos with a proper name boundary after it.
bool is_open_tag(std::string_view s, std::size_t pos, std::string_view tag) {
    if (s[pos] != '<' || !iequals_at(s, pos + 1, tag)) return false;
    const std::size_t after = pos + 1 + tag.size();
    if (after >= s.size()) return true;
    const char c = s[after];
    return c == '>' || c == '/' || std::isspace(static_cast<unsigned char>(c));
}

// Finds the end of "</tag ... >" starting the search at `from`; returns the
// index one past the closing '>'. npos when the element never closes.
std::size_t find_close_tag_end(std::string_view s, std::size_t from, std::string_view tag) {
    std::size_t pos = from;
    while (pos + tag.size() + 2 < s.size()) {
        pos = s.find('<', pos);
        if (pos == std::string_view::npos) return std::string_view::npos;
        if (pos + 1 < s.size() && s[pos + 1] == '/' && iequals_at(s, pos + 2, tag)) {
            const std::size_t gt = s.find('>', pos);
            if (gt == std::string_view::npos) return std::string_view::npos;
            return gt + 1;
        }
        ++pos;
    }
    return std::string_view::npos;
}

std::string strip_markup(std::string_view s) {
    static constexpr std::array<std::string_view, 3> kDropContent = {"script", "style",
                                                                     "noscript"};
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '<') {
            out.push_back(s[i]);
            ++i;
            continue;
        }
        // Comment: skip to -->
        if (i + 3 < s.size() && s.compare(i, 4, "<!--") == 0) {
            const std::size_t end = s.find("-->", i + 4);
            i = end == std::string_view::npos ? s.size() : end + 3;
            out.push_back(' ');
            continue;
        }
        // Elements whose content is dropped wholesale.
        bool dropped = false;
        for (const auto tag : kDropContent) {
            if (is_open_tag(s, i, tag)) {
                const std::size_t open_end = s.find('>', i);
                if (open_end == std::string_view::npos) {
                    i = s.size();
                } else {
                    const std::size_t close = find_close_tag_end(s, open_end + 1, tag);
                    i = close == std::string_view::npos ? s.size() : close;
                }
                out.push_back(' ');
                dropped = true;
                break;
            }
        }
        if (dropped) continue;
        // Ordinary tag: '<' followed by a name, '/', '!' or '?'.
        if (i + 1 < s.size() &&
            (std::isalpha(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '/' ||
             s[i + 1] == '!' || s[i + 1] == '?')) {
            const std::size_t end = s.find('>', i);
            if (end != std::string_view::npos) {
                out.push_back(' ');
                i = end + 1;
                continue;
            }
        }
        // Stray '<' with no closing '>': keep as literal text.
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp <= 0x7F) {
        out.push_back(static_cast<char>(cp));
    } else if (cp <= 0x7FF) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp <= 0xFFFF) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp <= 0x10FFFF) {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

const std::unordered_map<std::string, std::string>& entity_table() {
    static const std::unordered_map<std::string, std::string> table = {
        {"amp", "&"},    {"lt", "<"},      {"gt", ">"},      {"quot", "\""},
        {"apos", "'"},   {"nbsp", " "},    {"copy", "©"}, {"reg", "®"},
        {"trade", "™"}, {"mdash", "—"}, {"ndash", "–"}, {"hellip", "…"},
        {"laquo", "«"}, {"raquo", "»"}, {"ldquo", "“"}, {"rdquo", "”"},
        {"lsquo", "‘"}, {"rsquo", "’"}, {"middot", "·"}, {"bull", "•"},
        {"deg", "°"},   {"sect", "§"},  {"para", "¶"},   {"micro", "µ"},
        {"times", "×"}, {"divide", "÷"},
    };
    return table;
}

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            ++i;
            continue;
        }
        const std::size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back(s[i]);
            ++i;
            continue;
        }
        const std::string_view body = s.substr(i + 1, semi - i - 1);
        if (!body.empty() && body[0] == '#') {
            char32_t cp = 0;
            bool ok = body.size() > 1;
            if (body.size() > 2 && (body[1] == 'x' || body[1] == 'X')) {
                for (std::size_t k = 2; k < body.size() && ok; ++k) {
                    const char c = body[k];
                    if (!std::isxdigit(static_cast<unsigned char>(c))) ok = false;
                    else
                        cp = cp * 16 +
                             static_cast<char32_t>(std::isdigit(static_cast<unsigned char>(c))
                                                       ? c - '0'
                                                       : std::tolower(c) - 'a' + 10);
                }
            } else {
                for (std::size_t k = 1; k < body.size() && ok; ++k) {
                    if (!std::isdigit(static_cast<unsigned char>(body[k]))) ok = false;
                    else cp = cp * 10 + static_cast<char32_t>(body[k] - '0');
                }
            }
            if (ok && cp > 0 && cp <= 0x10FFFF) {
                append_utf8(out, cp);
                i = semi + 1;
                continue;
            }
        } else {
            const auto& table = entity_table();
            const auto it = table.find(std::string(body));
            if (it != table.end()) {
                out += it->second;
                i = semi + 1;
                continue;
            }
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

}  // namespace

std::string extract_text(std::string_view html, std::size_t char_budget) {
    std::string current(html);
    // Entity decoding can surface new markup ("&lt;b&gt;" becomes "<b>"), so
    // iterate to a fixed point; every pass shrinks the string, so this
    // terminates quickly.
    for (int iter = 0; iter < 8; ++iter) {
        std::string next = collapse_whitespace(decode_entities(strip_markup(current)));
        if (next == current) break;
        current = std::move(next);
    }
    current = sanitize_utf8(current);
    if (current.size() > char_budget) {
        std::size_t cut = char_budget;
        // Back off to a UTF-8 sequence boundary.
        while (cut > 0 && (static_cast<unsigned char>(current[cut]) & 0xC0) == 0x80) --cut;
        current.erase(cut);
        current = trim(current);
    }
    return current;
}

}  // namespace dsearch
