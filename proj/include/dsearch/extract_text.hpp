#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace dsearch {

inline constexpr std::size_t kDefaultDocCharBudget = 4000;

// Converts HTML (possibly malformed) to plain text: script/style/noscript
// content removed, tags stripped, entities decoded, whitespace collapsed,
// result truncated to `char_budget` characters. Idempotent: feeding the
// output back in returns it unchanged.
std::string extract_text(std::string_view html, std::size_t char_budget = kDefaultDocCharBudget);

}  // namespace dsearch
