#include "dsearch/mocks.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "dsearch/eval.hpp"
#include "dsearch/text.hpp"

namespace dsearch {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : s) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

namespace {

// Pulls "<label>: <text>" out of a prompt, up to end of line.
std::string field_after(const std::string& text, const std::string& label) {
    const auto pos = text.find(label);
    if (pos == std::string::npos) return "";
    const auto start = pos + label.size();
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    return trim(text.substr(start, end - start));
}

std::string question_from_request(const ChatRequest& request) {
    for (const auto& message : request.messages) {
        if (message.role != Role::user) continue;
        const std::string q = field_after(message.text, "Question:");
        if (!q.empty()) return q;
    }
    return "";
}

const std::vector<std::pair<const char*, const char*>>& domain_rules() {
    static const std::vector<std::pair<const char*, const char*>> rules = {
        {"film", "film"},     {"movie", "film"},      {"director", "film"},
        {"river", "geography"}, {"capital", "geography"}, {"mountain", "geography"},
        {"country", "geography"}, {"city", "geography"},
        {"war", "history"},   {"battle", "history"},  {"empire", "history"},
        {"element", "science"}, {"planet", "science"}, {"species", "science"},
        {"physics", "science"},
        {"team", "sports"},   {"olympic", "sports"},  {"championship", "sports"},
        {"album", "music"},   {"band", "music"},      {"composer", "music"},
        {"novel", "literature"}, {"author", "literature"}, {"poet", "literature"},
        {"software", "technology"}, {"computer", "technology"},
    };
    return rules;
}

}  // namespace

ScriptedLlmClient::Script mock_annotator_script(std::vector<std::string> labels) {
    return [labels = std::move(labels)](const ChatRequest& request) -> std::string {
        const std::string question = question_from_request(request);
        const std::string lowered = to_lower(question);

        std::string domain;
        for (const auto& [needle, label] : domain_rules()) {
            if (count_word_occurrences(lowered, needle) > 0 &&
                std::find(labels.begin(), labels.end(), label) != labels.end()) {
                domain = label;
                break;
            }
        }
        if (domain.empty() && !labels.empty())
            domain = labels[fnv1a64(question) % labels.size()];

        // Salient words double as keywords: distinct, alphabetic, length > 3.
        json keywords = json::array();
        std::unordered_set<std::string> seen;
        for (const auto& word : split_whitespace(lowered)) {
            std::string clean;
            for (char c : word)
                if (std::isalpha(static_cast<unsigned char>(c))) clean.push_back(c);
            if (clean.size() <= 3) continue;
            if (seen.insert(clean).second) keywords.push_back(clean);
            if (keywords.size() >= 4) break;
        }
        return json{{"domain", domain}, {"keywords", std::move(keywords)}}.dump();
    };
}

ScriptedLlmClient::Script mock_reasoner_script(const LoopConfig& cfg) {
    const SearchTokenPair tokens = cfg.search_tokens;
    const std::string begin_result = cfg.begin_result_token;
    const std::string end_result = cfg.end_result_token;
    return [tokens, begin_result, end_result](const ChatRequest& request) -> std::string {
        const std::string question = question_from_request(request);
        const std::uint64_t seed = request.seed.value_or(0);
        const std::uint64_t flavor = (seed + fnv1a64(question)) % 10;

        std::string context;
        if (!request.messages.empty() && request.messages.back().role == Role::assistant)
            context = request.messages.back().text;

        // Flavor 7: answers from memory without searching, usually wrongly.
        if (flavor == 7) return "I already know this one. \\boxed{off the top of my head}";

        const auto last_block_start = context.rfind(begin_result);
        if (last_block_start == std::string::npos) {
            std::string query = question;
            if (!query.empty() && query.back() == '?') query.pop_back();
            std::string reasoning = "I need outside information to answer this.\n";
            if (flavor == 4) {
                // Reflection spam; meant to trip the reasoning-path filter.
                reasoning =
                    "Hmm, wait. Alternatively, wait. Hmm, alternatively, wait, hmm... "
                    "alternatively I should check.\n";
            }
            return reasoning + tokens.begin + query + tokens.end + " leftover text";
        }

        std::string evidence = context.substr(last_block_start + begin_result.size());
        const auto block_end = evidence.find(end_result);
        if (block_end != std::string::npos) evidence.resize(block_end);

        std::string answer = field_after(evidence, "Answer:");
        const auto sentence_end = answer.find('.');
        if (sentence_end != std::string::npos) answer.resize(sentence_end);
        answer = trim(answer);
        if (answer.empty()) answer = "unknown";
        if (flavor == 5) answer = "probably " + answer + " or something else";
        return "The evidence settles it.\n\\boxed{" + answer + "}";
    };
}

ScriptedLlmClient::Script mock_summarizer_script() {
    return [](const ChatRequest& request) -> std::string {
        std::string prompt;
        for (const auto& message : request.messages)
            if (message.role == Role::user) prompt = message.text;

        std::string summary;
        std::size_t pos = 0;
        while ((pos = prompt.find("Document ", pos)) != std::string::npos) {
            const auto body_start = prompt.find('\n', pos);
            if (body_start == std::string::npos) break;
            auto body_end = prompt.find("\nDocument ", body_start);
            if (body_end == std::string::npos) body_end = prompt.size();
            std::string body = trim(prompt.substr(body_start, body_end - body_start));
            if (body.size() > 300) body.resize(300);
            if (!summary.empty()) summary += " / ";
            summary += body;
            pos = body_end;
        }
        return summary.empty() ? "The documents contained nothing usable." : summary;
    };
}

ScriptedLlmClient::Script mock_judge_script() {
    return [](const ChatRequest& request) -> std::string {
        std::string prompt;
        for (const auto& message : request.messages)
            if (message.role == Role::user) prompt = message.text;
        const std::string pred = field_after(prompt, "Predicted answer:");
        const std::string refs = field_after(prompt, "Reference answers:");

        double best = 0.0;
        std::size_t start = 0;
        while (start <= refs.size()) {
            auto sep = refs.find(" | ", start);
            const std::string ref =
                refs.substr(start, sep == std::string::npos ? std::string::npos : sep - start);
            if (!trim(ref).empty()) best = std::max(best, f1(pred, ref));
            if (sep == std::string::npos) break;
            start = sep + 3;
        }
        return best >= 0.7 ? "Correct" : "Incorrect";
    };
}

}  // namespace dsearch
