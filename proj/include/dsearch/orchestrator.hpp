#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsearch/chat.hpp"
#include "dsearch/corpus.hpp"
#include "dsearch/search.hpp"

namespace dsearch {

// Injected verbatim when a search returns nothing, so the reasoner can
// react to the miss.
inline constexpr const char* kNoHelpfulInformation = "No helpful information found.";

// Injected when the reasoner asks for a search after the budget is spent.
inline constexpr const char* kSearchLimitNotice =
    "Search limit reached; answer with current information.";

struct SearchTokenPair {
    std::string begin = "<|begin_search_query|>";
    std::string end = "<|end_search_query|>";
};

struct PromptTemplate {
    std::string system_instructions;
    std::string user_format = "Question: {question}";

    // Plain-text rendering; this exact string is the trajectory's prompt
    // prefix and later the SFT prompt.
    std::string render(const std::string& question) const;
    std::string render_user(const std::string& question) const;
};

// System instructions wired to the given protocol tokens.
std::string standard_system_instructions(const SearchTokenPair& tokens,
                                         const std::string& begin_result,
                                         const std::string& end_result);

struct LoopConfig {
    int max_search_calls = 10;
    int max_turns = 15;
    int candidates_per_query = 10;
    ChatRequest generation;  // temperature/top_p/top_k/max_tokens defaults

    SearchTokenPair search_tokens;
    std::string begin_result_token = "<|begin_search_result|>";
    std::string end_result_token = "<|end_search_result|>";
    // Prefix of a boxed answer, up to and including the opening brace.
    std::string answer_marker = "\\boxed{";

    int search_top_k = 10;
    std::size_t doc_char_budget = 4000;
    PromptTemplate prompt;

    LoopConfig();
    void validate() const;
};

enum class SpanKind { injected_doc, injected_notice };

const char* span_kind_name(SpanKind kind);
SpanKind span_kind_from_name(const std::string& name);

// Byte range [start, end) into Trajectory::raw_text holding externally
// injected content.
struct SpanRecord {
    std::size_t start = 0;
    std::size_t end = 0;
    SpanKind kind = SpanKind::injected_doc;
};

struct SearchEvent {
    std::string query;
    std::vector<SearchResult> results;
    std::string summary;
};

struct TrajectoryTurn {
    std::string reasoning;  // model text before the search tokens, if any
    std::optional<SearchEvent> search;
    int turn_index = 0;
    bool malformed_search = false;  // begin token without a matching end
};

enum class StopReason { answered, max_searches, max_turns, max_tokens, backend_error };

const char* stop_reason_name(StopReason reason);
StopReason stop_reason_from_name(const std::string& name);

struct TrajectoryCounters {
    int search_calls = 0;
    int total_turns = 0;
    std::int64_t generated_tokens = 0;
};

struct Trajectory {
    std::string id;
    AnnotatedQuery query;
    std::vector<TrajectoryTurn> turns;
    std::optional<std::string> final_answer;  // present iff stop_reason == answered
    std::string raw_text;     // prompt + interleaved generation and injections
    std::size_t prompt_length = 0;
    std::vector<SpanRecord> spans;  // sorted, non-overlapping, above prompt_length
    StopReason stop_reason = StopReason::backend_error;
    TrajectoryCounters counters;
    std::optional<std::uint64_t> seed;
    std::string error;  // backend_error details

    std::string prompt() const { return raw_text.substr(0, prompt_length); }
    std::string completion() const { return raw_text.substr(prompt_length); }

    // Model-generated text only: completion with every injected span
    // removed. The concatenation property behind SFT masking.
    std::string generated_text() const;

    // Generated text split at injected-doc boundaries (the segments between
    // consecutive searches).
    std::vector<std::string> generated_segments() const;

    // Throws IntegrityError when spans are unsorted, overlapping or out of
    // bounds.
    void validate_spans() const;

    json to_json() const;
    static Trajectory from_json(const json& j);
};

struct ParsedSearchQuery {
    std::optional<std::string> query;
    bool malformed = false;  // begin token present but never closed
};

// Text strictly between the FIRST begin token and its end token, trimmed.
// Later pairs in the same text are ignored.
ParsedSearchQuery parse_search_query(const std::string& generated,
                                     const SearchTokenPair& tokens);

// Innermost content of the LAST well-formed boxed answer, trimmed.
std::optional<std::string> extract_final_answer(const std::string& generated,
                                                const std::string& marker);

// The summarizer prompt; each document body is truncated to
// doc_char_budget characters.
std::string summarize_prompt(const std::string& question, const std::string& sub_query,
                             const std::vector<SearchResult>& results,
                             std::size_t doc_char_budget);

// LLM summary of the retrieved documents, conditioned on the original
// question and sub-query. Empty results -> the fixed sentinel text.
std::string summarize_docs(const std::string& question, const std::string& sub_query,
                           const std::vector<SearchResult>& results, LlmClient& llm,
                           const LoopConfig& cfg);

// Runs the reason-search-summarize loop for one query.
Trajectory run_trajectory(const AnnotatedQuery& query, const LoopConfig& cfg,
                          LlmClient& reasoner, SearchClient& searcher, LlmClient& summarizer,
                          std::optional<std::uint64_t> seed = std::nullopt);

// candidates_per_query rollouts with seeds base_seed, base_seed+1, ...
// Failures become backend_error trajectories; the batch never throws.
std::vector<Trajectory> sample_candidates(const AnnotatedQuery& query, const LoopConfig& cfg,
                                          LlmClient& reasoner, SearchClient& searcher,
                                          LlmClient& summarizer,
                                          std::uint64_t base_seed = 0);

void write_trajectories_jsonl(const std::string& path, const std::vector<Trajectory>& ts);
std::vector<Trajectory> read_trajectories_jsonl(const std::string& path);

}  // namespace dsearch
