#include "dsearch/orchestrator.hpp"

#include <algorithm>
#include <stdexcept>

#include "dsearch/errors.hpp"
#include "dsearch/text.hpp"

namespace dsearch {

namespace {

std::string replace_all(std::string text, const std::string& needle, const std::string& repl) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), repl);
        pos += repl.size();
    }
    return text;
}

}  // namespace

std::string PromptTemplate::render_user(const std::string& question) const {
    return replace_all(user_format, "{question}", question);
}

std::string PromptTemplate::render(const std::string& question) const {
    return system_instructions + "\n\n" + render_user(question) + "\n";
}

std::string standard_system_instructions(const SearchTokenPair& tokens,
                                         const std::string& begin_result,
                                         const std::string& end_result) {
    return "You answer questions by reasoning step by step and searching the web when you "
           "need outside information. To search, write the query between " +
           tokens.begin + " and " + tokens.end +
           " and stop; the retrieved information will appear between " + begin_result +
           " and " + end_result +
           ". Search as often as needed, one query at a time. When you know the answer, "
           "finish with it inside \\boxed{}.";
}

LoopConfig::LoopConfig() {
    generation.messages = {{Role::user, ""}};  // placeholder; rebuilt per turn
    prompt.system_instructions =
        standard_system_instructions(search_tokens, begin_result_token, end_result_token);
}

void LoopConfig::validate() const {
    if (max_search_calls < 1) throw ConfigError("loop.max_search_calls", "must be >= 1");
    if (max_turns < 1) throw ConfigError("loop.max_turns", "must be >= 1");
    if (max_search_calls > max_turns)
        throw ConfigError("loop.max_search_calls", "must be <= loop.max_turns");
    if (candidates_per_query < 1)
        throw ConfigError("loop.candidates_per_query", "must be >= 1");
    if (search_top_k < 1) throw ConfigError("loop.search_top_k", "must be >= 1");
    if (search_tokens.begin.empty() || search_tokens.end.empty())
        throw ConfigError("loop.search_tokens", "must be non-empty");
}

const char* span_kind_name(SpanKind kind) {
    return kind == SpanKind::injected_doc ? "injected_doc" : "injected_notice";
}

SpanKind span_kind_from_name(const std::string& name) {
    if (name == "injected_doc") return SpanKind::injected_doc;
    if (name == "injected_notice") return SpanKind::injected_notice;
    throw std::invalid_argument("unknown span kind: " + name);
}

const char* stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::answered: return "answered";
        case StopReason::max_searches: return "max_searches";
        case StopReason::max_turns: return "max_turns";
        case StopReason::max_tokens: return "max_tokens";
        case StopReason::backend_error: return "backend_error";
    }
    return "backend_error";
}

StopReason stop_reason_from_name(const std::string& name) {
    if (name == "answered") return StopReason::answered;
    if (name == "max_searches") return StopReason::max_searches;
    if (name == "max_turns") return StopReason::max_turns;
    if (name == "max_tokens") return StopReason::max_tokens;
    if (name == "backend_error") return StopReason::backend_error;
    throw std::invalid_argument("unknown stop reason: " + name);
}

void Trajectory::validate_spans() const {
    std::size_t previous_end = prompt_length;
    for (const auto& span : spans) {
        if (span.start < previous_end)
            throw IntegrityError("trajectory " + id + ": spans overlap or are unsorted");
        if (span.end <= span.start || span.end > raw_text.size())
            throw IntegrityError("trajectory " + id + ": span out of bounds");
        previous_end = span.end;
    }
}

std::string Trajectory::generated_text() const {
    validate_spans();
    std::string out;
    std::size_t pos = prompt_length;
    for (const auto& span : spans) {
        out += raw_text.substr(pos, span.start - pos);
        pos = span.end;
    }
    out += raw_text.substr(pos);
    return out;
}

std::vector<std::string> Trajectory::generated_segments() const {
    validate_spans();
    std::vector<std::string> segments;
    std::string current;
    std::size_t pos = prompt_length;
    for (const auto& span : spans) {
        current += raw_text.substr(pos, span.start - pos);
        pos = span.end;
        if (span.kind == SpanKind::injected_doc) {
            segments.push_back(std::move(current));
            current.clear();
        }
    }
    current += raw_text.substr(pos);
    segments.push_back(std::move(current));
    return segments;
}

json Trajectory::to_json() const {
    json turns_json = json::array();
    for (const auto& turn : turns) {
        json t{{"turn_index", turn.turn_index},
               {"reasoning", turn.reasoning},
               {"malformed_search", turn.malformed_search}};
        if (turn.search) {
            t["search"] = json{{"query", turn.search->query},
                               {"results", search_results_to_json(turn.search->results)},
                               {"summary", turn.search->summary}};
        }
        turns_json.push_back(std::move(t));
    }
    json spans_json = json::array();
    for (const auto& span : spans)
        spans_json.push_back(
            {{"start", span.start}, {"end", span.end}, {"kind", span_kind_name(span.kind)}});

    json j{{"id", id},
           {"query", query.to_json()},
           {"turns", std::move(turns_json)},
           {"raw_text", raw_text},
           {"prompt_length", prompt_length},
           {"spans", std::move(spans_json)},
           {"stop_reason", stop_reason_name(stop_reason)},
           {"counters",
            {{"search_calls", counters.search_calls},
             {"total_turns", counters.total_turns},
             {"generated_tokens", counters.generated_tokens}}}};
    if (final_answer) j["final_answer"] = *final_answer;
    if (seed) j["seed"] = *seed;
    if (!error.empty()) j["error"] = error;
    return j;
}

Trajectory Trajectory::from_json(const json& j) {
    Trajectory t;
    t.id = j.at("id").get<std::string>();
    t.query = AnnotatedQuery::from_json(j.at("query"));
    for (const auto& tj : j.at("turns")) {
        TrajectoryTurn turn;
        turn.turn_index = tj.at("turn_index").get<int>();
        turn.reasoning = tj.at("reasoning").get<std::string>();
        turn.malformed_search = tj.value("malformed_search", false);
        if (tj.contains("search")) {
            SearchEvent event;
            event.query = tj.at("search").at("query").get<std::string>();
            event.results = search_results_from_json(tj.at("search").at("results"));
            event.summary = tj.at("search").at("summary").get<std::string>();
            turn.search = std::move(event);
        }
        t.turns.push_back(std::move(turn));
    }
    t.raw_text = j.at("raw_text").get<std::string>();
    t.prompt_length = j.at("prompt_length").get<std::size_t>();
    for (const auto& sj : j.at("spans")) {
        SpanRecord span;
        span.start = sj.at("start").get<std::size_t>();
        span.end = sj.at("end").get<std::size_t>();
        span.kind = span_kind_from_name(sj.at("kind").get<std::string>());
        t.spans.push_back(span);
    }
    t.stop_reason = stop_reason_from_name(j.at("stop_reason").get<std::string>());
    t.counters.search_calls = j.at("counters").at("search_calls").get<int>();
    t.counters.total_turns = j.at("counters").at("total_turns").get<int>();
    t.counters.generated_tokens = j.at("counters").at("generated_tokens").get<std::int64_t>();
    if (j.contains("final_answer")) t.final_answer = j.at("final_answer").get<std::string>();
    if (j.contains("seed")) t.seed = j.at("seed").get<std::uint64_t>();
    t.error = j.value("error", "");
    return t;
}

ParsedSearchQuery parse_search_query(const std::string& generated,
                                     const SearchTokenPair& tokens) {
    ParsedSearchQuery parsed;
    const auto begin = generated.find(tokens.begin);
    if (begin == std::string::npos) return parsed;
    const auto content_start = begin + tokens.begin.size();
    const auto end = generated.find(tokens.end, content_start);
    if (end == std::string::npos) {
        parsed.malformed = true;
        return parsed;
    }
    parsed.query = trim(generated.substr(content_start, end - content_start));
    return parsed;
}

std::optional<std::string> extract_final_answer(const std::string& generated,
                                                const std::string& marker) {
    if (marker.empty()) return std::nullopt;
    std::size_t pos = generated.rfind(marker);
    while (pos != std::string::npos) {
        // Balanced-brace scan from the marker's opening brace.
        int depth = 1;
        for (std::size_t i = pos + marker.size(); i < generated.size(); ++i) {
            if (generated[i] == '{') ++depth;
            else if (generated[i] == '}' && --depth == 0)
                return trim(generated.substr(pos + marker.size(), i - pos - marker.size()));
        }
        if (pos == 0) break;
        pos = generated.rfind(marker, pos - 1);
    }
    return std::nullopt;
}

std::string summarize_prompt(const std::string& question, const std::string& sub_query,
                             const std::vector<SearchResult>& results,
                             std::size_t doc_char_budget) {
    std::string prompt =
        "Summarize the evidence in the documents below that helps answer the search query, "
        "keeping only facts relevant to the original question. If nothing helps, say so.\n\n"
        "Original question: " +
        question + "\nSearch query: " + sub_query + "\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        std::string body = results[i].extracted_text;
        if (body.size() > doc_char_budget) body.resize(doc_char_budget);
        prompt += "\nDocument " + std::to_string(i + 1) + " (" + results[i].title + "):\n" +
                  body + "\n";
    }
    return prompt;
}

std::string summarize_docs(const std::string& question, const std::string& sub_query,
                           const std::vector<SearchResult>& results, LlmClient& llm,
                           const LoopConfig& cfg) {
    if (results.empty()) return kNoHelpfulInformation;
    ChatRequest request;
    request.messages = {{Role::system, "You condense web search results into evidence notes."},
                        {Role::user, summarize_prompt(question, sub_query, results,
                                                      cfg.doc_char_budget)}};
    request.temperature = cfg.generation.temperature;
    request.top_p = cfg.generation.top_p;
    request.top_k = cfg.generation.top_k;
    request.max_tokens = cfg.generation.max_tokens;
    return llm.chat_complete(request).text;
}

namespace {

// Appends externally injected text to raw_text and records its span.
void inject_block(Trajectory& t, const std::string& content, SpanKind kind,
                  const LoopConfig& cfg) {
    const std::string block =
        "\n" + cfg.begin_result_token + "\n" + content + "\n" + cfg.end_result_token + "\n";
    SpanRecord span;
    span.start = t.raw_text.size();
    span.end = span.start + block.size();
    span.kind = kind;
    t.raw_text += block;
    t.spans.push_back(span);
}

ChatRequest build_request(const Trajectory& t, const LoopConfig& cfg,
                          std::optional<std::uint64_t> seed) {
    ChatRequest request;
    request.messages = {{Role::system, cfg.prompt.system_instructions},
                        {Role::user, cfg.prompt.render_user(t.query.record.question)}};
    const std::string accumulated = t.completion();
    if (!accumulated.empty()) request.messages.push_back({Role::assistant, accumulated});
    request.temperature = cfg.generation.temperature;
    request.top_p = cfg.generation.top_p;
    request.top_k = cfg.generation.top_k;
    const std::int64_t remaining =
        static_cast<std::int64_t>(cfg.generation.max_tokens) - t.counters.generated_tokens;
    request.max_tokens = static_cast<int>(std::max<std::int64_t>(1, remaining));
    request.stop_sequences = {cfg.search_tokens.end};
    request.seed = seed;
    return request;
}

std::string reasoning_prefix(const std::string& generated, const SearchTokenPair& tokens) {
    const auto begin = generated.find(tokens.begin);
    if (begin == std::string::npos) return generated;
    return generated.substr(0, begin);
}

}  // namespace

Trajectory run_trajectory(const AnnotatedQuery& query, const LoopConfig& cfg,
                          LlmClient& reasoner, SearchClient& searcher, LlmClient& summarizer,
                          std::optional<std::uint64_t> seed) {
    cfg.validate();

    Trajectory t;
    t.id = query.record.id;
    t.query = query;
    t.seed = seed;
    t.raw_text = cfg.prompt.render(query.record.question);
    t.prompt_length = t.raw_text.size();
    t.stop_reason = StopReason::max_turns;

    for (int turn = 0; turn < cfg.max_turns; ++turn) {
        ChatRequest request = build_request(t, cfg, seed);
        ChatResponse response;
        try {
            response = reasoner.chat_complete(request);
        } catch (const std::exception& e) {
            t.stop_reason = StopReason::backend_error;
            t.error = e.what();
            break;
        }

        std::string generated = response.text;
        // The serving backend strips the matched stop sequence; the only
        // configured turn stop is the end-search token, so restore it.
        if (response.finish_reason == FinishReason::stop_sequence)
            generated += cfg.search_tokens.end;

        t.raw_text += generated;
        t.counters.generated_tokens += response.usage.completion_tokens;
        t.counters.total_turns = turn + 1;

        TrajectoryTurn record;
        record.turn_index = turn;
        record.reasoning = reasoning_prefix(generated, cfg.search_tokens);

        const ParsedSearchQuery parsed = parse_search_query(generated, cfg.search_tokens);
        record.malformed_search = parsed.malformed;

        if (parsed.query && t.counters.search_calls < cfg.max_search_calls) {
            ++t.counters.search_calls;
            SearchEvent event;
            event.query = *parsed.query;
            try {
                event.results = searcher.search(event.query, cfg.search_top_k);
                event.summary = summarize_docs(query.record.question, event.query,
                                               event.results, summarizer, cfg);
            } catch (const std::exception& e) {
                t.turns.push_back(std::move(record));
                t.stop_reason = StopReason::backend_error;
                t.error = e.what();
                return t;
            }
            inject_block(t, event.summary, SpanKind::injected_doc, cfg);
            record.search = std::move(event);
            t.turns.push_back(std::move(record));
        } else {
            const auto answer = extract_final_answer(generated, cfg.answer_marker);
            if (answer) {
                t.final_answer = answer;
                t.stop_reason = StopReason::answered;
                t.turns.push_back(std::move(record));
                break;
            }
            if (parsed.query) {
                // Budget exhausted: tell the model instead of searching.
                inject_block(t, kSearchLimitNotice, SpanKind::injected_notice, cfg);
            }
            t.turns.push_back(std::move(record));
        }

        if (response.finish_reason == FinishReason::length ||
            t.counters.generated_tokens >= cfg.generation.max_tokens) {
            t.stop_reason = StopReason::max_tokens;
            break;
        }
    }
    return t;
}

std::vector<Trajectory> sample_candidates(const AnnotatedQuery& query, const LoopConfig& cfg,
                                          LlmClient& reasoner, SearchClient& searcher,
                                          LlmClient& summarizer, std::uint64_t base_seed) {
    std::vector<Trajectory> candidates;
    candidates.reserve(static_cast<std::size_t>(cfg.candidates_per_query));
    for (int i = 0; i < cfg.candidates_per_query; ++i) {
        Trajectory t;
        try {
            t = run_trajectory(query, cfg, reasoner, searcher, summarizer,
                               base_seed + static_cast<std::uint64_t>(i));
        } catch (const std::exception& e) {
            t.query = query;
            t.stop_reason = StopReason::backend_error;
            t.error = e.what();
            t.raw_text = cfg.prompt.render(query.record.question);
            t.prompt_length = t.raw_text.size();
        }
        t.id = query.record.id + "#" + std::to_string(i);
        candidates.push_back(std::move(t));
    }
    return candidates;
}

void write_trajectories_jsonl(const std::string& path, const std::vector<Trajectory>& ts) {
    std::vector<json> rows;
    rows.reserve(ts.size());
    for (const auto& t : ts) rows.push_back(t.to_json());
    write_jsonl(path, rows);
}

std::vector<Trajectory> read_trajectories_jsonl(const std::string& path) {
    std::vector<Trajectory> out;
    for (const auto& row : read_jsonl(path)) out.push_back(Trajectory::from_json(row));
    return out;
}

}  // namespace dsearch
