#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <memory>
#include <random>

#include "dsearch/errors.hpp"
#include "dsearch/orchestrator.hpp"
#include "dsearch/replay.hpp"

using namespace dsearch;

namespace {

const SearchTokenPair kTokens;  // default begin/end search query tokens

AnnotatedQuery test_query(const std::string& question = "What is the capital of France?") {
    AnnotatedQuery q;
    q.record.id = "q1";
    q.record.question = question;
    q.record.gold_answers = {"Paris"};
    q.record.source = "test";
    q.domain = "geography";
    q.keywords = {"capital", "france"};
    q.interrogative_count = 1;
    return q;
}

std::shared_ptr<FixtureSearchClient> capital_fixture() {
    auto fixture = std::make_shared<FixtureSearchClient>();
    fixture->add_fixture(
        "capital of France",
        {json{{"url", "u1"}, {"title", "France"}, {"html_or_text", "<p>Paris.</p>"}},
         json{{"url", "u2"}, {"title", "Cities"}, {"html_or_text", "Paris is the capital."}}});
    return fixture;
}

// Echoes the first document title from the summarizer prompt.
ScriptedLlmClient title_echo_summarizer() {
    return ScriptedLlmClient([](const ChatRequest& request) -> std::string {
        const std::string& prompt = request.messages.back().text;
        const auto pos = prompt.find("Document 1 (");
        if (pos == std::string::npos) return "no docs";
        const auto end = prompt.find(')', pos);
        return prompt.substr(pos + 12, end - pos - 12);
    });
}

// Wraps a script and logs exactly the text the orchestrator appends to
// raw_text (stop-sequence restoration included), so tests can verify the
// span round-trip independently.
class LoggingLlm final : public LlmClient {
public:
    LoggingLlm(ScriptedLlmClient::Script script, std::string end_token)
        : inner_(std::move(script)), end_token_(std::move(end_token)) {}

    ChatResponse chat_complete(const ChatRequest& request) override {
        ChatResponse response = inner_.chat_complete(request);
        std::string seen = response.text;
        if (response.finish_reason == FinishReason::stop_sequence) seen += end_token_;
        log.push_back(seen);
        return response;
    }

    std::vector<std::string> log;

private:
    ScriptedLlmClient inner_;
    std::string end_token_;
};

std::string concat(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += p;
    return out;
}

}  // namespace

TEST_CASE("parse_search_query") {
    const std::string begin = kTokens.begin, end = kTokens.end;

    auto parsed =
        parse_search_query("text " + begin + "capital of France" + end + " more", kTokens);
    CHECK(parsed.query == "capital of France");
    CHECK_FALSE(parsed.malformed);

    parsed = parse_search_query("no tokens here", kTokens);
    CHECK_FALSE(parsed.query.has_value());
    CHECK_FALSE(parsed.malformed);

    // First pair wins; later pairs are ignored this turn.
    parsed = parse_search_query(begin + "q1" + end + " text " + begin + "q2" + end, kTokens);
    CHECK(parsed.query == "q1");

    parsed = parse_search_query("text " + begin + "orphan", kTokens);
    CHECK_FALSE(parsed.query.has_value());
    CHECK(parsed.malformed);

    parsed = parse_search_query(begin + "  padded  " + end, kTokens);
    CHECK(parsed.query == "padded");
}

TEST_CASE("extract_final_answer") {
    CHECK(extract_final_answer("the answer is boxed{Paris}", "boxed{") == "Paris");
    CHECK_FALSE(extract_final_answer("no box", "boxed{").has_value());
    CHECK(extract_final_answer("boxed{A} then boxed{B}", "boxed{") == "B");
    CHECK(extract_final_answer("boxed{ spaced }", "boxed{") == "spaced");
    CHECK(extract_final_answer("boxed{a {nested} brace}", "boxed{") == "a {nested} brace");
    // Innermost content of the last occurrence.
    CHECK(extract_final_answer("boxed{outer boxed{inner}}", "boxed{") == "inner");
    // A trailing unbalanced box falls back to the previous well-formed one.
    CHECK(extract_final_answer("boxed{ok} boxed{broken", "boxed{") == "ok");
    CHECK_FALSE(extract_final_answer("boxed{never closed", "boxed{").has_value());
    CHECK(extract_final_answer("x \\boxed{42} y", "\\boxed{") == "42");
}

TEST_CASE("summarize_docs returns the sentinel on empty results") {
    ScriptedLlmClient unused([](const ChatRequest&) { return std::string("should not run"); });
    LoopConfig cfg;
    CHECK(summarize_docs("q", "sub", {}, unused, cfg) == kNoHelpfulInformation);
    CHECK(unused.call_count() == 0);
}

TEST_CASE("summarize_docs passes through the mock summarizer") {
    auto summarizer = title_echo_summarizer();
    LoopConfig cfg;
    SearchResult r;
    r.rank = 1;
    r.url = "u";
    r.title = "The Title";
    r.extracted_text = "body";
    CHECK(summarize_docs("q", "sub", {r}, summarizer, cfg) == "The Title");
}

TEST_CASE("summarize_prompt truncates every document to the budget") {
    std::vector<SearchResult> results;
    for (int i = 0; i < 3; ++i) {
        SearchResult r;
        r.rank = i + 1;
        r.title = "doc" + std::to_string(i);
        r.extracted_text = std::string(5000, static_cast<char>('a' + i));
        results.push_back(r);
    }
    const std::string prompt = summarize_prompt("q", "sub", results, 4000);
    for (int i = 0; i < 3; ++i) {
        const char fill = static_cast<char>('a' + i);
        std::size_t longest = 0, current = 0;
        for (char c : prompt) {
            current = (c == fill) ? current + 1 : 0;
            longest = std::max(longest, current);
        }
        CHECK(longest == 4000);  // present, but cut to the budget
    }
}

TEST_CASE("degenerate trajectory: immediate boxed answer") {
    ScriptedLlmClient reasoner(
        [](const ChatRequest&) { return std::string("I know this. \\boxed{Paris}"); });
    auto summarizer = title_echo_summarizer();
    auto search = capital_fixture();
    LoopConfig cfg;

    const Trajectory t = run_trajectory(test_query(), cfg, reasoner, *search, summarizer);
    CHECK(t.stop_reason == StopReason::answered);
    CHECK(t.counters.total_turns == 1);
    CHECK(t.counters.search_calls == 0);
    CHECK(t.final_answer == "Paris");
    CHECK(t.spans.empty());
    CHECK(t.generated_text() == "I know this. \\boxed{Paris}");
    CHECK(t.prompt() + t.completion() == t.raw_text);
}

TEST_CASE("one search then answer records exactly one injected span") {
    LoggingLlm reasoner(
        [calls = std::make_shared<int>(0)](const ChatRequest&) mutable -> std::string {
            const int i = (*calls)++;
            if (i == 0)
                return "Let me check. " + kTokens.begin + "capital of France" + kTokens.end +
                       " ignored tail";
            return "Found it. \\boxed{Paris}";
        },
        kTokens.end);
    auto summarizer = title_echo_summarizer();
    auto search = capital_fixture();
    LoopConfig cfg;

    const Trajectory t = run_trajectory(test_query(), cfg, reasoner, *search, summarizer);
    CHECK(t.stop_reason == StopReason::answered);
    CHECK(t.counters.total_turns == 2);
    CHECK(t.counters.search_calls == 1);
    REQUIRE(t.spans.size() == 1);
    CHECK(t.spans[0].kind == SpanKind::injected_doc);

    // The span bounds exactly the injected block.
    const std::string injected =
        t.raw_text.substr(t.spans[0].start, t.spans[0].end - t.spans[0].start);
    CHECK(injected.find(cfg.begin_result_token) != std::string::npos);
    CHECK(injected.find("France") != std::string::npos);  // echoed title
    CHECK(injected.find(cfg.end_result_token) != std::string::npos);

    REQUIRE(t.turns.size() == 2);
    REQUIRE(t.turns[0].search.has_value());
    CHECK(t.turns[0].search->query == "capital of France");
    CHECK(t.turns[0].search->results.size() == 2);
    CHECK(t.turns[0].search->summary == "France");
    CHECK(t.turns[0].reasoning == "Let me check. ");
    // The stop sequence ate the trailing text.
    CHECK(t.raw_text.find("ignored tail") == std::string::npos);

    // Round trip: generated text equals exactly what the reasoner produced.
    CHECK(t.generated_text() == concat(reasoner.log));
}

TEST_CASE("search every turn hits the budget then the limit notice") {
    ScriptedLlmClient reasoner([](const ChatRequest&) {
        return "more " + kTokens.begin + "capital of France" + kTokens.end;
    });
    auto summarizer = title_echo_summarizer();
    auto search = capital_fixture();
    LoopConfig cfg;  // defaults: 10 searches, 15 turns

    const Trajectory t = run_trajectory(test_query(), cfg, reasoner, *search, summarizer);
    CHECK(t.stop_reason == StopReason::max_turns);
    CHECK(t.counters.search_calls == 10);
    CHECK(t.counters.total_turns == 15);
    CHECK(t.raw_text.find(kSearchLimitNotice) != std::string::npos);

    std::size_t docs = 0, notices = 0;
    for (const auto& span : t.spans) {
        if (span.kind == SpanKind::injected_doc) ++docs;
        if (span.kind == SpanKind::injected_notice) ++notices;
    }
    CHECK(docs == 10);
    CHECK(notices == 5);
    CHECK_FALSE(t.final_answer.has_value());
}

TEST_CASE("malformed search tokens: turn kept, no search executed") {
    ScriptedLlmClient reasoner(
        [calls = std::make_shared<int>(0)](const ChatRequest&) mutable -> std::string {
            const int i = (*calls)++;
            if (i == 0) return "thinking " + kTokens.begin + "unclosed query";
            return "\\boxed{Paris}";
        });
    auto summarizer = title_echo_summarizer();
    auto search = capital_fixture();
    LoopConfig cfg;

    const Trajectory t = run_trajectory(test_query(), cfg, reasoner, *search, summarizer);
    CHECK(t.stop_reason == StopReason::answered);
    CHECK(t.counters.search_calls == 0);
    REQUIRE(t.turns.size() == 2);
    CHECK(t.turns[0].malformed_search);
    CHECK(t.raw_text.find("unclosed query") != std::string::npos);
}

TEST_CASE("protocol liveness: silent reasoner stops at max_turns") {
    ScriptedLlmClient reasoner([](const ChatRequest&) { return std::string("still thinking"); });
    auto summarizer = title_echo_summarizer();
    auto search = capital_fixture();
    LoopConfig cfg;

    const Trajectory t = run_trajectory(test_query(), cfg, reasoner, *search, summarizer);
    CHECK(t.stop_reason == StopReason::max_turns);
    CHECK(t.counters.total_turns == 15);
    CHECK_FALSE(t.final_answer.has_value());
}

TEST_CASE("token budget exhaustion stops with max_tokens") {
    ScriptedLlmClient reasoner(
        [](const ChatRequest&) { return std::string("one two three four five six seven eight"); });
    auto summarizer = title_echo_summarizer();
    auto search = capital_fixture();
    LoopConfig cfg;
    cfg.generation.max_tokens = 10;

    const Trajectory t = run_trajectory(test_query(), cfg, reasoner, *search, summarizer);
    CHECK(t.stop_reason == StopReason::max_tokens);
    CHECK(t.counters.generated_tokens == 10);
    CHECK(t.counters.total_turns == 2);
}

TEST_CASE("reasoner failure yields backend_error with partial trajectory") {
    ScriptedLlmClient reasoner(
        [calls = std::make_shared<int>(0)](const ChatRequest&) -> std::string {
            if ((*calls)++ == 1) throw TransportError("boom");
            return "step " + kTokens.begin + "capital of France" + kTokens.end;
        });
    auto summarizer = title_echo_summarizer();
    auto search = capital_fixture();
    LoopConfig cfg;

    const Trajectory t = run_trajectory(test_query(), cfg, reasoner, *search, summarizer);
    CHECK(t.stop_reason == StopReason::backend_error);
    CHECK(t.counters.total_turns == 1);
    CHECK(t.counters.search_calls == 1);
    CHECK(t.error.find("boom") != std::string::npos);
    CHECK_FALSE(t.final_answer.has_value());
}

TEST_CASE("duplicate sub-queries are re-executed but served from cache") {
    ScriptedLlmClient reasoner(
        [calls = std::make_shared<int>(0)](const ChatRequest&) mutable -> std::string {
            const int i = (*calls)++;
            if (i < 2) return "again " + kTokens.begin + "capital of France" + kTokens.end;
            return "\\boxed{Paris}";
        });
    auto summarizer = title_echo_summarizer();

    const auto dir = (std::filesystem::temp_directory_path() /
                      ("dsearch_orc_cache_" + std::to_string(::getpid())))
                         .string();
    std::filesystem::remove_all(dir);
    auto fixture = capital_fixture();
    CachedSearchClient cached(std::make_shared<ReplayArchive>(dir), CacheMode::record, fixture);

    LoopConfig cfg;
    const Trajectory t = run_trajectory(test_query(), cfg, reasoner, cached, summarizer);
    CHECK(t.stop_reason == StopReason::answered);
    CHECK(t.counters.search_calls == 2);  // both turns recorded as searches
    CHECK(fixture->call_count() == 1);    // provider hit once
}

TEST_CASE("sample_candidates") {
    LoopConfig cfg;
    auto summarizer = title_echo_summarizer();
    auto search = capital_fixture();

    SUBCASE("singleton") {
        cfg.candidates_per_query = 1;
        ScriptedLlmClient reasoner([](const ChatRequest&) { return std::string("\\boxed{x}"); });
        const auto batch = sample_candidates(test_query(), cfg, reasoner, *search, summarizer, 7);
        REQUIRE(batch.size() == 1);
        CHECK(batch[0].id == "q1#0");
        CHECK(batch[0].seed == 7);
    }

    SUBCASE("deterministic mock yields identical trajectories") {
        cfg.candidates_per_query = 10;
        ScriptedLlmClient reasoner(
            [](const ChatRequest&) { return std::string("\\boxed{Paris}"); });
        const auto batch = sample_candidates(test_query(), cfg, reasoner, *search, summarizer, 0);
        REQUIRE(batch.size() == 10);
        for (const auto& t : batch) {
            CHECK(t.raw_text == batch[0].raw_text);
            CHECK(t.stop_reason == StopReason::answered);
        }
    }

    SUBCASE("fault on one call marks exactly one trajectory") {
        cfg.candidates_per_query = 10;
        ScriptedLlmClient reasoner(
            [calls = std::make_shared<int>(0)](const ChatRequest&) -> std::string {
                if ((*calls)++ == 3) throw TransportError("injected fault");
                return "\\boxed{Paris}";
            });
        const auto batch = sample_candidates(test_query(), cfg, reasoner, *search, summarizer, 0);
        REQUIRE(batch.size() == 10);
        int errors = 0;
        for (const auto& t : batch)
            if (t.stop_reason == StopReason::backend_error) ++errors;
        CHECK(errors == 1);
        CHECK(batch[3].stop_reason == StopReason::backend_error);
    }
}

TEST_CASE("trajectory JSON round trip") {
    ScriptedLlmClient reasoner(
        [calls = std::make_shared<int>(0)](const ChatRequest&) mutable -> std::string {
            const int i = (*calls)++;
            if (i == 0) return "look " + kTokens.begin + "capital of France" + kTokens.end;
            return "\\boxed{Paris}";
        });
    auto summarizer = title_echo_summarizer();
    auto search = capital_fixture();
    LoopConfig cfg;

    const Trajectory t = run_trajectory(test_query(), cfg, reasoner, *search, summarizer, 42);
    const Trajectory back = Trajectory::from_json(t.to_json());
    CHECK(back.to_json() == t.to_json());
    CHECK(back.raw_text == t.raw_text);
    CHECK(back.generated_text() == t.generated_text());
    CHECK(back.seed == t.seed);
}

TEST_CASE("budget safety and span round-trip over random behaviors") {
    std::mt19937_64 rng(2024);
    auto summarizer = title_echo_summarizer();
    auto search = capital_fixture();
    LoopConfig cfg;

    for (int round = 0; round < 60; ++round) {
        const std::uint64_t behavior_seed = rng();
        LoggingLlm reasoner(
            [behavior_seed,
             calls = std::make_shared<int>(0)](const ChatRequest&) -> std::string {
                std::mt19937_64 local(behavior_seed + static_cast<std::uint64_t>((*calls)++));
                switch (local() % 6) {
                    case 0: return "plain reasoning text";
                    case 1:
                        return "search " + kTokens.begin + "capital of France" + kTokens.end +
                               " tail";
                    case 2: return "broken " + kTokens.begin + "never closed";
                    case 3: return "\\boxed{Paris}";
                    case 4: return "";
                    default: return "both \\boxed{X} and " + kTokens.begin + "q" + kTokens.end;
                }
            },
            kTokens.end);
        const Trajectory t = run_trajectory(test_query(), cfg, reasoner, *search, summarizer);

        CHECK(t.counters.search_calls <= cfg.max_search_calls);
        CHECK(t.counters.total_turns <= cfg.max_turns);
        CHECK(t.final_answer.has_value() == (t.stop_reason == StopReason::answered));
        CHECK(t.generated_text() == concat(reasoner.log));
        t.validate_spans();
    }
}
