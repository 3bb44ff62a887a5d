#include <doctest.h>

#include <cmath>
#include <random>

#include "dsearch/eval.hpp"
#include "trajectory_builder.hpp"

using namespace dsearch;
using testutil::TrajectoryBuilder;

namespace oracle {

// Brute-force bag-overlap reference, written independently of the library:
// its own normalization pass and an O(n^2) used-flag matcher.
std::vector<std::string> norm_tokens(const std::string& s) {
    std::string cleaned;
    for (char c : s) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) cleaned.push_back(static_cast<char>(std::tolower(u)));
        else if (std::isspace(u)) cleaned.push_back(' ');
        // punctuation dropped entirely
    }
    std::vector<std::string> tokens;
    std::string word;
    for (char c : cleaned + " ") {
        if (c == ' ') {
            if (!word.empty() && word != "a" && word != "an" && word != "the")
                tokens.push_back(word);
            word.clear();
        } else {
            word.push_back(c);
        }
    }
    return tokens;
}

double f1_bruteforce(const std::string& pred, const std::string& gold) {
    const auto p = norm_tokens(pred);
    const auto g = norm_tokens(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    std::vector<bool> used(g.size(), false);
    std::size_t same = 0;
    for (const auto& token : p) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!used[i] && g[i] == token) {
                used[i] = true;
                ++same;
                break;
            }
        }
    }
    if (same == 0) return 0.0;
    const double precision = static_cast<double>(same) / static_cast<double>(p.size());
    const double recall = static_cast<double>(same) / static_cast<double>(g.size());
    return 2 * precision * recall / (precision + recall);
}

std::string random_answer(std::mt19937_64& rng) {
    static const std::vector<std::string> vocab = {
        "Obama", "barack", "the",   "a",     "an",  "PARIS", "london", "42",
        "war",   "of",     "peace", "Queen", "II.", "dr.",   "who?",   ""};
    std::string out;
    const std::size_t words = rng() % 6;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) out.push_back(' ');
        out += vocab[rng() % vocab.size()];
    }
    return out;
}

}  // namespace oracle

TEST_CASE("f1 basics") {
    CHECK(f1("Obama", "obama") == doctest::Approx(1.0));
    CHECK(f1("Paris", "London") == doctest::Approx(0.0));
    CHECK(std::abs(f1("Barack Obama", "Obama") - 2.0 / 3.0) < 1e-12);
    CHECK(f1("", "") == doctest::Approx(1.0));
    CHECK(f1("the a an", "") == doctest::Approx(1.0));  // both empty after normalization
    CHECK(f1("something", "") == doctest::Approx(0.0));
    // Multiset counting: repeated tokens only match as often as they occur.
    CHECK(f1("x x x x", "x y y y") == doctest::Approx(0.25));
}

TEST_CASE("f1 matches the brute-force oracle exactly on random pairs") {
    std::mt19937_64 rng(31337);
    for (int round = 0; round < 1000; ++round) {
        const std::string pred = oracle::random_answer(rng);
        const std::string gold = oracle::random_answer(rng);
        const double got = f1(pred, gold);
        const double expected = oracle::f1_bruteforce(pred, gold);
        REQUIRE(got == expected);  // exact equality
    }
}

TEST_CASE("f1 properties: symmetry, identity, range") {
    std::mt19937_64 rng(77);
    for (int round = 0; round < 300; ++round) {
        const std::string a = oracle::random_answer(rng);
        const std::string b = oracle::random_answer(rng);
        const double ab = f1(a, b);
        CHECK(ab == f1(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(f1(a, a) == doctest::Approx(1.0));
    }
}

TEST_CASE("best_f1") {
    CHECK(best_f1("X", {"X"}) == doctest::Approx(1.0));
    CHECK(best_f1("B", {"A", "B"}) == doctest::Approx(1.0));
    CHECK(best_f1("Obama", {"Barack Obama", "Obama"}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(best_f1("x", {}), std::invalid_argument);
}

TEST_CASE("llm_judge verdict parsing") {
    ScriptedLlmClient correct([](const ChatRequest&) { return std::string("Correct"); });
    CHECK(llm_judge("q", "p", {"g"}, correct) == true);

    ScriptedLlmClient incorrect([](const ChatRequest&) { return std::string("Incorrect."); });
    CHECK(llm_judge("q", "p", {"g"}, incorrect) == false);

    ScriptedLlmClient wrapped(
        [](const ChatRequest&) { return std::string("The answer is Correct, well done"); });
    CHECK(llm_judge("q", "p", {"g"}, wrapped) == true);

    ScriptedLlmClient gibberish([](const ChatRequest&) { return std::string("banana banana"); });
    CHECK_FALSE(llm_judge("q", "p", {"g"}, gibberish).has_value());
    CHECK(gibberish.call_count() == 2);  // one re-ask before abstaining

    // Recovers when the re-ask produces a verdict.
    ScriptedLlmClient flaky(
        [calls = std::make_shared<int>(0)](const ChatRequest&) mutable -> std::string {
            return (*calls)++ == 0 ? "hmm?" : "Incorrect";
        });
    CHECK(llm_judge("q", "p", {"g"}, flaky) == false);
}

TEST_CASE("stage_attribution") {
    // Gold only in the summary.
    const auto summary_only = TrajectoryBuilder("s1", "Where?", {"Paris"})
                                  .search_turn("the city", {"doc body, nothing here"},
                                               "the city is Paris")
                                  .answer("done")
                                  .build();
    auto flags = stage_attribution(summary_only, {"Paris"});
    CHECK_FALSE(flags.planning);
    CHECK_FALSE(flags.search);
    CHECK(flags.summarization);

    // Gold nowhere.
    const auto nowhere = TrajectoryBuilder("s2", "Where?", {"Paris"})
                             .search_turn("the city", {"doc"}, "summary")
                             .answer("done")
                             .build();
    flags = stage_attribution(nowhere, {"Paris"});
    CHECK_FALSE(flags.planning);
    CHECK_FALSE(flags.search);
    CHECK_FALSE(flags.summarization);

    // Gold in a retrieved document and quoted in reasoning.
    const auto quoted = TrajectoryBuilder("s3", "Where?", {"Paris"})
                            .search_turn("the city", {"Paris is the capital"}, "summary only")
                            .reason("The document mentions Paris\n")
                            .answer("done")
                            .build();
    flags = stage_attribution(quoted, {"Paris"});
    CHECK(flags.planning);
    CHECK(flags.search);
    CHECK_FALSE(flags.summarization);

    // Normalized contiguous matching: casing and punctuation do not matter.
    const auto cased = TrajectoryBuilder("s4", "Who?", {"Barack Obama"})
                           .reason("it was BARACK, OBAMA!\n")
                           .answer("done")
                           .build();
    CHECK(stage_attribution(cased, {"Barack Obama"}).planning);
}

TEST_CASE("stage_attribution is monotone under appended text") {
    const auto base = TrajectoryBuilder("m1", "Where?", {"Paris"})
                          .reason("the answer Paris appears\n")
                          .answer("done")
                          .build();
    const auto extended = TrajectoryBuilder("m2", "Where?", {"Paris"})
                              .reason("the answer Paris appears\n")
                              .reason("and much more unrelated text follows here\n")
                              .answer("done")
                              .build();
    CHECK(stage_attribution(base, {"Paris"}).planning);
    CHECK(stage_attribution(extended, {"Paris"}).planning);
}

namespace {

Trajectory stats_traj(const std::string& id, const std::string& generated, int searches) {
    Trajectory t;
    t.id = id;
    t.query.record.id = id;
    t.query.record.question = "q";
    t.query.record.gold_answers = {"g"};
    const std::string prompt = "PROMPT\n";
    t.raw_text = prompt + generated;
    t.prompt_length = prompt.size();
    t.counters.search_calls = searches;
    t.counters.total_turns = 1;
    t.stop_reason = StopReason::answered;
    t.final_answer = "g";
    return t;
}

std::string n_tokens(std::size_t n, std::size_t alternatively) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out.push_back(' ');
        out += i < alternatively ? "alternatively" : ("w" + std::to_string(i));
    }
    return out;
}

}  // namespace

TEST_CASE("output_stats") {
    const auto single = stats_traj("a", n_tokens(50, 2), 1);
    auto stats = output_stats({single});
    CHECK(stats.mean_reflections == doctest::Approx(2.0));
    CHECK(stats.mean_searches == doctest::Approx(1.0));
    CHECK(stats.mean_length == doctest::Approx(50.0));

    const auto first = stats_traj("b", n_tokens(10, 0), 0);
    const auto second = stats_traj("c", n_tokens(30, 4), 2);
    stats = output_stats({first, second});
    CHECK(stats.mean_reflections == doctest::Approx(2.0));
    CHECK(stats.mean_searches == doctest::Approx(1.0));
    CHECK(stats.mean_length == doctest::Approx(20.0));

    CHECK_THROWS_AS(output_stats({}), std::invalid_argument);
}

TEST_CASE("output_stats counts only the word alternatively") {
    // "wait" and "hmm" are reflections for curation but not for this table.
    const auto t = stats_traj("d", "wait hmm alternatively wait", 0);
    CHECK(output_stats({t}).mean_reflections == doctest::Approx(1.0));
}

TEST_CASE("evaluate aggregates per-item metrics") {
    const auto good = TrajectoryBuilder("e1", "Where is it?", {"Paris"})
                          .search_turn("city", {"Paris doc"}, "Paris is there")
                          .answer("Paris")
                          .build();
    const auto bad = TrajectoryBuilder("e2", "Who is it?", {"Obama"})
                         .answer("nobody knows")
                         .build();
    ScriptedLlmClient judge([](const ChatRequest& r) {
        return r.messages.back().text.find("Predicted answer: Paris") != std::string::npos
                   ? std::string("Correct")
                   : std::string("Incorrect");
    });

    EvalSelection selection;
    selection.with_judge = true;
    const EvalReport report = evaluate({good, bad}, &judge, selection);
    REQUIRE(report.items.size() == 2);
    CHECK(report.mean_f1 == doctest::Approx(0.5));
    CHECK(report.judged == 2);
    CHECK(report.judge_accuracy == doctest::Approx(0.5));
    CHECK(report.judge_abstentions == 0);
    CHECK(report.stage_rates.summarization == doctest::Approx(0.5));
    CHECK(report.aggregate_json().contains("stats"));
    CHECK_FALSE(report.to_table().empty());
}
