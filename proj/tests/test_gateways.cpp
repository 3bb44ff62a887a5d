#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <thread>

#include "dsearch/chat.hpp"
#include "dsearch/errors.hpp"
#include "dsearch/extract_text.hpp"
#include "dsearch/http_gateways.hpp"
#include "dsearch/replay.hpp"
#include "dsearch/search.hpp"

using namespace dsearch;

namespace {

std::string temp_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("dsearch_gw_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

ChatRequest simple_request(const std::string& text) {
    ChatRequest request;
    request.messages = {{Role::user, text}};
    return request;
}

}  // namespace

TEST_CASE("extract_text strips tags") {
    CHECK(extract_text("<p>Hello</p>") == "Hello");
}

TEST_CASE("extract_text drops script and style content") {
    CHECK(extract_text("<script>x=1</script>Hi") == "Hi");
    CHECK(extract_text("<style>.a{color:red}</style>ok<noscript>nope</noscript>") == "ok");
    CHECK(extract_text("<script>never closed") == "");
}

TEST_CASE("extract_text decodes entities and collapses whitespace") {
    CHECK(extract_text("A&amp;B  C") == "A&B C");
    // Cross-check against a hand-decoded reference table.
    CHECK(extract_text("&lt;") == "<");
    CHECK(extract_text("&gt;") == ">");
    CHECK(extract_text("&quot;x&quot;") == "\"x\"");
    CHECK(extract_text("&#65;&#x42;") == "AB");
    CHECK(extract_text("&#8364;") == "\xE2\x82\xAC");
    CHECK(extract_text("&bogus; stays") == "&bogus; stays");
}

TEST_CASE("extract_text honors the character budget") {
    const std::string body(5000, 'x');
    CHECK(extract_text("<p>" + body + "</p>").size() == kDefaultDocCharBudget);
    CHECK(extract_text(body, 10) == "xxxxxxxxxx");
    // Truncation never splits a multi-byte sequence.
    std::string unicode;
    for (int i = 0; i < 40; ++i) unicode += "\xE2\x82\xAC";  // 3 bytes each
    const std::string cut = extract_text(unicode, 10);
    CHECK(cut.size() == 9);
}

TEST_CASE("extract_text is idempotent on generated HTML") {
    std::mt19937_64 rng(99);
    const std::vector<std::string> words = {"alpha", "beta",  "gamma", "delta",
                                            "epsilon", "zeta", "eta",   "theta"};
    const std::vector<std::string> entities = {"&amp;", "&lt;", "&gt;", "&quot;",
                                               "&nbsp;", "&#65;", "&mdash;"};
    const std::vector<std::string> opens = {"<p>", "<div class=\"x\">", "<b>", "<i>",
                                            "<span>"};
    const std::vector<std::string> closes = {"</p>", "</div>", "</b>", "</i>", "</span>"};
    for (int round = 0; round < 200; ++round) {
        std::string html;
        const int pieces = 1 + static_cast<int>(rng() % 40);
        for (int i = 0; i < pieces; ++i) {
            switch (rng() % 6) {
                case 0: html += opens[rng() % opens.size()]; break;
                case 1: html += closes[rng() % closes.size()]; break;
                case 2: html += entities[rng() % entities.size()]; break;
                case 3: html += "<script>var x = 1;</script>"; break;
                case 4: html += "<!-- c -->"; break;
                default: html += " " + words[rng() % words.size()]; break;
            }
        }
        const std::string once = extract_text(html);
        CHECK(extract_text(once) == once);
    }
}

TEST_CASE("scripted client echoes and applies stop sequences") {
    ScriptedLlmClient echo([](const ChatRequest& r) { return r.messages.back().text; });
    CHECK(echo.chat_complete(simple_request("hi")).text == "hi");

    ChatRequest request = simple_request("before STOP after");
    request.stop_sequences = {"STOP"};
    const auto response = echo.chat_complete(request);
    CHECK(response.text == "before ");
    CHECK(response.finish_reason == FinishReason::stop_sequence);

    ChatRequest longreq = simple_request("a b c d e f");
    longreq.max_tokens = 3;
    const auto cut = echo.chat_complete(longreq);
    CHECK(cut.text == "a b c");
    CHECK(cut.finish_reason == FinishReason::length);
    CHECK(cut.usage.completion_tokens == 3);
}

TEST_CASE("chat request validation") {
    ChatRequest request;  // no messages
    CHECK_THROWS_AS(request.validate(), std::invalid_argument);
    request.messages = {{Role::user, "x"}};
    request.top_p = 0.0;
    CHECK_THROWS_AS(request.validate(), std::invalid_argument);
    request.top_p = 0.95;
    request.temperature = -1;
    CHECK_THROWS_AS(request.validate(), std::invalid_argument);
}

TEST_CASE("replay archive serves recorded responses and misses on perturbation") {
    const auto dir = temp_dir("replay");
    auto archive = std::make_shared<ReplayArchive>(dir);

    auto inner = std::make_shared<ScriptedLlmClient>(
        [](const ChatRequest&) { return std::string("recorded reply"); });
    CachedLlmClient recorder(archive, CacheMode::record, inner);

    ChatRequest request = simple_request("what is up");
    request.temperature = 0.6;
    const auto original = recorder.chat_complete(request);
    CHECK(original.text == "recorded reply");
    CHECK(recorder.misses() == 1);

    // Fresh replay-only client on the same archive.
    CachedLlmClient replayer(std::make_shared<ReplayArchive>(dir), CacheMode::replay);
    const auto replayed = replayer.chat_complete(request);
    CHECK(replayed.to_json() == original.to_json());

    ChatRequest perturbed = request;
    perturbed.temperature = 0.7;
    CHECK_THROWS_AS(replayer.chat_complete(perturbed), CacheMissError);
}

TEST_CASE("record mode serves hits without touching the inner client") {
    const auto dir = temp_dir("record_hits");
    auto archive = std::make_shared<ReplayArchive>(dir);
    auto inner = std::make_shared<ScriptedLlmClient>(
        [](const ChatRequest&) { return std::string("fresh"); });
    CachedLlmClient cached(archive, CacheMode::record, inner);

    const ChatRequest request = simple_request("same request");
    cached.chat_complete(request);
    cached.chat_complete(request);
    CHECK(inner->call_count() == 1);
    CHECK(cached.hits() == 1);
    CHECK(cached.misses() == 1);
}

TEST_CASE("single-flight: concurrent identical requests fetch once") {
    const auto dir = temp_dir("singleflight");
    auto archive = std::make_shared<ReplayArchive>(dir);
    auto inner = std::make_shared<ScriptedLlmClient>([](const ChatRequest&) {
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        return std::string("slow result");
    });
    CachedLlmClient cached(archive, CacheMode::record, inner);

    std::vector<std::thread> threads;
    std::atomic<int> ok{0};
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&]() {
            const auto response = cached.chat_complete(simple_request("one key"));
            if (response.text == "slow result") ++ok;
        });
    }
    for (auto& t : threads) t.join();
    CHECK(ok == 8);
    CHECK(inner->call_count() == 1);
}

TEST_CASE("live llm retries 429 then succeeds") {
    httplib::Server server;
    std::atomic<int> attempts{0};
    server.Post("/v1/complete", [&](const httplib::Request&, httplib::Response& res) {
        if (attempts.fetch_add(1) < 3) {
            res.status = 429;
            return;
        }
        const ChatResponse reply = finalize_generation("live text", simple_request("x"));
        res.set_content(dump_canonical(reply.to_json()), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&]() { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpEndpoint endpoint;
    endpoint.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/complete";
    endpoint.retry.initial_backoff = std::chrono::milliseconds(5);
    HttpLlmClient client(endpoint);

    const auto response = client.chat_complete(simple_request("hello"));
    CHECK(response.text == "live text");
    CHECK(client.retries_performed() == 3);
    CHECK(attempts == 4);

    server.stop();
    listener.join();
}

TEST_CASE("live llm gives up after exhausting retries") {
    httplib::Server server;
    server.Post("/v1/complete", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&]() { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpEndpoint endpoint;
    endpoint.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/complete";
    endpoint.retry.max_retries = 2;
    endpoint.retry.initial_backoff = std::chrono::milliseconds(1);
    HttpLlmClient client(endpoint);
    CHECK_THROWS_AS(client.chat_complete(simple_request("hello")), TransportError);

    server.stop();
    listener.join();
}

TEST_CASE("http search client extracts text and assigns ranks") {
    httplib::Server server;
    server.Post("/search", [&](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        CHECK(body.at("query") == "capital of France");
        res.set_content(dump_canonical(json{
                            {"results",
                             json::array({{{"url", "http://a"},
                                           {"title", "A"},
                                           {"html_or_text", "<p>Paris is the capital</p>"}},
                                          {{"url", "http://b"},
                                           {"title", "B"},
                                           {"html_or_text", "plain text"}}})}}),
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&]() { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpEndpoint endpoint;
    endpoint.url = "http://127.0.0.1:" + std::to_string(port) + "/search";
    HttpSearchClient client(endpoint, "stub");
    const auto results = client.search("capital of France", 10);
    REQUIRE(results.size() == 2);
    CHECK(results[0].rank == 1);
    CHECK(results[0].extracted_text == "Paris is the capital");
    CHECK(results[1].rank == 2);

    server.stop();
    listener.join();
}

TEST_CASE("fixture search serves ranked canned results") {
    FixtureSearchClient client;
    client.add_fixture("capital of france",
                       {json{{"url", "u1"}, {"title", "t1"}, {"html_or_text", "<b>Paris</b>"}},
                        json{{"url", "u2"}, {"title", "t2"}, {"html_or_text", "doc two"}},
                        json{{"url", "u3"}, {"title", "t3"}, {"html_or_text", "doc three"}}});

    const auto results = client.search("Capital of France", 10);
    REQUIRE(results.size() == 3);
    CHECK(results[0].rank == 1);
    CHECK(results[1].rank == 2);
    CHECK(results[2].rank == 3);
    CHECK(results[0].extracted_text == "Paris");

    CHECK(client.search("capital of france", 2).size() == 2);  // top_k truncation
    CHECK(client.search("unknown query", 5).empty());
    CHECK_THROWS_AS(client.search("   ", 5), std::invalid_argument);
    CHECK_THROWS_AS(client.search("x", 0), std::invalid_argument);
}

TEST_CASE("search cache invokes the provider once per key") {
    const auto dir = temp_dir("searchcache");
    auto archive = std::make_shared<ReplayArchive>(dir);
    auto fixture = std::make_shared<FixtureSearchClient>();
    fixture->add_fixture("q", {json{{"url", "u"}, {"title", "t"}, {"html_or_text", "body"}}});

    CachedSearchClient cached(archive, CacheMode::record, fixture);
    const auto uncached_results = fixture->search("q", 5);
    const auto first = cached.search("q", 5);
    const auto second = cached.search("q", 5);
    CHECK(fixture->call_count() == 2);  // one direct probe + one cache miss

    // Structurally identical modulo fetched_at.
    REQUIRE(first.size() == second.size());
    REQUIRE(first.size() == uncached_results.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].rank == uncached_results[i].rank);
        CHECK(first[i].url == uncached_results[i].url);
        CHECK(first[i].title == uncached_results[i].title);
        CHECK(first[i].extracted_text == uncached_results[i].extracted_text);
        CHECK(first[i].rank == second[i].rank);
        CHECK(first[i].extracted_text == second[i].extracted_text);
    }

    // Different top_k is a different cache key.
    cached.search("q", 3);
    CHECK(fixture->call_count() == 3);
}
