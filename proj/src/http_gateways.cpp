#include "dsearch/http_gateways.hpp"

#include <httplib.h>

#include <thread>

#include "dsearch/errors.hpp"
#include "dsearch/extract_text.hpp"

namespace dsearch {

namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("endpoint URL missing scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

// POSTs `body`, retrying per policy. Returns the response body on 200.
std::string post_with_retries(const HttpEndpoint& endpoint, const std::string& body,
                              std::size_t* retry_counter, std::mutex* stats_mutex) {
    const SplitUrl url = split_url(endpoint.url);
    httplib::Client client(url.base);
    client.set_connection_timeout(endpoint.timeout);
    client.set_read_timeout(endpoint.timeout);
    httplib::Headers headers;
    if (!endpoint.credential.empty())
        headers.emplace("Authorization", "Bearer " + endpoint.credential);

    auto backoff = endpoint.retry.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= endpoint.retry.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(static_cast<long long>(
                static_cast<double>(backoff.count()) * endpoint.retry.multiplier));
            std::lock_guard<std::mutex> lock(*stats_mutex);
            ++*retry_counter;
        }
        auto result = client.Post(url.path, headers, body, "application/json");
        if (!result) {
            last_error = "transport failure: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 200) return result->body;
        last_error = "HTTP " + std::to_string(result->status) + " from " + endpoint.url;
        if (!retryable_status(result->status)) throw TransportError(last_error);
    }
    throw TransportError(last_error + " (after " +
                         std::to_string(endpoint.retry.max_retries) + " retries)");
}

}  // namespace

HttpLlmClient::HttpLlmClient(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

ChatResponse HttpLlmClient::chat_complete(const ChatRequest& request) {
    request.validate();
    const std::string body = dump_canonical(request.to_json());
    const std::string reply =
        post_with_retries(endpoint_, body, &retries_performed_, &stats_mutex_);
    json parsed = json::parse(reply, nullptr, false);
    if (parsed.is_discarded())
        throw TransportError("chat backend returned invalid JSON from " + endpoint_.url);
    return ChatResponse::from_json(parsed);
}

std::size_t HttpLlmClient::retries_performed() const {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    return retries_performed_;
}

HttpSearchClient::HttpSearchClient(HttpEndpoint endpoint, std::string provider,
                                   std::size_t doc_char_budget)
    : endpoint_(std::move(endpoint)),
      provider_(std::move(provider)),
      doc_char_budget_(doc_char_budget) {}

std::vector<SearchResult> HttpSearchClient::search(const std::string& query, int top_k) {
    validate_search_args(query, top_k);
    const json body{{"query", query}, {"top_k", top_k}};
    const std::string reply = post_with_retries(endpoint_, dump_canonical(body),
                                                &retries_performed_, &stats_mutex_);
    json parsed = json::parse(reply, nullptr, false);
    if (parsed.is_discarded())
        throw TransportError("search provider returned invalid JSON from " + endpoint_.url);

    std::vector<SearchResult> results;
    int rank = 1;
    const auto now = static_cast<std::int64_t>(::time(nullptr));
    for (const auto& raw : parsed.at("results")) {
        if (rank > top_k) break;
        SearchResult r;
        r.rank = rank++;
        r.url = raw.value("url", "");
        r.title = raw.value("title", "");
        const std::string doc = raw.contains("html_or_text")
                                    ? raw.at("html_or_text").get<std::string>()
                                    : raw.value("html", "");
        r.extracted_text = extract_text(doc, doc_char_budget_);
        r.fetched_at = now;
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace dsearch
