#pragma once

#include <chrono>
#include <cstddef>
#include <string>

#include "dsearch/chat.hpp"
#include "dsearch/search.hpp"

namespace dsearch {

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{1000};
    double multiplier = 2.0;
};

struct HttpEndpoint {
    // Full URL, e.g. "http://127.0.0.1:8080/v1/complete".
    std::string url;
    // Sent as "Authorization: Bearer <credential>" when non-empty.
    std::string credential;
    RetryPolicy retry;
    std::chrono::seconds timeout{60};
};

// JSON-over-HTTP chat-completion client. POSTs the ChatRequest wire shape
// and expects a ChatResponse wire shape back. Retries transport failures,
// 429 and 5xx with exponential backoff.
class HttpLlmClient final : public LlmClient {
public:
    explicit HttpLlmClient(HttpEndpoint endpoint);

    ChatResponse chat_complete(const ChatRequest& request) override;

    std::size_t retries_performed() const;

private:
    HttpEndpoint endpoint_;
    mutable std::mutex stats_mutex_;
    std::size_t retries_performed_ = 0;
};

// Search provider client. POSTs {"query", "top_k"} and expects
// {"results": [{"url", "title", "html_or_text"}]}; bodies go through
// extract_text before they are returned.
class HttpSearchClient final : public SearchClient {
public:
    HttpSearchClient(HttpEndpoint endpoint, std::string provider,
                     std::size_t doc_char_budget = 4000);

    std::vector<SearchResult> search(const std::string& query, int top_k) override;
    std::string provider_id() const override { return provider_; }

private:
    HttpEndpoint endpoint_;
    std::string provider_;
    std::size_t doc_char_budget_;
    mutable std::mutex stats_mutex_;
    std::size_t retries_performed_ = 0;
};

}  // namespace dsearch
