#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsearch/jsonl.hpp"

namespace dsearch {

struct SearchResult {
    int rank = 1;  // 1-based, unique within one response
    std::string url;
    std::string title;
    std::string extracted_text;  // post HTML stripping, no markup
    std::int64_t fetched_at = 0;

    json to_json() const;
    static SearchResult from_json(const json& j);
};

json search_results_to_json(const std::vector<SearchResult>& results);
std::vector<SearchResult> search_results_from_json(const json& j);

// Throws std::invalid_argument when the query is empty after trimming or
// top_k is not positive. Every client runs this first.
void validate_search_args(const std::string& query, int top_k);

// Web-search backend. Implementations must be safe for concurrent use.
class SearchClient {
public:
    virtual ~SearchClient() = default;
    virtual std::vector<SearchResult> search(const std::string& query, int top_k) = 0;
    // Identifies the provider inside cache keys.
    virtual std::string provider_id() const = 0;
};

// Serves canned results from a JSONL fixture of
//   {"query": ..., "results": [{"url":..., "title":..., "html_or_text":...}]}
// entries, keyed by the normalized query. HTML bodies are passed through
// extract_text. Unknown queries yield an empty result list.
class FixtureSearchClient final : public SearchClient {
public:
    explicit FixtureSearchClient(std::size_t doc_char_budget = 4000);

    void load_file(const std::string& path);

    void add_fixture(const std::string& query, const std::vector<json>& raw_results);

    std::vector<SearchResult> search(const std::string& query, int top_k) override;
    std::string provider_id() const override { return "fixture"; }

    std::size_t call_count() const;

private:
    std::size_t doc_char_budget_;
    std::unordered_map<std::string, std::vector<SearchResult>> by_query_;
    mutable std::mutex mutex_;
    std::size_t calls_ = 0;
};

}  // namespace dsearch
