#include "dsearch/search.hpp"

#include <stdexcept>

#include "dsearch/extract_text.hpp"
#include "dsearch/text.hpp"

namespace dsearch {

json SearchResult::to_json() const {
    return json{{"rank", rank},
                {"url", url},
                {"title", title},
                {"extracted_text", extracted_text},
                {"fetched_at", fetched_at}};
}

SearchResult SearchResult::from_json(const json& j) {
    SearchResult r;
    r.rank = j.at("rank").get<int>();
    r.url = j.at("url").get<std::string>();
    r.title = j.at("title").get<std::string>();
    r.extracted_text = j.at("extracted_text").get<std::string>();
    r.fetched_at = j.value("fetched_at", std::int64_t{0});
    return r;
}

json search_results_to_json(const std::vector<SearchResult>& results) {
    json arr = json::array();
    for (const auto& r : results) arr.push_back(r.to_json());
    return arr;
}

std::vector<SearchResult> search_results_from_json(const json& j) {
    std::vector<SearchResult> out;
    for (const auto& item : j) out.push_back(SearchResult::from_json(item));
    return out;
}

void validate_search_args(const std::string& query, int top_k) {
    if (trim(query).empty()) throw std::invalid_argument("search query is empty");
    if (top_k <= 0) throw std::invalid_argument("top_k must be positive");
}

FixtureSearchClient::FixtureSearchClient(std::size_t doc_char_budget)
    : doc_char_budget_(doc_char_budget) {}

void FixtureSearchClient::load_file(const std::string& path) {
    for (const auto& row : read_jsonl(path)) {
        add_fixture(row.at("query").get<std::string>(),
                    row.at("results").get<std::vector<json>>());
    }
}

void FixtureSearchClient::add_fixture(const std::string& query,
                                      const std::vector<json>& raw_results) {
    std::vector<SearchResult> results;
    int rank = 1;
    for (const auto& raw : raw_results) {
        SearchResult r;
        r.rank = rank++;
        r.url = raw.value("url", "");
        r.title = raw.value("title", "");
        const std::string body =
            raw.contains("html_or_text") ? raw.at("html_or_text").get<std::string>()
                                         : raw.value("html", "");
        r.extracted_text = extract_text(body, doc_char_budget_);
        r.fetched_at = 0;
        results.push_back(std::move(r));
    }
    std::lock_guard<std::mutex> lock(mutex_);
    by_query_[normalize_phrase(query)] = std::move(results);
}

std::vector<SearchResult> FixtureSearchClient::search(const std::string& query, int top_k) {
    validate_search_args(query, top_k);
    std::lock_guard<std::mutex> lock(mutex_);
    ++calls_;
    const auto it = by_query_.find(normalize_phrase(query));
    if (it == by_query_.end()) return {};
    std::vector<SearchResult> out = it->second;
    if (out.size() > static_cast<std::size_t>(top_k)) out.resize(static_cast<std::size_t>(top_k));
    return out;
}

std::size_t FixtureSearchClient::call_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return calls_;
}

}  // namespace dsearch
