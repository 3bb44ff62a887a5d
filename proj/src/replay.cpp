#include "dsearch/replay.hpp"

#include <filesystem>
#include <fstream>

#include "dsearch/digest.hpp"
#include "dsearch/errors.hpp"
#include "dsearch/text.hpp"

namespace dsearch {

namespace fs = std::filesystem;

ReplayArchive::ReplayArchive(std::string dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
}

std::string ReplayArchive::entry_path(const std::string& fingerprint) const {
    return (fs::path(dir_) / (fingerprint + ".json")).string();
}

void ReplayArchive::touch(const std::string& fingerprint) const {
    std::lock_guard<std::mutex> lock(mutex_);
    touched_.insert(fingerprint);
}

std::optional<json> ReplayArchive::load(const std::string& fingerprint) const {
    const std::string path = entry_path(fingerprint);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    json payload = json::parse(in, nullptr, false);
    if (payload.is_discarded()) throw Error("corrupt replay entry: " + path);
    touch(fingerprint);
    return payload;
}

void ReplayArchive::store(const std::string& fingerprint, const json& payload) {
    write_file_atomic(entry_path(fingerprint), dump_canonical(payload) + "\n");
    touch(fingerprint);
}

std::unique_lock<std::mutex> ReplayArchive::lock_key(const std::string& fingerprint) {
    std::mutex* key_mutex = nullptr;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto& slot = key_locks_[fingerprint];
        if (!slot) slot = std::make_unique<std::mutex>();
        key_mutex = slot.get();
    }
    return std::unique_lock<std::mutex>(*key_mutex);
}

std::string ReplayArchive::touched_digest() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::string joined;
    for (const auto& fp : touched_) {
        joined += fp;
        joined.push_back('\n');
    }
    return sha256_hex(joined);
}

std::size_t ReplayArchive::touched_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return touched_.size();
}

CachedLlmClient::CachedLlmClient(std::shared_ptr<ReplayArchive> archive, CacheMode mode,
                                 std::shared_ptr<LlmClient> inner)
    : archive_(std::move(archive)), mode_(mode), inner_(std::move(inner)) {
    if (mode_ == CacheMode::record && !inner_)
        throw Error("record mode requires an inner LLM client");
}

ChatResponse CachedLlmClient::chat_complete(const ChatRequest& request) {
    request.validate();
    const std::string fp = "chat_" + request.fingerprint();

    auto key_lock = archive_->lock_key(fp);
    if (auto hit = archive_->load(fp)) {
        std::lock_guard<std::mutex> lock(stats_mutex_);
        ++hits_;
        return ChatResponse::from_json(hit->at("response"));
    }
    if (mode_ == CacheMode::replay) throw CacheMissError(fp);

    ChatResponse response = inner_->chat_complete(request);
    archive_->store(fp, json{{"kind", "chat"},
                             {"request", request.to_json()},
                             {"response", response.to_json()}});
    std::lock_guard<std::mutex> lock(stats_mutex_);
    ++misses_;
    return response;
}

std::size_t CachedLlmClient::hits() const {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    return hits_;
}

std::size_t CachedLlmClient::misses() const {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    return misses_;
}

CachedSearchClient::CachedSearchClient(std::shared_ptr<ReplayArchive> archive, CacheMode mode,
                                       std::shared_ptr<SearchClient> inner)
    : archive_(std::move(archive)), mode_(mode), inner_(std::move(inner)) {
    if (mode_ == CacheMode::record && !inner_)
        throw Error("record mode requires an inner search client");
}

std::string CachedSearchClient::provider_id() const {
    return inner_ ? inner_->provider_id() : "replay";
}

std::string CachedSearchClient::search_fingerprint(const std::string& query, int top_k,
                                                   const std::string& provider) {
    const json key{{"query", normalize_phrase(query)}, {"top_k", top_k}, {"provider", provider}};
    return "search_" + sha256_hex(dump_canonical(key));
}

std::vector<SearchResult> CachedSearchClient::search(const std::string& query, int top_k) {
    validate_search_args(query, top_k);
    const std::string fp = search_fingerprint(query, top_k, provider_id());

    auto key_lock = archive_->lock_key(fp);
    if (auto hit = archive_->load(fp)) return search_results_from_json(hit->at("results"));
    if (mode_ == CacheMode::replay) throw CacheMissError(fp);

    std::vector<SearchResult> results = inner_->search(query, top_k);
    archive_->store(fp, json{{"kind", "search"},
                             {"query", normalize_phrase(query)},
                             {"top_k", top_k},
                             {"provider", provider_id()},
                             {"results", search_results_to_json(results)}});
    return results;
}

}  // namespace dsearch
