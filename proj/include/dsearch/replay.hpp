#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "dsearch/chat.hpp"
#include "dsearch/search.hpp"

namespace dsearch {

enum class CacheMode {
    replay,  // archive only; a miss is an error
    record,  // serve hits from the archive, fetch + store misses
};

// Content-addressed response store on disk. One JSON file per fingerprint;
// writes are atomic (temp + rename). Safe for concurrent use; per-key locks
// give the single-flight guarantee (at most one live fetch per key).
class ReplayArchive {
public:
    explicit ReplayArchive(std::string dir);

    std::optional<json> load(const std::string& fingerprint) const;
    void store(const std::string& fingerprint, const json& payload);

    // Acquired around the miss path so only one caller fetches a given key.
    std::unique_lock<std::mutex> lock_key(const std::string& fingerprint);

    const std::string& dir() const { return dir_; }

    // Digest over the sorted set of fingerprints touched this process;
    // recorded in run manifests.
    std::string touched_digest() const;
    std::size_t touched_count() const;

private:
    std::string entry_path(const std::string& fingerprint) const;
    void touch(const std::string& fingerprint) const;

    std::string dir_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::unique_ptr<std::mutex>> key_locks_;
    mutable std::set<std::string> touched_;
};

class CachedLlmClient final : public LlmClient {
public:
    CachedLlmClient(std::shared_ptr<ReplayArchive> archive, CacheMode mode,
                    std::shared_ptr<LlmClient> inner = nullptr);

    ChatResponse chat_complete(const ChatRequest& request) override;

    std::size_t hits() const;
    std::size_t misses() const;

private:
    std::shared_ptr<ReplayArchive> archive_;
    CacheMode mode_;
    std::shared_ptr<LlmClient> inner_;
    mutable std::mutex stats_mutex_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

class CachedSearchClient final : public SearchClient {
public:
    CachedSearchClient(std::shared_ptr<ReplayArchive> archive, CacheMode mode,
                       std::shared_ptr<SearchClient> inner = nullptr);

    std::vector<SearchResult> search(const std::string& query, int top_k) override;
    std::string provider_id() const override;

    // Cache key over (normalized query, top_k, provider).
    static std::string search_fingerprint(const std::string& query, int top_k,
                                          const std::string& provider);

private:
    std::shared_ptr<ReplayArchive> archive_;
    CacheMode mode_;
    std::shared_ptr<SearchClient> inner_;
};

}  // namespace dsearch
