#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dsearch/jsonl.hpp"

namespace dsearch {

enum class Role { system, user, assistant };

const char* role_name(Role role);
Role role_from_name(const std::string& name);

struct ChatMessage {
    Role role = Role::user;
    std::string text;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.6;
    double top_p = 0.95;
    int top_k = 40;
    int max_tokens = 20480;
    std::vector<std::string> stop_sequences;
    // Distinguishes otherwise-identical requests issued for different
    // candidate rollouts; participates in the cache fingerprint.
    std::optional<std::uint64_t> seed;

    // Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    json to_json() const;
    static ChatRequest from_json(const json& j);

    // Stable hash over every request field; replay archives key on this.
    std::string fingerprint() const;
};

enum class FinishReason { stop_sequence, length, end };

const char* finish_reason_name(FinishReason reason);
FinishReason finish_reason_from_name(const std::string& name);

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct ChatResponse {
    // Generated text; excludes the matched stop sequence, if any.
    std::string text;
    FinishReason finish_reason = FinishReason::end;
    TokenUsage usage;

    json to_json() const;
    static ChatResponse from_json(const json& j);
};

// Chat-completion backend. Implementations must be safe for concurrent use.
class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual ChatResponse chat_complete(const ChatRequest& request) = 0;
};

// Applies stop-sequence / length truncation the way a serving backend
// would: cut at the earliest stop sequence (exclusive), else truncate to
// max_tokens whitespace tokens.
ChatResponse finalize_generation(std::string text, const ChatRequest& request);

// Mock backend driven by a script function. The function produces the raw
// text the "model" would emit; stop sequences and token limits are then
// applied by finalize_generation.
class ScriptedLlmClient final : public LlmClient {
public:
    using Script = std::function<std::string(const ChatRequest&)>;

    explicit ScriptedLlmClient(Script script) : script_(std::move(script)) {}

    // Convenience: fixed sequence of raw outputs, one per call. Calls past
    // the end repeat the last element.
    static ScriptedLlmClient sequence(std::vector<std::string> outputs);

    ChatResponse chat_complete(const ChatRequest& request) override;

    std::size_t call_count() const;

private:
    Script script_;
    mutable std::mutex mutex_;
    std::size_t calls_ = 0;
};

}  // namespace dsearch
