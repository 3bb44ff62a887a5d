#include "dsearch/chat.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

#include "dsearch/digest.hpp"
#include "dsearch/text.hpp"

namespace dsearch {

const char* role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_name(const std::string& name) {
    if (name == "system") return Role::system;
    if (name == "assistant") return Role::assistant;
    if (name == "user") return Role::user;
    throw std::invalid_argument("unknown chat role: " + name);
}

const char* finish_reason_name(FinishReason reason) {
    switch (reason) {
        case FinishReason::stop_sequence: return "stop_sequence";
        case FinishReason::length: return "length";
        case FinishReason::end: return "end";
    }
    return "end";
}

FinishReason finish_reason_from_name(const std::string& name) {
    if (name == "stop_sequence") return FinishReason::stop_sequence;
    if (name == "length") return FinishReason::length;
    if (name == "end") return FinishReason::end;
    throw std::invalid_argument("unknown finish reason: " + name);
}

void ChatRequest::validate() const {
    if (messages.empty()) throw std::invalid_argument("chat request has no messages");
    if (temperature < 0) throw std::invalid_argument("temperature must be >= 0");
    if (top_p <= 0 || top_p > 1) throw std::invalid_argument("top_p must be in (0,1]");
    if (top_k <= 0) throw std::invalid_argument("top_k must be positive");
    if (max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");
}

json ChatRequest::to_json() const {
    json msgs = json::array();
    for (const auto& m : messages)
        msgs.push_back({{"role", role_name(m.role)}, {"text", m.text}});
    json j{{"messages", std::move(msgs)},
           {"temperature", temperature},
           {"top_p", top_p},
           {"top_k", top_k},
           {"max_tokens", max_tokens},
           {"stop", stop_sequences}};
    if (seed) j["seed"] = *seed;
    return j;
}

ChatRequest ChatRequest::from_json(const json& j) {
    ChatRequest req;
    req.messages.clear();
    for (const auto& m : j.at("messages"))
        req.messages.push_back({role_from_name(m.at("role").get<std::string>()),
                                m.at("text").get<std::string>()});
    req.temperature = j.at("temperature").get<double>();
    req.top_p = j.at("top_p").get<double>();
    req.top_k = j.at("top_k").get<int>();
    req.max_tokens = j.at("max_tokens").get<int>();
    req.stop_sequences = j.at("stop").get<std::vector<std::string>>();
    if (j.contains("seed")) req.seed = j.at("seed").get<std::uint64_t>();
    return req;
}

std::string ChatRequest::fingerprint() const {
    return sha256_hex(dump_canonical(to_json()));
}

json ChatResponse::to_json() const {
    return json{{"text", text},
                {"finish_reason", finish_reason_name(finish_reason)},
                {"usage",
                 {{"prompt_tokens", usage.prompt_tokens},
                  {"completion_tokens", usage.completion_tokens}}}};
}

ChatResponse ChatResponse::from_json(const json& j) {
    ChatResponse resp;
    resp.text = j.at("text").get<std::string>();
    resp.finish_reason = finish_reason_from_name(j.at("finish_reason").get<std::string>());
    resp.usage.prompt_tokens = j.at("usage").at("prompt_tokens").get<std::int64_t>();
    resp.usage.completion_tokens = j.at("usage").at("completion_tokens").get<std::int64_t>();
    return resp;
}

ChatResponse finalize_generation(std::string text, const ChatRequest& request) {
    ChatResponse resp;
    resp.finish_reason = FinishReason::end;

    std::size_t cut = std::string::npos;
    for (const auto& stop : request.stop_sequences) {
        if (stop.empty()) continue;
        const auto pos = text.find(stop);
        if (pos != std::string::npos && pos < cut) cut = pos;
    }
    if (cut != std::string::npos) {
        text.erase(cut);
        resp.finish_reason = FinishReason::stop_sequence;
    }

    if (request.max_tokens > 0 &&
        whitespace_token_count(text) > static_cast<std::size_t>(request.max_tokens)) {
        const auto tokens = split_whitespace(text);
        std::string truncated;
        for (int i = 0; i < request.max_tokens; ++i) {
            if (i) truncated.push_back(' ');
            truncated += tokens[static_cast<std::size_t>(i)];
        }
        text = std::move(truncated);
        resp.finish_reason = FinishReason::length;
    }

    std::size_t prompt_tokens = 0;
    for (const auto& m : request.messages) prompt_tokens += whitespace_token_count(m.text);
    resp.usage.prompt_tokens = static_cast<std::int64_t>(prompt_tokens);
    resp.usage.completion_tokens = static_cast<std::int64_t>(whitespace_token_count(text));
    resp.text = std::move(text);
    return resp;
}

ScriptedLlmClient ScriptedLlmClient::sequence(std::vector<std::string> outputs) {
    auto index = std::make_shared<std::size_t>(0);
    auto store = std::make_shared<std::vector<std::string>>(std::move(outputs));
    auto guard = std::make_shared<std::mutex>();
    return ScriptedLlmClient([index, store, guard](const ChatRequest&) {
        std::lock_guard<std::mutex> lock(*guard);
        if (store->empty()) return std::string();
        const std::size_t i = std::min(*index, store->size() - 1);
        ++*index;
        return (*store)[i];
    });
}

ChatResponse ScriptedLlmClient::chat_complete(const ChatRequest& request) {
    request.validate();
    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++calls_;
    }
    return finalize_generation(script_(request), request);
}

std::size_t ScriptedLlmClient::call_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return calls_;
}

}  // namespace dsearch
