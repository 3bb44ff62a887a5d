#include "dsearch/config.hpp"

#include <algorithm>
#include <cstdlib>

#include "dsearch/digest.hpp"
#include "dsearch/errors.hpp"

namespace dsearch {

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& field) {
    if (j.contains(key)) j.at(key).get_to(field);
}

json loop_to_json(const LoopConfig& loop) {
    return json{{"max_search_calls", loop.max_search_calls},
                {"max_turns", loop.max_turns},
                {"candidates_per_query", loop.candidates_per_query},
                {"search_top_k", loop.search_top_k},
                {"doc_char_budget", loop.doc_char_budget},
                {"begin_search_token", loop.search_tokens.begin},
                {"end_search_token", loop.search_tokens.end},
                {"begin_result_token", loop.begin_result_token},
                {"end_result_token", loop.end_result_token},
                {"answer_marker", loop.answer_marker},
                {"system_instructions", loop.prompt.system_instructions},
                {"user_format", loop.prompt.user_format}};
}

void loop_from_json(const json& j, LoopConfig& loop) {
    read_if(j, "max_search_calls", loop.max_search_calls);
    read_if(j, "max_turns", loop.max_turns);
    read_if(j, "candidates_per_query", loop.candidates_per_query);
    read_if(j, "search_top_k", loop.search_top_k);
    read_if(j, "doc_char_budget", loop.doc_char_budget);
    read_if(j, "begin_search_token", loop.search_tokens.begin);
    read_if(j, "end_search_token", loop.search_tokens.end);
    read_if(j, "begin_result_token", loop.begin_result_token);
    read_if(j, "end_result_token", loop.end_result_token);
    read_if(j, "answer_marker", loop.answer_marker);
    if (j.contains("system_instructions")) {
        j.at("system_instructions").get_to(loop.prompt.system_instructions);
    } else {
        // Keep the instructions in sync with possibly overridden tokens.
        loop.prompt.system_instructions = standard_system_instructions(
            loop.search_tokens, loop.begin_result_token, loop.end_result_token);
    }
    read_if(j, "user_format", loop.prompt.user_format);
}

json curation_to_json(const CurationConfig& curation) {
    return json{{"reflection_lexicon", curation.reflection_lexicon},
                {"max_reflections", curation.max_reflections},
                {"max_reasoning_tokens", curation.max_reasoning_tokens},
                {"accuracy_drop_threshold", curation.accuracy_drop_threshold},
                {"min_correct", curation.min_correct},
                {"f1_threshold", curation.f1_threshold},
                {"mixed_language_minority_share", curation.mixed_language_minority_share}};
}

void curation_from_json(const json& j, CurationConfig& curation) {
    read_if(j, "reflection_lexicon", curation.reflection_lexicon);
    read_if(j, "max_reflections", curation.max_reflections);
    read_if(j, "max_reasoning_tokens", curation.max_reasoning_tokens);
    read_if(j, "accuracy_drop_threshold", curation.accuracy_drop_threshold);
    read_if(j, "min_correct", curation.min_correct);
    read_if(j, "f1_threshold", curation.f1_threshold);
    read_if(j, "mixed_language_minority_share", curation.mixed_language_minority_share);
}

}  // namespace

json PipelineConfig::to_json() const {
    return json{{"paths",
                 {{"corpus", paths.corpus},
                  {"cache_dir", paths.cache_dir},
                  {"output_dir", paths.output_dir}}},
                {"generation",
                 {{"temperature", loop.generation.temperature},
                  {"top_p", loop.generation.top_p},
                  {"top_k", loop.generation.top_k},
                  {"max_tokens", loop.generation.max_tokens}}},
                {"loop", loop_to_json(loop)},
                {"curation", curation_to_json(curation)},
                {"gateways",
                 {{"llm_endpoint", gateways.llm_endpoint},
                  {"search_endpoint", gateways.search_endpoint},
                  {"search_provider", gateways.search_provider}}},
                {"seed", seed},
                {"concurrency", concurrency},
                {"domain_labels", domain_labels},
                {"interrogative_lexicon", interrogative_lexicon}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    return from_json(j, PipelineConfig{});
}

PipelineConfig PipelineConfig::from_json(const json& j, PipelineConfig base) {
    static const std::vector<std::string> known = {
        "paths",       "generation",  "loop",        "curation",
        "gateways",    "seed",        "concurrency", "domain_labels",
        "interrogative_lexicon"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(key, "unknown configuration field");
    }

    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        read_if(p, "corpus", base.paths.corpus);
        read_if(p, "cache_dir", base.paths.cache_dir);
        read_if(p, "output_dir", base.paths.output_dir);
    }
    if (j.contains("generation")) {
        const auto& g = j.at("generation");
        read_if(g, "temperature", base.loop.generation.temperature);
        read_if(g, "top_p", base.loop.generation.top_p);
        read_if(g, "top_k", base.loop.generation.top_k);
        read_if(g, "max_tokens", base.loop.generation.max_tokens);
    }
    if (j.contains("loop")) loop_from_json(j.at("loop"), base.loop);
    if (j.contains("curation")) curation_from_json(j.at("curation"), base.curation);
    if (j.contains("gateways")) {
        const auto& g = j.at("gateways");
        read_if(g, "llm_endpoint", base.gateways.llm_endpoint);
        read_if(g, "search_endpoint", base.gateways.search_endpoint);
        read_if(g, "search_provider", base.gateways.search_provider);
    }
    read_if(j, "seed", base.seed);
    read_if(j, "concurrency", base.concurrency);
    read_if(j, "domain_labels", base.domain_labels);
    read_if(j, "interrogative_lexicon", base.interrogative_lexicon);
    return base;
}

void PipelineConfig::validate() const {
    try {
        loop.validate();
        curation.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("loop", e.what());
    }
    if (concurrency < 1) throw ConfigError("concurrency", "must be >= 1");
    if (loop.generation.temperature < 0)
        throw ConfigError("generation.temperature", "must be >= 0");
    if (loop.generation.top_p <= 0 || loop.generation.top_p > 1)
        throw ConfigError("generation.top_p", "must be in (0,1]");
    if (loop.generation.top_k < 1) throw ConfigError("generation.top_k", "must be >= 1");
    if (loop.generation.max_tokens < 1)
        throw ConfigError("generation.max_tokens", "must be >= 1");
    if (domain_labels.empty()) throw ConfigError("domain_labels", "must be non-empty");
    if (interrogative_lexicon.empty())
        throw ConfigError("interrogative_lexicon", "must be non-empty");
}

std::string PipelineConfig::config_hash() const {
    json j = to_json();
    j.erase("paths");
    return sha256_hex(dump_canonical(j));
}

PipelineConfig load_config(const std::optional<std::string>& config_file) {
    PipelineConfig config;
    if (config_file) {
        json parsed = json::parse(read_file(*config_file), nullptr, false);
        if (parsed.is_discarded())
            throw ConfigError("<file>", "config file is not valid JSON: " + *config_file);
        config = PipelineConfig::from_json(parsed, std::move(config));
    }

    auto env = [](const char* name) -> std::optional<std::string> {
        const char* value = std::getenv(name);
        if (!value || !*value) return std::nullopt;
        return std::string(value);
    };
    if (auto v = env("DSEARCH_LLM_ENDPOINT")) config.gateways.llm_endpoint = *v;
    if (auto v = env("DSEARCH_LLM_CREDENTIAL")) config.gateways.llm_credential = *v;
    if (auto v = env("DSEARCH_SEARCH_ENDPOINT")) config.gateways.search_endpoint = *v;
    if (auto v = env("DSEARCH_SEARCH_CREDENTIAL")) config.gateways.search_credential = *v;
    if (auto v = env("DSEARCH_CACHE_DIR")) config.paths.cache_dir = *v;
    if (auto v = env("DSEARCH_OUTPUT_DIR")) config.paths.output_dir = *v;
    if (auto v = env("DSEARCH_SEED")) config.seed = std::stoull(*v);
    if (auto v = env("DSEARCH_CONCURRENCY"))
        config.concurrency = static_cast<unsigned>(std::stoul(*v));
    return config;
}

}  // namespace dsearch
