#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsearch/corpus.hpp"
#include "dsearch/curation.hpp"
#include "dsearch/jsonl.hpp"
#include "dsearch/orchestrator.hpp"

namespace dsearch {

inline constexpr const char* kToolVersion = "0.1.0";

struct PathsConfig {
    std::string corpus;
    std::string cache_dir = "cache";
    std::string output_dir = "out";
};

struct GatewayConfig {
    std::string llm_endpoint;
    std::string llm_credential;  // env-only; never serialized
    std::string search_endpoint;
    std::string search_credential;  // env-only; never serialized
    std::string search_provider = "web";
};

struct PipelineConfig {
    PathsConfig paths;
    LoopConfig loop;  // carries the generation parameter defaults
    CurationConfig curation;
    GatewayConfig gateways;
    std::uint64_t seed = 0;
    unsigned concurrency = 8;
    std::vector<std::string> domain_labels = default_domain_labels();
    std::vector<std::string> interrogative_lexicon = default_interrogative_lexicon();

    json to_json() const;
    // Applies the fields present in `j` on top of `base`. Unknown top-level
    // fields raise ConfigError.
    static PipelineConfig from_json(const json& j, PipelineConfig base);
    static PipelineConfig from_json(const json& j);

    void validate() const;

    // Hash of the behavioral configuration; workspace paths and credentials
    // are excluded so relocating a run does not change its identity.
    std::string config_hash() const;
};

// Layered load: defaults <- config file (optional) <- DSEARCH_* env vars.
// CLI flag overrides are applied by the caller afterwards.
PipelineConfig load_config(const std::optional<std::string>& config_file);

}  // namespace dsearch
