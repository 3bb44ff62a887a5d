#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsearch/chat.hpp"
#include "dsearch/orchestrator.hpp"

namespace dsearch {

// Token-level F1 after QA normalization (lowercase, strip punctuation,
// drop a/an/the, collapse whitespace). Bag overlap with multiplicities:
// P = overlap/|pred|, R = overlap/|gold|, F1 = 2PR/(P+R). Both sides empty
// after normalization compare equal and score 1.
double f1(const std::string& pred, const std::string& gold);

// Max F1 over the reference answers; throws std::invalid_argument when
// golds is empty.
double best_f1(const std::string& pred, const std::vector<std::string>& golds);

std::string judge_prompt(const std::string& question, const std::string& pred,
                         const std::vector<std::string>& golds);

// LLM-as-Judge verdict. nullopt = abstain: the judge produced no parsable
// verdict even after one re-ask. Backend failures propagate.
std::optional<bool> llm_judge(const std::string& question, const std::string& pred,
                              const std::vector<std::string>& golds, LlmClient& judge);

struct StageFlags {
    bool planning = false;       // gold appears in model reasoning
    bool search = false;         // gold appears in a retrieved document
    bool summarization = false;  // gold appears in an injected summary
};

// Where the gold answer shows up along the trajectory (normalized
// contiguous token-subsequence match); the flags are independent.
StageFlags stage_attribution(const Trajectory& t, const std::vector<std::string>& golds);

struct OutputStats {
    double mean_reflections = 0;  // occurrences of the word "alternatively"
    double mean_searches = 0;
    double mean_length = 0;  // whitespace tokens of generated text
};

// Means over a non-empty trajectory list; throws std::invalid_argument on
// an empty list.
OutputStats output_stats(const std::vector<Trajectory>& ts);

struct EvalItem {
    std::string id;
    double f1 = 0;
    std::optional<bool> judge;
    bool judge_abstained = false;
    StageFlags stages;

    json to_json() const;
};

struct StageRates {
    double planning = 0;
    double search = 0;
    double summarization = 0;
};

struct EvalReport {
    std::vector<EvalItem> items;
    double mean_f1 = 0;
    double judge_accuracy = 0;  // over judged (non-abstained) items
    std::size_t judged = 0;
    std::size_t judge_abstentions = 0;
    OutputStats stats;
    StageRates stage_rates;

    json aggregate_json() const;
    std::string to_table() const;
};

struct EvalSelection {
    bool with_f1 = true;
    bool with_judge = false;
    bool with_stats = true;
    bool with_stages = true;
};

// Full harness over synthesized trajectories; golds come from each
// trajectory's own query record. `judge` may be null when judging is off.
EvalReport evaluate(const std::vector<Trajectory>& ts, LlmClient* judge,
                    const EvalSelection& selection = {});

}  // namespace dsearch
