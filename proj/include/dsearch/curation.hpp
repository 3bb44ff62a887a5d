#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsearch/orchestrator.hpp"

namespace dsearch {

struct ResponseMetadata {
    int search_steps = 0;
    std::size_t reasoning_length = 0;  // whitespace tokens of generated text only
    std::size_t reflection_count = 0;
    bool language_consistent = true;
    bool format_valid = false;
    bool correct = false;
    std::size_t distinct_query_count = 0;

    json to_json() const;
};

struct CurationConfig {
    std::vector<std::string> reflection_lexicon = {"alternatively", "wait", "hmm"};
    std::size_t max_reflections = 5;
    std::size_t max_reasoning_tokens = 8096;
    double accuracy_drop_threshold = 1.0;  // 1.0 = drop only all-correct questions
    std::size_t min_correct = 1;
    double f1_threshold = 0.7;
    double mixed_language_minority_share = 0.05;
    // Protocol tokens the format filter validates against.
    SearchTokenPair search_tokens;

    void validate() const;
};

// Decides whether a trajectory answers its question correctly.
using CorrectnessOracle =
    std::function<bool(const Trajectory&, const std::vector<std::string>& golds)>;

// best-F1-above-threshold oracle; the default correctness rule.
CorrectnessOracle f1_oracle(double threshold = 0.7);

ResponseMetadata collect_metadata(const Trajectory& t, const std::vector<std::string>& gold,
                                  const CorrectnessOracle& judge,
                                  const CurationConfig& cfg = {});

enum class FormatReason {
    not_answered,
    malformed_search_tokens,
    mixed_language,
    missing_boxed_answer,
};

const char* format_reason_name(FormatReason reason);

struct FormatCheck {
    bool pass = true;
    std::vector<FormatReason> reasons;
};

// Format standardization filter. Stray whitespace inside the answer box is
// repaired by answer extraction, not failed.
FormatCheck filter_format(const Trajectory& t, const CurationConfig& cfg = {});

// Reasoning-path control: fails when reflections exceed max_reflections or
// the reasoning is longer than max_reasoning_tokens (strict inequalities).
bool filter_reasoning_path(const ResponseMetadata& m, const CurationConfig& cfg);

// Question-difficulty filter over all candidates of one question. Returns
// true to keep. Questions whose accuracy reaches accuracy_drop_threshold
// are dropped (only meaningful with >= 2 attempts), as are questions with
// fewer than min_correct correct candidates.
bool filter_difficulty(const std::vector<ResponseMetadata>& group, const CurationConfig& cfg);

// Index of the preferred survivor: fewest search steps, then more distinct
// sub-queries, then shorter reasoning, then input order. Throws
// SelectionError on an empty list.
std::size_t select_best(const std::vector<ResponseMetadata>& survivors);

enum class CurationStage { format, reasoning_path, difficulty, correctness, selection };

const char* curation_stage_name(CurationStage stage);

struct AuditEntry {
    std::string question_id;
    std::size_t candidate_index = 0;
    CurationStage stage = CurationStage::format;
    std::string reason_code;

    json to_json() const;
};

struct CuratedEntry {
    std::string question_id;
    std::string question;
    std::vector<std::string> gold_answers;
    Trajectory trajectory;
    ResponseMetadata metadata;

    json to_json() const;  // {question, gold_answers, trajectory_ref, metadata}
};

struct CurationOutcome {
    std::vector<CuratedEntry> curated;
    std::vector<AuditEntry> audit;
    // Correct survivors that were not selected; optional DPO side channel.
    std::vector<Trajectory> non_selected_survivors;
};

// Sequential four-pillar curation: format -> reasoning path -> question
// difficulty -> search-effectiveness selection. At most one curated
// trajectory per question; every rejected candidate lands in the audit log
// exactly once.
CurationOutcome curate(const std::map<std::string, std::vector<Trajectory>>& candidates,
                       const CurationConfig& cfg, const CorrectnessOracle& oracle);

}  // namespace dsearch
