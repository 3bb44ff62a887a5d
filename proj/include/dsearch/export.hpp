#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dsearch/curation.hpp"
#include "dsearch/orchestrator.hpp"

namespace dsearch {

struct MaskSpan {
    std::size_t start = 0;
    std::size_t end = 0;  // exclusive, offsets into the completion
};

struct SftExample {
    std::string prompt;      // system instructions + question
    std::string completion;  // full interleaved continuation
    std::vector<MaskSpan> mask_spans;  // externally injected content
    json metadata;

    json to_json() const;
};

// Converts an answered trajectory into a loss-masked SFT example. Mask
// spans are the injected document/notice spans shifted to completion-local
// offsets. Throws Error when the trajectory did not answer and
// IntegrityError when its spans are inconsistent.
SftExample to_sft_example(const Trajectory& t);

// Removes the masked spans; the concatenation of what remains is exactly
// the model-generated text.
std::string strip_masked(const std::string& completion, const std::vector<MaskSpan>& spans);

struct DpoPair {
    std::string prompt;
    std::string chosen;
    std::string rejected;
    std::string question_id;

    json to_json() const;
};

// Builds preference pairs keyed by question id: chosen is the first
// strong-pool trajectory passing the format and reasoning-path checks,
// rejected the first weak-pool trajectory failing them. Questions missing
// either side emit nothing.
std::vector<DpoPair> build_dpo_pairs(
    const std::map<std::string, std::vector<Trajectory>>& strong,
    const std::map<std::string, std::vector<Trajectory>>& weak, const CurationConfig& cfg);

enum class RewardFlag {
    self_retrieved_content,
    gibberish,
    excessive_markers,
    missing_box_or_overlong,
};

const char* reward_flag_name(RewardFlag flag);

struct RewardConfig {
    std::vector<std::string> marker_lexicon = {"alternatively", "wait", "hmm"};
    std::size_t max_markers = 5;
    int max_retrieval_steps = 8;
    std::size_t max_segment_tokens = 8096;
    double control_char_threshold = 0.02;
    double repeated_ngram_threshold = 0.30;
    std::string begin_result_token = "<|begin_search_result|>";
    std::string end_result_token = "<|end_search_result|>";
    std::string answer_marker = "\\boxed{";
    // Counts tokens for the segment-length rule; whitespace by default.
    std::function<std::size_t(std::string_view)> count_tokens;
};

struct RewardBreakdown {
    double answer_f1 = 0;            // max F1 over gold answers; 0 without a boxed answer
    double penalty = 0;              // 0 or -2
    std::vector<RewardFlag> flags;   // penalty fires iff non-empty
    double total = 0;                // answer_f1 + penalty, in [-2, 1]

    json to_json(const std::string& trajectory_id = "") const;
};

RewardBreakdown rl_reward(const Trajectory& t, const std::vector<std::string>& golds,
                          const RewardConfig& cfg = {});

}  // namespace dsearch
