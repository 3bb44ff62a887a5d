#include "dsearch/export.hpp"

#include <algorithm>

#include "dsearch/errors.hpp"
#include "dsearch/eval.hpp"
#include "dsearch/text.hpp"

namespace dsearch {

json SftExample::to_json() const {
    json spans = json::array();
    for (const auto& span : mask_spans) spans.push_back(json::array({span.start, span.end}));
    return json{{"prompt", prompt},
                {"completion", completion},
                {"mask_spans", std::move(spans)},
                {"meta", metadata}};
}

SftExample to_sft_example(const Trajectory& t) {
    if (t.stop_reason != StopReason::answered)
        throw Error("trajectory " + t.id + " did not answer; refusing SFT export");
    t.validate_spans();  // IntegrityError on overlap / out-of-bounds

    SftExample example;
    example.prompt = t.prompt();
    example.completion = t.completion();
    for (const auto& span : t.spans)
        example.mask_spans.push_back(
            {span.start - t.prompt_length, span.end - t.prompt_length});
    example.metadata = json{{"question_id", t.query.record.id},
                            {"trajectory_id", t.id},
                            {"source", t.query.record.source}};
    if (t.seed) example.metadata["seed"] = *t.seed;
    return example;
}

std::string strip_masked(const std::string& completion, const std::vector<MaskSpan>& spans) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& span : spans) {
        out += completion.substr(pos, span.start - pos);
        pos = span.end;
    }
    out += completion.substr(pos);
    return out;
}

json DpoPair::to_json() const {
    return json{{"prompt", prompt},
                {"chosen", chosen},
                {"rejected", rejected},
                {"meta", {{"question_id", question_id}}}};
}

namespace {

bool passes_checks(const Trajectory& t, const CurationConfig& cfg) {
    if (!filter_format(t, cfg).pass) return false;
    const ResponseMetadata metadata = collect_metadata(t, {}, nullptr, cfg);
    return filter_reasoning_path(metadata, cfg);
}

}  // namespace

std::vector<DpoPair> build_dpo_pairs(
    const std::map<std::string, std::vector<Trajectory>>& strong,
    const std::map<std::string, std::vector<Trajectory>>& weak, const CurationConfig& cfg) {
    std::vector<DpoPair> pairs;
    for (const auto& [question_id, strong_pool] : strong) {
        const auto weak_it = weak.find(question_id);
        if (weak_it == weak.end()) continue;

        const Trajectory* chosen = nullptr;
        for (const auto& t : strong_pool) {
            if (passes_checks(t, cfg)) {
                chosen = &t;
                break;
            }
        }
        const Trajectory* rejected = nullptr;
        for (const auto& t : weak_it->second) {
            if (!passes_checks(t, cfg)) {
                rejected = &t;
                break;
            }
        }
        if (!chosen || !rejected) continue;

        DpoPair pair;
        pair.prompt = chosen->prompt();
        pair.chosen = chosen->completion();
        pair.rejected = rejected->completion();
        pair.question_id = question_id;
        if (pair.chosen == pair.rejected) continue;
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

const char* reward_flag_name(RewardFlag flag) {
    switch (flag) {
        case RewardFlag::self_retrieved_content: return "self_retrieved_content";
        case RewardFlag::gibberish: return "gibberish";
        case RewardFlag::excessive_markers: return "excessive_markers";
        case RewardFlag::missing_box_or_overlong: return "missing_box_or_overlong";
    }
    return "gibberish";
}

json RewardBreakdown::to_json(const std::string& trajectory_id) const {
    json flag_names = json::array();
    for (const auto flag : flags) flag_names.push_back(reward_flag_name(flag));
    json j{{"answer_f1", answer_f1},
           {"penalty", penalty},
           {"flags", std::move(flag_names)},
           {"total", total}};
    if (!trajectory_id.empty()) j["trajectory_id"] = trajectory_id;
    return j;
}

RewardBreakdown rl_reward(const Trajectory& t, const std::vector<std::string>& golds,
                          const RewardConfig& cfg) {
    RewardBreakdown reward;
    const std::string generated = t.generated_text();

    const auto boxed = t.final_answer ? t.final_answer
                                      : extract_final_answer(generated, cfg.answer_marker);
    if (boxed && !golds.empty()) reward.answer_f1 = best_f1(*boxed, golds);

    if (generated.find(cfg.begin_result_token) != std::string::npos ||
        generated.find(cfg.end_result_token) != std::string::npos)
        reward.flags.push_back(RewardFlag::self_retrieved_content);

    if (control_char_ratio(generated) > cfg.control_char_threshold ||
        repeated_ngram_share(generated) > cfg.repeated_ngram_threshold)
        reward.flags.push_back(RewardFlag::gibberish);

    std::size_t markers = 0;
    for (const auto& phrase : cfg.marker_lexicon)
        markers += count_word_occurrences(generated, phrase);
    if (markers > cfg.max_markers) reward.flags.push_back(RewardFlag::excessive_markers);

    bool overlong_segment = false;
    std::function<std::size_t(std::string_view)> count_tokens = cfg.count_tokens;
    if (!count_tokens)
        count_tokens = [](std::string_view s) { return whitespace_token_count(s); };
    for (const auto& segment : t.generated_segments()) {
        if (count_tokens(segment) > cfg.max_segment_tokens) {
            overlong_segment = true;
            break;
        }
    }
    if (!boxed || t.counters.search_calls > cfg.max_retrieval_steps || overlong_segment)
        reward.flags.push_back(RewardFlag::missing_box_or_overlong);

    reward.penalty = reward.flags.empty() ? 0.0 : -2.0;
    reward.total = reward.answer_f1 + reward.penalty;
    return reward;
}

}  // namespace dsearch
