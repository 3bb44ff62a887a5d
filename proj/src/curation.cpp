#include "dsearch/curation.hpp"

#include <algorithm>
#include <unordered_set>

#include "dsearch/errors.hpp"
#include "dsearch/eval.hpp"
#include "dsearch/text.hpp"

namespace dsearch {

json ResponseMetadata::to_json() const {
    return json{{"search_steps", search_steps},
                {"reasoning_length", reasoning_length},
                {"reflection_count", reflection_count},
                {"language_consistent", language_consistent},
                {"format_valid", format_valid},
                {"correct", correct},
                {"distinct_query_count", distinct_query_count}};
}

void CurationConfig::validate() const {
    if (accuracy_drop_threshold < 0.0 || accuracy_drop_threshold > 1.0)
        throw ConfigError("curation.accuracy_drop_threshold", "must be in [0,1]");
    if (f1_threshold < 0.0 || f1_threshold > 1.0)
        throw ConfigError("curation.f1_threshold", "must be in [0,1]");
    if (mixed_language_minority_share < 0.0 || mixed_language_minority_share > 1.0)
        throw ConfigError("curation.mixed_language_minority_share", "must be in [0,1]");
}

CorrectnessOracle f1_oracle(double threshold) {
    return [threshold](const Trajectory& t, const std::vector<std::string>& golds) {
        if (!t.final_answer || golds.empty()) return false;
        return best_f1(*t.final_answer, golds) >= threshold;
    };
}

namespace {

std::size_t reflection_count_of(const std::string& generated, const CurationConfig& cfg) {
    std::size_t count = 0;
    for (const auto& phrase : cfg.reflection_lexicon)
        count += count_word_occurrences(generated, phrase);
    return count;
}

bool language_consistent_of(const std::string& generated, const CurationConfig& cfg) {
    return script_shares(generated).minority_share() <= cfg.mixed_language_minority_share;
}

// Every begin-search token must be closed by a later end token.
bool has_malformed_search_tokens(const Trajectory& t, const CurationConfig& cfg) {
    for (const auto& turn : t.turns)
        if (turn.malformed_search) return true;
    const std::string generated = t.generated_text();
    std::size_t pos = 0;
    while ((pos = generated.find(cfg.search_tokens.begin, pos)) != std::string::npos) {
        const auto end = generated.find(cfg.search_tokens.end, pos + cfg.search_tokens.begin.size());
        if (end == std::string::npos) return true;
        pos = end + cfg.search_tokens.end.size();
    }
    return false;
}

}  // namespace

ResponseMetadata collect_metadata(const Trajectory& t, const std::vector<std::string>& gold,
                                  const CorrectnessOracle& judge, const CurationConfig& cfg) {
    ResponseMetadata m;
    m.search_steps = t.counters.search_calls;

    const std::string generated = t.generated_text();
    m.reasoning_length = whitespace_token_count(generated);
    m.reflection_count = reflection_count_of(generated, cfg);
    m.language_consistent = language_consistent_of(generated, cfg);
    m.format_valid = filter_format(t, cfg).pass;
    m.correct = judge ? judge(t, gold) : false;

    std::unordered_set<std::string> distinct;
    for (const auto& turn : t.turns)
        if (turn.search) distinct.insert(normalize_phrase(turn.search->query));
    m.distinct_query_count = distinct.size();
    return m;
}

const char* format_reason_name(FormatReason reason) {
    switch (reason) {
        case FormatReason::not_answered: return "not_answered";
        case FormatReason::malformed_search_tokens: return "malformed_search_tokens";
        case FormatReason::mixed_language: return "mixed_language";
        case FormatReason::missing_boxed_answer: return "missing_boxed_answer";
    }
    return "not_answered";
}

FormatCheck filter_format(const Trajectory& t, const CurationConfig& cfg) {
    FormatCheck check;
    const std::string generated = t.generated_text();

    if (t.stop_reason != StopReason::answered)
        check.reasons.push_back(FormatReason::not_answered);
    if (has_malformed_search_tokens(t, cfg))
        check.reasons.push_back(FormatReason::malformed_search_tokens);
    if (!language_consistent_of(generated, cfg))
        check.reasons.push_back(FormatReason::mixed_language);
    if (!t.final_answer)
        check.reasons.push_back(FormatReason::missing_boxed_answer);

    check.pass = check.reasons.empty();
    return check;
}

bool filter_reasoning_path(const ResponseMetadata& m, const CurationConfig& cfg) {
    return m.reflection_count <= cfg.max_reflections &&
           m.reasoning_length <= cfg.max_reasoning_tokens;
}

bool filter_difficulty(const std::vector<ResponseMetadata>& group, const CurationConfig& cfg) {
    if (group.empty()) throw std::invalid_argument("difficulty filter on empty group");
    const std::size_t correct = static_cast<std::size_t>(
        std::count_if(group.begin(), group.end(), [](const auto& m) { return m.correct; }));
    if (correct < cfg.min_correct) return false;
    // A single attempt carries no difficulty signal, so the accuracy rule
    // only applies to groups of two or more.
    if (group.size() >= 2) {
        const double accuracy = static_cast<double>(correct) / static_cast<double>(group.size());
        if (accuracy >= cfg.accuracy_drop_threshold) return false;
    }
    return true;
}

std::size_t select_best(const std::vector<ResponseMetadata>& survivors) {
    if (survivors.empty()) throw SelectionError("no surviving candidates to select from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < survivors.size(); ++i) {
        const auto& a = survivors[i];
        const auto& b = survivors[best];
        if (a.search_steps != b.search_steps) {
            if (a.search_steps < b.search_steps) best = i;
        } else if (a.distinct_query_count != b.distinct_query_count) {
            if (a.distinct_query_count > b.distinct_query_count) best = i;
        } else if (a.reasoning_length < b.reasoning_length) {
            best = i;
        }
    }
    return best;
}

const char* curation_stage_name(CurationStage stage) {
    switch (stage) {
        case CurationStage::format: return "format";
        case CurationStage::reasoning_path: return "reasoning_path";
        case CurationStage::difficulty: return "difficulty";
        case CurationStage::correctness: return "correctness";
        case CurationStage::selection: return "selection";
    }
    return "format";
}

json AuditEntry::to_json() const {
    return json{{"question_id", question_id},
                {"candidate_index", candidate_index},
                {"stage", curation_stage_name(stage)},
                {"reason_code", reason_code}};
}

json CuratedEntry::to_json() const {
    return json{{"question_id", question_id},
                {"question", question},
                {"gold_answers", gold_answers},
                {"trajectory_ref", trajectory.id},
                {"metadata", metadata.to_json()}};
}

CurationOutcome curate(const std::map<std::string, std::vector<Trajectory>>& candidates,
                       const CurationConfig& cfg, const CorrectnessOracle& oracle) {
    cfg.validate();
    CurationOutcome outcome;

    for (const auto& [question_id, trajectories] : candidates) {
        if (trajectories.empty()) continue;
        const auto& golds = trajectories.front().query.record.gold_answers;

        std::vector<ResponseMetadata> metadata;
        metadata.reserve(trajectories.size());
        for (const auto& t : trajectories)
            metadata.push_back(collect_metadata(t, golds, oracle, cfg));

        // Stages 1+2: per-candidate format and reasoning-path filters.
        std::vector<std::size_t> stage2;
        std::vector<std::optional<AuditEntry>> rejection(trajectories.size());
        for (std::size_t i = 0; i < trajectories.size(); ++i) {
            const FormatCheck format = filter_format(trajectories[i], cfg);
            if (!format.pass) {
                rejection[i] = AuditEntry{question_id, i, CurationStage::format,
                                          format_reason_name(format.reasons.front())};
                continue;
            }
            if (!filter_reasoning_path(metadata[i], cfg)) {
                const char* code = metadata[i].reflection_count > cfg.max_reflections
                                       ? "reflections_exceeded"
                                       : "reasoning_too_long";
                rejection[i] =
                    AuditEntry{question_id, i, CurationStage::reasoning_path, code};
                continue;
            }
            stage2.push_back(i);
        }

        // Stage 3: question difficulty over all attempts.
        if (!filter_difficulty(metadata, cfg)) {
            const std::size_t correct = static_cast<std::size_t>(std::count_if(
                metadata.begin(), metadata.end(), [](const auto& m) { return m.correct; }));
            const char* code =
                correct < cfg.min_correct ? "no_correct_candidate" : "question_too_easy";
            for (std::size_t i : stage2)
                rejection[i] = AuditEntry{question_id, i, CurationStage::difficulty, code};
            for (const auto& entry : rejection)
                if (entry) outcome.audit.push_back(*entry);
            continue;
        }

        // Stage 4: survivors must be correct; selection prefers effective
        // search behavior.
        std::vector<std::size_t> survivors;
        for (std::size_t i : stage2) {
            if (metadata[i].correct) {
                survivors.push_back(i);
            } else {
                rejection[i] = AuditEntry{question_id, i, CurationStage::correctness, "incorrect"};
            }
        }

        if (!survivors.empty()) {
            std::vector<ResponseMetadata> survivor_metadata;
            for (std::size_t i : survivors) survivor_metadata.push_back(metadata[i]);
            const std::size_t chosen = survivors[select_best(survivor_metadata)];

            CuratedEntry entry;
            entry.question_id = question_id;
            entry.question = trajectories[chosen].query.record.question;
            entry.gold_answers = golds;
            entry.trajectory = trajectories[chosen];
            entry.metadata = metadata[chosen];
            outcome.curated.push_back(std::move(entry));

            for (std::size_t i : survivors) {
                if (i == chosen) continue;
                rejection[i] = AuditEntry{question_id, i, CurationStage::selection, "not_selected"};
                outcome.non_selected_survivors.push_back(trajectories[i]);
            }
        }

        for (const auto& entry : rejection)
            if (entry) outcome.audit.push_back(*entry);
    }
    return outcome;
}

}  // namespace dsearch
