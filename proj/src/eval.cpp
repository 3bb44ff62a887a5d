#include "dsearch/eval.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "dsearch/text.hpp"

namespace dsearch {

double f1(const std::string& pred, const std::string& gold) {
    const auto pred_tokens = split_whitespace(normalize_answer(pred));
    const auto gold_tokens = split_whitespace(normalize_answer(gold));
    if (pred_tokens.empty() && gold_tokens.empty()) return 1.0;
    if (pred_tokens.empty() || gold_tokens.empty()) return 0.0;

    std::unordered_map<std::string, std::size_t> gold_counts;
    for (const auto& tok : gold_tokens) ++gold_counts[tok];
    std::size_t overlap = 0;
    for (const auto& tok : pred_tokens) {
        auto it = gold_counts.find(tok);
        if (it != gold_counts.end() && it->second > 0) {
            ++overlap;
            --it->second;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(pred_tokens.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(gold_tokens.size());
    return 2 * precision * recall / (precision + recall);
}

double best_f1(const std::string& pred, const std::vector<std::string>& golds) {
    if (golds.empty()) throw std::invalid_argument("best_f1 requires at least one gold answer");
    double best = 0.0;
    for (const auto& gold : golds) best = std::max(best, f1(pred, gold));
    return best;
}

std::string judge_prompt(const std::string& question, const std::string& pred,
                         const std::vector<std::string>& golds) {
    std::string refs;
    for (const auto& gold : golds) {
        if (!refs.empty()) refs += " | ";
        refs += gold;
    }
    return "Decide whether the predicted answer matches any reference answer to the "
           "question, allowing rephrasings of the same fact.\n\nQuestion: " +
           question + "\nPredicted answer: " + pred + "\nReference answers: " + refs +
           "\n\nReply with exactly one word: Correct or Incorrect.";
}

namespace {

std::optional<bool> parse_verdict(const std::string& reply) {
    const bool says_correct = count_word_occurrences(reply, "correct") > 0;
    const bool says_incorrect = count_word_occurrences(reply, "incorrect") > 0;
    if (says_incorrect && !says_correct) return false;
    if (says_correct && !says_incorrect) return true;
    return std::nullopt;
}

}  // namespace

std::optional<bool> llm_judge(const std::string& question, const std::string& pred,
                              const std::vector<std::string>& golds, LlmClient& judge) {
    ChatRequest request;
    request.messages = {{Role::system, "You grade QA predictions."},
                        {Role::user, judge_prompt(question, pred, golds)}};
    request.temperature = 0.0;
    request.max_tokens = 64;

    for (int attempt = 0; attempt < 2; ++attempt) {
        const ChatResponse response = judge.chat_complete(request);
        const auto verdict = parse_verdict(response.text);
        if (verdict) return verdict;
        request.messages.back().text += "\n\nAnswer with the single word Correct or Incorrect.";
    }
    return std::nullopt;  // abstain
}

StageFlags stage_attribution(const Trajectory& t, const std::vector<std::string>& golds) {
    StageFlags flags;
    const std::string generated = t.generated_text();
    for (const auto& gold : golds) {
        if (!flags.planning && contains_token_subsequence(generated, gold)) flags.planning = true;
        for (const auto& turn : t.turns) {
            if (!turn.search) continue;
            if (!flags.search) {
                for (const auto& result : turn.search->results) {
                    if (contains_token_subsequence(result.extracted_text, gold)) {
                        flags.search = true;
                        break;
                    }
                }
            }
            if (!flags.summarization &&
                contains_token_subsequence(turn.search->summary, gold))
                flags.summarization = true;
        }
    }
    return flags;
}

OutputStats output_stats(const std::vector<Trajectory>& ts) {
    if (ts.empty()) throw std::invalid_argument("output_stats requires a non-empty list");
    OutputStats stats;
    for (const auto& t : ts) {
        const std::string generated = t.generated_text();
        stats.mean_reflections +=
            static_cast<double>(count_word_occurrences(generated, "alternatively"));
        stats.mean_searches += static_cast<double>(t.counters.search_calls);
        stats.mean_length += static_cast<double>(whitespace_token_count(generated));
    }
    const double n = static_cast<double>(ts.size());
    stats.mean_reflections /= n;
    stats.mean_searches /= n;
    stats.mean_length /= n;
    return stats;
}

json EvalItem::to_json() const {
    json j{{"id", id},
           {"f1", f1},
           {"stages",
            {{"planning", stages.planning},
             {"search", stages.search},
             {"summarization", stages.summarization}}}};
    if (judge) j["judge"] = *judge;
    if (judge_abstained) j["judge_abstained"] = true;
    return j;
}

json EvalReport::aggregate_json() const {
    return json{{"items", items.size()},
                {"mean_f1", mean_f1},
                {"judge_accuracy", judge_accuracy},
                {"judged", judged},
                {"judge_abstentions", judge_abstentions},
                {"stats",
                 {{"mean_reflections", stats.mean_reflections},
                  {"mean_searches", stats.mean_searches},
                  {"mean_length", stats.mean_length}}},
                {"stage_rates",
                 {{"planning", stage_rates.planning},
                  {"search", stage_rates.search},
                  {"summarization", stage_rates.summarization}}}};
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    out << "metric                value\n";
    out << "--------------------  ----------\n";
    auto row = [&out](const char* name, double value) {
        out << name;
        for (std::size_t i = std::string(name).size(); i < 22; ++i) out << ' ';
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", value);
        out << buf << '\n';
    };
    row("items", static_cast<double>(items.size()));
    row("mean_f1", mean_f1);
    row("judge_accuracy", judge_accuracy);
    row("judge_abstentions", static_cast<double>(judge_abstentions));
    row("mean_reflections", stats.mean_reflections);
    row("mean_searches", stats.mean_searches);
    row("mean_length", stats.mean_length);
    row("stage_planning", stage_rates.planning);
    row("stage_search", stage_rates.search);
    row("stage_summarization", stage_rates.summarization);
    return out.str();
}

EvalReport evaluate(const std::vector<Trajectory>& ts, LlmClient* judge,
                    const EvalSelection& selection) {
    EvalReport report;
    if (ts.empty()) return report;

    std::size_t judged_true = 0;
    double planning = 0, search = 0, summarization = 0;
    for (const auto& t : ts) {
        EvalItem item;
        item.id = t.id;
        const auto& golds = t.query.record.gold_answers;
        const std::string pred = t.final_answer.value_or("");
        if (selection.with_f1 && !golds.empty()) item.f1 = best_f1(pred, golds);
        if (selection.with_judge && judge) {
            item.judge = llm_judge(t.query.record.question, pred, golds, *judge);
            if (item.judge) {
                ++report.judged;
                if (*item.judge) ++judged_true;
            } else {
                item.judge_abstained = true;
                ++report.judge_abstentions;
            }
        }
        if (selection.with_stages) {
            item.stages = stage_attribution(t, golds);
            planning += item.stages.planning ? 1 : 0;
            search += item.stages.search ? 1 : 0;
            summarization += item.stages.summarization ? 1 : 0;
        }
        report.mean_f1 += item.f1;
        report.items.push_back(std::move(item));
    }
    const double n = static_cast<double>(ts.size());
    report.mean_f1 /= n;
    if (report.judged > 0)
        report.judge_accuracy =
            static_cast<double>(judged_true) / static_cast<double>(report.judged);
    if (selection.with_stats) report.stats = output_stats(ts);
    report.stage_rates = {planning / n, search / n, summarization / n};
    return report;
}

}  // namespace dsearch
