#pragma once

// Builds synthetic trajectories with the same raw_text/span bookkeeping the
// orchestrator produces, for tests that need precise control over content.

#include <string>
#include <vector>

#include "dsearch/orchestrator.hpp"
#include "dsearch/text.hpp"

namespace testutil {

class TrajectoryBuilder {
public:
    explicit TrajectoryBuilder(std::string id, std::string question = "What is it?",
                               std::vector<std::string> golds = {"gold"}) {
        t_.id = std::move(id);
        t_.query.record.id = t_.id;
        t_.query.record.question = std::move(question);
        t_.query.record.gold_answers = std::move(golds);
        t_.query.record.source = "test";
        t_.query.domain = "other";
        t_.query.interrogative_count = 0;
        t_.raw_text = cfg_.prompt.render(t_.query.record.question);
        t_.prompt_length = t_.raw_text.size();
        t_.stop_reason = dsearch::StopReason::max_turns;
    }

    TrajectoryBuilder& reason(const std::string& text) {
        append_generated(text);
        dsearch::TrajectoryTurn turn;
        turn.turn_index = next_turn_++;
        turn.reasoning = text;
        t_.turns.push_back(std::move(turn));
        t_.counters.total_turns = next_turn_;
        return *this;
    }

    TrajectoryBuilder& search_turn(const std::string& query,
                                   const std::vector<std::string>& doc_texts,
                                   const std::string& summary,
                                   const std::string& pre_text = "checking ") {
        const std::string generated =
            pre_text + cfg_.search_tokens.begin + query + cfg_.search_tokens.end;
        append_generated(generated);

        dsearch::TrajectoryTurn turn;
        turn.turn_index = next_turn_++;
        turn.reasoning = pre_text;
        dsearch::SearchEvent event;
        event.query = query;
        int rank = 1;
        for (const auto& text : doc_texts) {
            dsearch::SearchResult result;
            result.rank = rank++;
            result.url = "http://doc/" + std::to_string(rank);
            result.title = "doc";
            result.extracted_text = text;
            event.results.push_back(std::move(result));
        }
        event.summary = summary;
        turn.search = std::move(event);
        t_.turns.push_back(std::move(turn));
        t_.counters.total_turns = next_turn_;
        ++t_.counters.search_calls;

        inject(summary, dsearch::SpanKind::injected_doc);
        return *this;
    }

    TrajectoryBuilder& malformed_turn(const std::string& pre_text = "broken ") {
        const std::string generated = pre_text + cfg_.search_tokens.begin + "never closed";
        append_generated(generated);
        dsearch::TrajectoryTurn turn;
        turn.turn_index = next_turn_++;
        turn.reasoning = generated;
        turn.malformed_search = true;
        t_.turns.push_back(std::move(turn));
        t_.counters.total_turns = next_turn_;
        return *this;
    }

    TrajectoryBuilder& limit_notice() {
        inject(dsearch::kSearchLimitNotice, dsearch::SpanKind::injected_notice);
        return *this;
    }

    TrajectoryBuilder& answer(const std::string& text, const std::string& lead = "So: ") {
        append_generated(lead + "\\boxed{" + text + "}");
        dsearch::TrajectoryTurn turn;
        turn.turn_index = next_turn_++;
        turn.reasoning = lead + "\\boxed{" + text + "}";
        t_.turns.push_back(std::move(turn));
        t_.counters.total_turns = next_turn_;
        t_.final_answer = text;
        t_.stop_reason = dsearch::StopReason::answered;
        return *this;
    }

    TrajectoryBuilder& stop(dsearch::StopReason reason) {
        t_.stop_reason = reason;
        if (reason != dsearch::StopReason::answered) t_.final_answer.reset();
        return *this;
    }

    dsearch::Trajectory build() const { return t_; }

private:
    void append_generated(const std::string& text) {
        t_.raw_text += text;
        t_.counters.generated_tokens +=
            static_cast<std::int64_t>(dsearch::whitespace_token_count(text));
    }

    void inject(const std::string& content, dsearch::SpanKind kind) {
        const std::string block = "\n" + cfg_.begin_result_token + "\n" + content + "\n" +
                                  cfg_.end_result_token + "\n";
        dsearch::SpanRecord span;
        span.start = t_.raw_text.size();
        span.end = span.start + block.size();
        span.kind = kind;
        t_.raw_text += block;
        t_.spans.push_back(span);
    }

    dsearch::LoopConfig cfg_;
    dsearch::Trajectory t_;
    int next_turn_ = 0;
};

}  // namespace testutil
