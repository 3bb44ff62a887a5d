#pragma once

#include <string>
#include <vector>

#include "dsearch/chat.hpp"
#include "dsearch/jsonl.hpp"

namespace dsearch {

struct QaRecord {
    std::string id;
    std::string question;
    std::vector<std::string> gold_answers;  // non-empty
    std::string source;

    json to_json() const;
    static QaRecord from_json(const json& j);

    bool operator==(const QaRecord&) const = default;
};

struct AnnotatedQuery {
    QaRecord record;
    std::string domain;  // member of the configured label set
    std::vector<std::string> keywords;  // lowercase, normalized, de-duplicated
    std::size_t interrogative_count = 0;

    json to_json() const;
    static AnnotatedQuery from_json(const json& j);

    bool operator==(const AnnotatedQuery&) const = default;
};

enum class CorpusFormat { jsonl, tsv };

// Question words counted as a proxy for inquiry complexity.
const std::vector<std::string>& default_interrogative_lexicon();

// The 16 domain labels used when no label set is configured; "other" is the
// closed-set fallback and always present.
const std::vector<std::string>& default_domain_labels();

// Loads QA records from disk. JSONL rows look like
//   {"id": ..., "question": ..., "gold_answers": [...], "source": ...}
// ("answers"/"answer" accepted as aliases for gold_answers; ids are
// synthesized as <source>-<row> when absent). TSV columns are
// question, '|'-separated answers, then optional id and source.
// Malformed rows raise ParseError naming the 1-based line number.
std::vector<QaRecord> load_qa_dataset(const std::string& path, CorpusFormat format);

std::size_t count_interrogatives(const std::string& question);
std::size_t count_interrogatives(const std::string& question,
                                 const std::vector<std::string>& lexicon);

// Asks the LLM for a domain label and keyword set, then normalizes both.
// Domains outside label_set map to "other"; keywords are lowercased,
// whitespace-collapsed, de-duplicated and capped at five words each.
// interrogative_count is always computed locally.
AnnotatedQuery annotate_query(const QaRecord& record, LlmClient& llm,
                              const std::vector<std::string>& label_set,
                              const std::vector<std::string>& lexicon =
                                  default_interrogative_lexicon());

// Annotates records concurrently (the LLM client must be thread-safe).
// Input order is preserved; the first per-record error aborts the batch.
std::vector<AnnotatedQuery> annotate_all(const std::vector<QaRecord>& records, LlmClient& llm,
                                         const std::vector<std::string>& label_set,
                                         unsigned concurrency = 8,
                                         const std::vector<std::string>& lexicon =
                                             default_interrogative_lexicon());

// Prompt sent to the annotation model; {question} and {labels} are
// substituted.
std::string annotation_prompt(const std::string& question,
                              const std::vector<std::string>& label_set);

}  // namespace dsearch
