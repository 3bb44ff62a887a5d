#include "dsearch/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>
#include <unordered_set>

#include "dsearch/errors.hpp"
#include "dsearch/text.hpp"

namespace dsearch {

json QaRecord::to_json() const {
    return json{{"id", id},
                {"question", question},
                {"gold_answers", gold_answers},
                {"source", source}};
}

QaRecord QaRecord::from_json(const json& j) {
    QaRecord r;
    r.id = j.at("id").get<std::string>();
    r.question = j.at("question").get<std::string>();
    r.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
    r.source = j.value("source", "");
    return r;
}

json AnnotatedQuery::to_json() const {
    json j = record.to_json();
    j["domain"] = domain;
    j["keywords"] = keywords;
    j["interrogative_count"] = interrogative_count;
    return j;
}

AnnotatedQuery AnnotatedQuery::from_json(const json& j) {
    AnnotatedQuery q;
    q.record = QaRecord::from_json(j);
    q.domain = j.at("domain").get<std::string>();
    q.keywords = j.at("keywords").get<std::vector<std::string>>();
    q.interrogative_count = j.at("interrogative_count").get<std::size_t>();
    return q;
}

const std::vector<std::string>& default_interrogative_lexicon() {
    static const std::vector<std::string> lexicon = {"what", "when",  "where", "who", "whom",
                                                     "whose", "which", "why",   "how"};
    return lexicon;
}

const std::vector<std::string>& default_domain_labels() {
    static const std::vector<std::string> labels = {
        "film",       "geography", "politics",  "history",  "science",  "sports",
        "music",      "literature", "television", "business", "technology", "art",
        "religion",   "military",  "medicine",  "other"};
    return labels;
}

namespace {

std::vector<std::string> answers_from_row(const json& row) {
    for (const char* key : {"gold_answers", "answers", "answer"}) {
        if (!row.contains(key)) continue;
        const json& value = row.at(key);
        if (value.is_string()) return {value.get<std::string>()};
        if (value.is_array()) {
            std::vector<std::string> out;
            for (const auto& item : value)
                if (item.is_string()) out.push_back(item.get<std::string>());
            return out;
        }
    }
    return {};
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

void check_record(QaRecord& record, long line, std::unordered_set<std::string>& seen_ids,
                  const std::string& default_source, long row_index) {
    if (record.source.empty()) record.source = default_source;
    if (record.id.empty()) record.id = record.source + "-" + std::to_string(row_index);
    record.question = trim(record.question);
    if (record.question.empty()) throw ParseError("missing question", line);
    std::vector<std::string> answers;
    for (auto& a : record.gold_answers) {
        a = trim(a);
        if (!a.empty()) answers.push_back(a);
    }
    record.gold_answers = std::move(answers);
    if (record.gold_answers.empty()) throw ParseError("missing gold_answers", line);
    if (!seen_ids.insert(record.id).second)
        throw ParseError("duplicate id '" + record.id + "'", line);
}

}  // namespace

std::vector<QaRecord> load_qa_dataset(const std::string& path, CorpusFormat format) {
    const std::string default_source = std::filesystem::path(path).stem().string();
    std::vector<QaRecord> records;
    std::unordered_set<std::string> seen_ids;

    if (format == CorpusFormat::jsonl) {
        long row_index = 0;
        for_each_jsonl(path, [&](const json& row, long line) {
            if (!row.is_object()) throw ParseError("row is not an object", line);
            QaRecord record;
            record.id = row.value("id", "");
            record.question = row.value("question", "");
            record.gold_answers = answers_from_row(row);
            record.source = row.value("source", "");
            check_record(record, line, seen_ids, default_source, row_index++);
            records.push_back(std::move(record));
        });
        return records;
    }

    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    long line_no = 0;
    long row_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cols = split_on(line, '\t');
        if (cols.size() < 2) throw ParseError("expected at least 2 tab-separated columns", line_no);
        QaRecord record;
        record.question = cols[0];
        record.gold_answers = split_on(cols[1], '|');
        if (cols.size() > 2) record.id = trim(cols[2]);
        if (cols.size() > 3) record.source = trim(cols[3]);
        check_record(record, line_no, seen_ids, default_source, row_index++);
        records.push_back(std::move(record));
    }
    return records;
}

std::size_t count_interrogatives(const std::string& question) {
    return count_interrogatives(question, default_interrogative_lexicon());
}

std::size_t count_interrogatives(const std::string& question,
                                 const std::vector<std::string>& lexicon) {
    std::size_t total = 0;
    for (const auto& term : lexicon) total += count_word_occurrences(question, term);
    return total;
}

std::string annotation_prompt(const std::string& question,
                              const std::vector<std::string>& label_set) {
    std::string labels;
    for (const auto& label : label_set) {
        if (!labels.empty()) labels += ", ";
        labels += label;
    }
    return "Classify the question into exactly one domain from this list: " + labels +
           ".\n"
           "Then extract its keywords: the key entities, the critical attributes, the core "
           "relationships, and the measurement dimensions the question hinges on. Keep each "
           "keyword short and generic (e.g. \"film\", \"age\"), not a copy of the question.\n"
           "Reply with JSON only: {\"domain\": \"...\", \"keywords\": [\"...\"]}\n\n"
           "Question: " +
           question + "\n";
}

namespace {

json extract_json_object(const std::string& text) {
    const auto start = text.find('{');
    if (start == std::string::npos) return json();
    const auto end = text.rfind('}');
    if (end == std::string::npos || end < start) return json();
    json parsed = json::parse(text.substr(start, end - start + 1), nullptr, false);
    return parsed.is_discarded() ? json() : parsed;
}

}  // namespace

AnnotatedQuery annotate_query(const QaRecord& record, LlmClient& llm,
                              const std::vector<std::string>& label_set,
                              const std::vector<std::string>& lexicon) {
    if (label_set.empty()) throw std::invalid_argument("label_set is empty");

    ChatRequest request;
    request.messages = {{Role::system, "You annotate questions for a QA corpus."},
                        {Role::user, annotation_prompt(record.question, label_set)}};
    request.temperature = 0.0;
    request.max_tokens = 512;

    ChatResponse response;
    try {
        response = llm.chat_complete(request);
    } catch (const std::exception& e) {
        throw AnnotationError(AnnotationError::Code::backend_failure, record.id, e.what());
    }

    const json parsed = extract_json_object(response.text);
    if (!parsed.is_object() || !parsed.contains("domain") || !parsed.contains("keywords") ||
        !parsed.at("keywords").is_array()) {
        throw AnnotationError(AnnotationError::Code::unparsable_output, record.id,
                              "annotator reply is not the expected JSON object");
    }

    AnnotatedQuery annotated;
    annotated.record = record;

    const std::string domain = normalize_phrase(parsed.at("domain").get<std::string>());
    annotated.domain = "other";
    for (const auto& label : label_set) {
        if (normalize_phrase(label) == domain) {
            annotated.domain = label;
            break;
        }
    }

    std::unordered_set<std::string> seen;
    for (const auto& raw : parsed.at("keywords")) {
        if (!raw.is_string()) continue;
        const std::string kw = normalize_phrase(raw.get<std::string>());
        if (kw.empty() || whitespace_token_count(kw) > 5) continue;
        if (seen.insert(kw).second) annotated.keywords.push_back(kw);
    }

    annotated.interrogative_count = count_interrogatives(record.question, lexicon);
    return annotated;
}

std::vector<AnnotatedQuery> annotate_all(const std::vector<QaRecord>& records, LlmClient& llm,
                                         const std::vector<std::string>& label_set,
                                         unsigned concurrency,
                                         const std::vector<std::string>& lexicon) {
    std::vector<AnnotatedQuery> out(records.size());
    if (records.empty()) return out;
    concurrency = std::max(1u, std::min<unsigned>(concurrency, records.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= records.size()) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            try {
                out[i] = annotate_query(records[i], llm, label_set, lexicon);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    for (unsigned t = 0; t < concurrency; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace dsearch
