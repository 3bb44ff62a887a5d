#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsearch/chat.hpp"
#include "dsearch/orchestrator.hpp"

namespace dsearch {

// Deterministic offline backends behind the CLI's --mock mode. Each script
// is a pure function of the request, so recording and replaying them is
// stable and concurrent use is safe.

std::uint64_t fnv1a64(std::string_view s);

// Labels a question by keyword rules, falling back to a stable hash pick;
// keywords are the question's salient words. Replies with the annotation
// JSON the corpus module expects.
ScriptedLlmClient::Script mock_annotator_script(std::vector<std::string> labels);

// Searches on the first turn, then answers from the injected evidence.
// A slice of seeds produces sloppy behavior on purpose (reflection spam,
// skipped searches, wrong answers) so curation has something to reject.
ScriptedLlmClient::Script mock_reasoner_script(const LoopConfig& cfg);

// Echoes the document bodies from the summarizer prompt, preserving any
// "Answer: ..." statements so the mock reasoner can quote them.
ScriptedLlmClient::Script mock_summarizer_script();

// Grades by token F1 against the reference answers in the judge prompt.
ScriptedLlmClient::Script mock_judge_script();

}  // namespace dsearch
