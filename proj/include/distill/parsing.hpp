#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distill/data.hpp"

namespace distill {

// Completion text utilities shared by the annotator and the inference loop.

// Non-empty trimmed lines; parsing stops at a bare "---" line (run-on into
// the next few-shot exemplar).
std::vector<std::string> completion_lines(const std::string& completion);

// Strictly alternating, 1-indexed, gap-free "SQk:"/"Ak:" blocks. Lines
// without a marker continue the current block. nullopt on any violation.
std::optional<std::vector<SocraticPair>> parse_subquestion_blocks(const std::string& completion);

// Drops "SQk:"/"Qk:"/"1."/"1)" list prefixes from question lines.
std::vector<std::string> strip_question_prefixes(const std::vector<std::string>& lines);

// Splits generated text into subquestion/solution segments: a sentence
// ending in '?' opens a question, following sentences form its solution.
// Text before the first question is ignored.
void split_qa_segments(const std::string& text, std::vector<std::string>* questions,
                       std::vector<std::string>* solutions);

} // namespace distill
