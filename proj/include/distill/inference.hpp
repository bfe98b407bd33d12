#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distill/data.hpp"
#include "distill/training.hpp"

namespace distill {

enum class InferMode { answer_only, cot, unified, iterative };
std::string to_string(InferMode m);
std::optional<InferMode> infer_mode_from_string(const std::string& s);

enum class Termination { completed, max_steps, empty_generation, parse_failure };
std::string to_string(Termination t);

// Full record of one student inference run.
struct InferenceTrace {
    std::string problem_id;
    InferMode mode = InferMode::answer_only;
    std::vector<std::string> generated_questions;
    std::vector<std::string> generated_solutions;
    std::string final_text;
    std::optional<Answer> predicted;
    Termination termination = Termination::completed;
};

// One greedy pass from the problem text; the raw output is split back into
// question/solution segments where the format permits.
InferenceTrace infer_unified(const Problem& p, const ModelHandle& m, const StudentBackend& backend,
                             const SamplingConfig& sampling);

InferenceTrace infer_answer_only(const Problem& p, const ModelHandle& m, const StudentBackend& backend,
                                 const SamplingConfig& sampling);
InferenceTrace infer_cot(const Problem& p, const ModelHandle& m, const StudentBackend& backend,
                         const SamplingConfig& sampling);

// The decompose-then-solve loop: QG generates every subquestion up front,
// then QA answers them one by one, each step conditioned on the model's own
// earlier solutions. With a guide model, its prediction is prepended to the
// QG context in the training-time guidance format.
InferenceTrace infer_iterative(const Problem& p, const ModelHandle& qg, const ModelHandle& qa,
                               const StudentBackend& backend, const SamplingConfig& sampling,
                               const ModelHandle* guide = nullptr, int max_steps = 8);

// Trace files: one JSON object per line, stable field names.
void write_traces(const std::vector<InferenceTrace>& traces, const std::string& path);
std::vector<InferenceTrace> read_traces(const std::string& path);

} // namespace distill
