#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "distill/annotation_cache.hpp"
#include "distill/data.hpp"
#include "distill/parsing.hpp"
#include "distill/teacher.hpp"

namespace distill {

struct AnnotatorOptions {
    int max_retries = 3;            // validity retries; transport retries are separate
    double base_temperature = 0.0;
    double retry_temperature = 0.7; // first rejection raises the temperature
    int max_tokens = 512;
    int max_transport_retries = 3;
    int backoff_initial_ms = 50;    // doubles per transport retry
    std::uint64_t seed = 0;
    AnnotationCache* cache = nullptr;
};

template <typename Chain>
struct AnnotationOutcome {
    std::optional<Chain> chain;
    int attempts = 0;
};

// Prompts the teacher for a chain of reasoning steps, one per line, and
// accepts only when the extracted final answer matches gold. Re-samples at
// the retry temperature up to max_retries times.
AnnotationOutcome<ReasoningChain> annotate_cot(const Problem& p, TeacherClient& client,
                                               const PromptTemplate& tmpl, const AnnotatorOptions& opt);

// Same loop, completion parsed as strictly alternating "SQk:"/"Ak:" blocks.
AnnotationOutcome<SocraticChain> annotate_socratic(const Problem& p, TeacherClient& client,
                                                   const PromptTemplate& tmpl, const AnnotatorOptions& opt);

// Generates one subquestion per gold step; step text is preserved verbatim
// as the solutions. Rejects completions whose question count differs.
AnnotationOutcome<SocraticChain> questions_from_steps(const Problem& p, TeacherClient& client,
                                                      const PromptTemplate& tmpl, const AnnotatorOptions& opt);

// Generates one fact per provided gold subquestion, in order; the completion
// must end with a final-answer line matching the boolean gold answer.
AnnotationOutcome<SocraticChain> facts_from_questions(const Problem& p, TeacherClient& client,
                                                      const PromptTemplate& tmpl, const AnnotatorOptions& opt);

// Two-stage prompting of the teacher itself: decompose into subquestions,
// then solve them in a single shot. No gold-answer filtering; this is an
// evaluation mode. Throws PromptingError when stage 1 is unusable.
struct PromptSolveResult {
    SocraticChain chain;
    std::optional<Answer> answer;
};
PromptSolveResult socratic_prompt_solve(const Problem& p, TeacherClient& client,
                                        const PromptTemplate& decompose_tmpl,
                                        const PromptTemplate& solve_tmpl, const AnnotatorOptions& opt);

// Dataset-level driver used by the annotate command.
enum class AnnotationMode { cot, socratic, questions_from_steps, facts_from_questions };
std::string to_string(AnnotationMode m);
std::optional<AnnotationMode> annotation_mode_from_string(const std::string& s);

struct AnnotateStats {
    int total = 0;
    int accepted = 0;
    std::map<int, int> attempts_histogram;
    long teacher_calls = 0;

    double acceptance_rate() const { return total == 0 ? 0.0 : static_cast<double>(accepted) / total; }
};

// Annotates every problem independently with `parallelism` workers. Results
// are assembled in dataset order regardless of completion order. Clients
// that are not concurrent-safe are serialized behind a mutex.
AnnotatedDataset annotate_dataset(const Dataset& d, AnnotationMode mode, TeacherClient& client,
                                  const PromptTemplate& tmpl, const AnnotatorOptions& opt,
                                  AnnotateStats* stats = nullptr, int parallelism = 1);

} // namespace distill
