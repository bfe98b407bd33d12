#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "distill/answer.hpp"

namespace distill {

// Which intermediate annotation a corpus ships with.
enum class Regime { step_by_step, supporting_facts, answers_only };

std::string to_string(Regime r);
std::optional<Regime> regime_from_string(const std::string& s);

enum class Split { train, validation, test };
std::string to_string(Split s);

// One reasoning task. Immutable after construction.
struct Problem {
    std::string id;
    std::string text;
    Answer gold_answer = Answer::numeric(Rational(0));
    std::optional<std::vector<std::string>> gold_steps;
    std::optional<std::vector<std::string>> gold_facts;
    std::optional<std::vector<std::string>> gold_subquestions;
};

// Ordered chain-of-thought steps with per-step extracted answers.
struct ReasoningChain {
    std::vector<std::string> steps;
    std::vector<std::optional<Answer>> step_answers;

    std::size_t size() const { return steps.size(); }
    const std::optional<Answer>& final_answer() const { return step_answers.back(); }
};

// Ordered subquestion-solution pairs with per-step extracted answers.
struct SocraticPair {
    std::string subquestion;
    std::string solution;
};

struct SocraticChain {
    std::vector<SocraticPair> pairs;
    std::vector<std::optional<Answer>> step_answers;

    std::size_t size() const { return pairs.size(); }
    const std::optional<Answer>& final_answer() const { return step_answers.back(); }
};

struct Dataset {
    std::string name;
    Regime regime = Regime::answers_only;
    Split split = Split::train;
    std::vector<Problem> problems;

    std::size_t size() const { return problems.size(); }
    const Problem* find(const std::string& id) const;
};

struct Annotation {
    std::optional<ReasoningChain> cot;
    std::optional<SocraticChain> socratic;
};

enum class AnnotationSource { gold, teacher };
std::string to_string(AnnotationSource s);

struct Provenance {
    AnnotationSource source = AnnotationSource::teacher;
    int attempts = 1;
};

// A dataset plus whatever chains annotation produced for a subset of it.
struct AnnotatedDataset {
    Dataset base;
    std::map<std::string, Annotation> annotations; // keyed by problem id
    std::map<std::string, Provenance> provenance;

    const Annotation* annotation_for(const std::string& id) const;
};

// Constructs a chain, filling step_answers by heuristic extraction from each
// step (declared here, implemented with the text heuristics).
ReasoningChain make_reasoning_chain(std::vector<std::string> steps, AnswerKind kind);
SocraticChain make_socratic_chain(std::vector<SocraticPair> pairs, AnswerKind kind);

// Trims whitespace and guarantees the trailing question mark.
std::string normalize_subquestion(const std::string& q);

} // namespace distill
