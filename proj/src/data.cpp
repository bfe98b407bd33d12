#include "distill/data.hpp"

#include <cctype>

#include "distill/extract.hpp"

namespace distill {

std::string to_string(Regime r) {
    switch (r) {
        case Regime::step_by_step: return "step_by_step";
        case Regime::supporting_facts: return "supporting_facts";
        case Regime::answers_only: return "answers_only";
    }
    return "answers_only";
}

std::optional<Regime> regime_from_string(const std::string& s) {
    if (s == "step_by_step") return Regime::step_by_step;
    if (s == "supporting_facts") return Regime::supporting_facts;
    if (s == "answers_only") return Regime::answers_only;
    return std::nullopt;
}

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "train";
}

std::string to_string(AnnotationSource s) {
    return s == AnnotationSource::gold ? "gold" : "teacher";
}

const Problem* Dataset::find(const std::string& id) const {
    for (const auto& p : problems) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

const Annotation* AnnotatedDataset::annotation_for(const std::string& id) const {
    auto it = annotations.find(id);
    return it == annotations.end() ? nullptr : &it->second;
}

ReasoningChain make_reasoning_chain(std::vector<std::string> steps, AnswerKind kind) {
    ReasoningChain chain;
    chain.steps = std::move(steps);
    chain.step_answers.reserve(chain.steps.size());
    for (const auto& s : chain.steps) {
        chain.step_answers.push_back(extract_final_answer(s, kind));
    }
    return chain;
}

SocraticChain make_socratic_chain(std::vector<SocraticPair> pairs, AnswerKind kind) {
    SocraticChain chain;
    chain.pairs = std::move(pairs);
    for (auto& p : chain.pairs) {
        p.subquestion = normalize_subquestion(p.subquestion);
    }
    chain.step_answers.reserve(chain.pairs.size());
    for (const auto& p : chain.pairs) {
        chain.step_answers.push_back(extract_final_answer(p.solution, kind));
    }
    return chain;
}

std::string normalize_subquestion(const std::string& q) {
    std::size_t begin = 0;
    std::size_t end = q.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(q[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(q[end - 1]))) --end;
    std::string out = q.substr(begin, end - begin);
    if (out.empty() || out.back() != '?') out.push_back('?');
    return out;
}

} // namespace distill
