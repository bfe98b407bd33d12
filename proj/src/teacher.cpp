#include "distill/teacher_mock.hpp"

#include <sstream>

#include "distill/errors.hpp"
#include "distill/extract.hpp"
#include "distill/rng.hpp"

namespace distill {

OracleTeacher::OracleTeacher(Dataset dataset, AnnotationMode mode, double correct_prob, std::uint64_t seed)
    : dataset_(std::move(dataset)), mode_(mode), correct_prob_(correct_prob), seed_(seed) {}

const Problem* OracleTeacher::find_problem(const std::string& prompt) const {
    // Fast path: the problem slot is rendered last, so the prompt usually
    // ends with the problem text (plus a trailing newline).
    auto ends_with = [&prompt](const std::string& tail) {
        return prompt.size() >= tail.size() &&
               prompt.compare(prompt.size() - tail.size(), tail.size(), tail) == 0;
    };
    for (const auto& p : dataset_.problems) {
        if (ends_with(p.text + "\n") || ends_with(p.text)) return &p;
    }
    // Composed prompts (gold steps or questions appended) need the scan;
    // exemplars may mention other problems, so the rightmost match wins.
    const Problem* best = nullptr;
    std::size_t best_pos = 0;
    for (const auto& p : dataset_.problems) {
        const std::size_t at = prompt.rfind(p.text);
        if (at != std::string::npos && (best == nullptr || at > best_pos)) {
            best = &p;
            best_pos = at;
        }
    }
    return best;
}

bool OracleTeacher::decide_correct(const Problem& p, const SamplingConfig& sampling) const {
    if (correct_prob_ >= 1.0) return true;
    std::ostringstream material;
    material << p.id << ':' << sampling.seed.value_or(0) << ':' << seed_;
    const double u = static_cast<double>(fnv1a64(material.str()) >> 11) * (1.0 / 9007199254740992.0);
    return u < correct_prob_;
}

std::string OracleTeacher::wrong_answer_line(const Problem& p) const {
    if (p.gold_answer.kind() == AnswerKind::boolean) {
        return std::string("The final answer is ") + (p.gold_answer.truth() ? "NO" : "YES") + ".";
    }
    const Rational off = p.gold_answer.number() + Rational(1);
    return "The answer is " + off.to_decimal_string() + ".";
}

std::string OracleTeacher::complete(const std::string& prompt, const SamplingConfig& sampling) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    const Problem* p = find_problem(prompt);
    if (p == nullptr) throw AnnotationError("oracle teacher: prompt names no known problem");

    // Solution material: explicit steps, else supporting facts, else a bare
    // answer statement.
    std::vector<std::string> steps;
    if (p->gold_steps && !p->gold_steps->empty()) {
        steps = *p->gold_steps;
    } else if (p->gold_facts && !p->gold_facts->empty()) {
        steps = *p->gold_facts;
    } else {
        steps = {render_answer_statement(p->gold_answer)};
    }
    const AnswerKind kind = p->gold_answer.kind();
    if (!extract_final_answer(steps.back(), kind)) {
        steps.push_back(render_answer_statement(p->gold_answer));
    }

    std::vector<std::string> questions;
    if (p->gold_subquestions) questions = *p->gold_subquestions;

    std::ostringstream out;
    switch (mode_) {
        case AnnotationMode::cot: {
            for (const auto& s : steps) out << s << "\n";
            break;
        }
        case AnnotationMode::socratic: {
            const std::size_t n = std::min(questions.size(), steps.size());
            if (n == 0) {
                out << "SQ1: " << normalize_subquestion(p->text) << "\n";
                out << "A1: " << render_answer_statement(p->gold_answer) << "\n";
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    out << "SQ" << (i + 1) << ": " << questions[i] << "\n";
                    out << "A" << (i + 1) << ": " << steps[i] << "\n";
                }
                // The final block must carry the answer for the filter.
                if (n < steps.size()) {
                    out.str("");
                    for (std::size_t i = 0; i + 1 < n; ++i) {
                        out << "SQ" << (i + 1) << ": " << questions[i] << "\n";
                        out << "A" << (i + 1) << ": " << steps[i] << "\n";
                    }
                    std::string rest;
                    for (std::size_t i = n - 1; i < steps.size(); ++i) {
                        rest += (rest.empty() ? "" : " ") + steps[i];
                    }
                    out << "SQ" << n << ": " << questions[n - 1] << "\n";
                    out << "A" << n << ": " << rest << "\n";
                }
            }
            break;
        }
        case AnnotationMode::questions_from_steps: {
            // One question per gold step, in order.
            const std::size_t want = p->gold_steps ? p->gold_steps->size() : steps.size();
            for (std::size_t i = 0; i < want; ++i) {
                if (i < questions.size()) {
                    out << questions[i] << "\n";
                } else {
                    out << "What is step " << (i + 1) << " of the problem?" << "\n";
                }
            }
            break;
        }
        case AnnotationMode::facts_from_questions: {
            // One fact per provided question plus the final answer line.
            std::vector<std::string> facts;
            if (p->gold_facts && !p->gold_facts->empty()) {
                facts = *p->gold_facts;
            } else {
                facts = steps;
            }
            for (std::size_t i = 0; i < questions.size(); ++i) {
                if (i < facts.size()) {
                    out << facts[i] << "\n";
                } else {
                    out << "It follows from the question." << "\n";
                }
            }
            out << render_answer_statement(p->gold_answer) << "\n";
            break;
        }
    }

    std::string completion = out.str();
    if (!decide_correct(*p, sampling)) {
        completion += wrong_answer_line(*p) + "\n";
    }
    return completion;
}

} // namespace distill
