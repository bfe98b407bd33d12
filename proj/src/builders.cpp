#include "distill/builders.hpp"

#include "distill/calc.hpp"
#include "distill/errors.hpp"
#include "distill/extract.hpp"

namespace distill {

std::string to_string(TrainConfig c) {
    switch (c) {
        case TrainConfig::answer_only: return "answer_only";
        case TrainConfig::cot: return "cot";
        case TrainConfig::unified: return "unified";
        case TrainConfig::iterative_qa: return "iterative_qa";
        case TrainConfig::qg: return "qg";
        case TrainConfig::guidance: return "guidance";
        case TrainConfig::no_subq: return "no_subq";
    }
    return "answer_only";
}

std::optional<TrainConfig> train_config_from_string(const std::string& s) {
    for (TrainConfig c : {TrainConfig::answer_only, TrainConfig::cot, TrainConfig::unified,
                          TrainConfig::iterative_qa, TrainConfig::qg, TrainConfig::guidance,
                          TrainConfig::no_subq}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

namespace {

void require_nonempty_chain(const Problem& p, std::size_t n, const char* builder) {
    if (n == 0) throw ConfigError(std::string(builder) + ": empty chain for problem '" + p.id + "'");
}

// The final supervised text must carry an extractable answer; chains whose
// last step lacks one get the canonical statement appended.
std::string with_final_marker(std::string text, const Problem& p, const std::string& separator) {
    if (!extract_final_answer(text, p.gold_answer.kind())) {
        text += separator + render_answer_statement(p.gold_answer);
    }
    return text;
}

} // namespace

std::vector<TrainingExample> build_answer_only(const Problem& p) {
    TrainingExample ex;
    ex.context = p.text;
    ex.target = render_answer_statement(p.gold_answer);
    ex.meta = {p.id, 0, to_string(TrainConfig::answer_only)};
    return {std::move(ex)};
}

std::vector<TrainingExample> build_cot(const Problem& p, const ReasoningChain& chain) {
    require_nonempty_chain(p, chain.size(), "build_cot");
    std::string target;
    for (std::size_t i = 0; i < chain.steps.size(); ++i) {
        if (i > 0) target += "\n";
        target += chain.steps[i];
    }
    TrainingExample ex;
    ex.context = p.text;
    ex.target = with_final_marker(std::move(target), p, "\n");
    ex.meta = {p.id, 0, to_string(TrainConfig::cot)};
    return {std::move(ex)};
}

std::string unified_target(const Problem& p, const SocraticChain& chain) {
    std::string target;
    for (std::size_t i = 0; i < chain.pairs.size(); ++i) {
        if (i > 0) target += " ";
        target += chain.pairs[i].subquestion;
        target += " ";
        target += chain.pairs[i].solution;
    }
    return with_final_marker(std::move(target), p, " ");
}

std::vector<TrainingExample> build_unified(const Problem& p, const SocraticChain& chain) {
    require_nonempty_chain(p, chain.size(), "build_unified");
    TrainingExample ex;
    ex.context = p.text;
    ex.target = unified_target(p, chain);
    ex.meta = {p.id, 0, to_string(TrainConfig::unified)};
    return {std::move(ex)};
}

std::vector<TrainingExample> build_unified_pairs(const Problem& p, const SocraticChain& chain) {
    require_nonempty_chain(p, chain.size(), "build_unified_pairs");
    const std::string whole = unified_target(p, chain);

    std::vector<TrainingExample> out;
    std::string consumed;
    for (std::size_t j = 0; j < chain.pairs.size(); ++j) {
        std::string piece = (j > 0 ? " " : "");
        piece += chain.pairs[j].subquestion;
        piece += " ";
        piece += chain.pairs[j].solution;
        if (j + 1 == chain.pairs.size()) {
            // Whatever the marker policy appended belongs to the last piece.
            piece = whole.substr(consumed.size());
        }
        TrainingExample ex;
        ex.context = p.text + consumed;
        ex.target = piece;
        ex.meta = {p.id, static_cast<int>(j + 1), to_string(TrainConfig::unified)};
        consumed += piece;
        out.push_back(std::move(ex));
    }
    return out;
}

std::string assemble_qa_context(const std::string& problem_text,
                                const std::vector<std::string>& questions,
                                const std::vector<std::string>& solutions) {
    std::string ctx = problem_text;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        ctx += " ";
        ctx += questions[i];
        if (i < solutions.size()) {
            ctx += " ";
            ctx += solutions[i];
        }
    }
    return ctx;
}

std::vector<TrainingExample> build_iterative_qa(const Problem& p, const SocraticChain& chain) {
    require_nonempty_chain(p, chain.size(), "build_iterative_qa");
    std::vector<TrainingExample> out;
    std::vector<std::string> questions;
    std::vector<std::string> solutions;
    for (std::size_t j = 0; j < chain.pairs.size(); ++j) {
        questions.push_back(chain.pairs[j].subquestion);
        TrainingExample ex;
        ex.context = assemble_qa_context(p.text, questions, solutions);
        ex.target = chain.pairs[j].solution;
        if (j + 1 == chain.pairs.size()) {
            ex.target = with_final_marker(std::move(ex.target), p, " ");
        }
        ex.meta = {p.id, static_cast<int>(j + 1), to_string(TrainConfig::iterative_qa)};
        out.push_back(std::move(ex));
        solutions.push_back(chain.pairs[j].solution); // teacher forcing: the chain's own text
    }
    return out;
}

std::string guidance_prefix(const std::string& guidance_target) {
    return "Equations: " + guidance_target + "\n";
}

std::vector<TrainingExample> build_qg(const Problem& p, const SocraticChain& chain,
                                      const std::optional<std::string>& guidance) {
    require_nonempty_chain(p, chain.size(), "build_qg");
    TrainingExample ex;
    ex.context = (guidance ? guidance_prefix(*guidance) : "") + p.text;
    for (std::size_t j = 0; j < chain.pairs.size(); ++j) {
        if (j > 0) ex.target += "\n";
        ex.target += chain.pairs[j].subquestion;
    }
    ex.meta = {p.id, 0, to_string(TrainConfig::qg)};
    return {std::move(ex)};
}

namespace {

TrainingExample guidance_example(const Problem& p, const std::vector<std::string>& solutions,
                                 GuidanceKind kind) {
    TrainingExample ex;
    ex.context = p.text;
    ex.meta = {p.id, 0, to_string(TrainConfig::guidance)};
    if (kind == GuidanceKind::step_count) {
        ex.target = std::to_string(solutions.size());
        return ex;
    }
    std::vector<std::string> equations;
    for (const auto& s : solutions) {
        for (const auto& ann : parse_all_calc_annotations(s)) {
            equations.push_back(ann.raw.substr(2, ann.raw.size() - 4));
        }
    }
    if (equations.empty()) {
        throw ConfigError("build_guidance: no calc annotations in chain for problem '" + p.id + "'");
    }
    for (std::size_t i = 0; i < equations.size(); ++i) {
        if (i > 0) ex.target += " | ";
        ex.target += equations[i];
    }
    return ex;
}

} // namespace

TrainingExample build_guidance(const Problem& p, const SocraticChain& chain, GuidanceKind kind) {
    require_nonempty_chain(p, chain.size(), "build_guidance");
    std::vector<std::string> solutions;
    for (const auto& pair : chain.pairs) solutions.push_back(pair.solution);
    return guidance_example(p, solutions, kind);
}

TrainingExample build_guidance(const Problem& p, const ReasoningChain& chain, GuidanceKind kind) {
    require_nonempty_chain(p, chain.size(), "build_guidance");
    return guidance_example(p, chain.steps, kind);
}

std::vector<TrainingExample> build_no_subq_ablation(const Problem& p, const SocraticChain& chain) {
    require_nonempty_chain(p, chain.size(), "build_no_subq_ablation");
    std::vector<TrainingExample> out;
    std::string prefix_chain;
    for (std::size_t j = 0; j < chain.pairs.size(); ++j) {
        if (j > 0) prefix_chain += " ";
        prefix_chain += chain.pairs[j].solution;
        TrainingExample ex;
        ex.context = p.text + " " + chain.pairs[j].subquestion;
        ex.target = prefix_chain;
        if (j + 1 == chain.pairs.size()) {
            ex.target = with_final_marker(std::move(ex.target), p, " ");
        }
        ex.meta = {p.id, static_cast<int>(j + 1), to_string(TrainConfig::no_subq)};
        out.push_back(std::move(ex));
    }
    return out;
}

} // namespace distill
