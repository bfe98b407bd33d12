#include "distill/inference.hpp"

#include <fstream>

#include <json.hpp>

#include "distill/builders.hpp"
#include "distill/errors.hpp"
#include "distill/extract.hpp"
#include "distill/parsing.hpp"

namespace distill {

using nlohmann::json;

std::string to_string(InferMode m) {
    switch (m) {
        case InferMode::answer_only: return "answer_only";
        case InferMode::cot: return "cot";
        case InferMode::unified: return "unified";
        case InferMode::iterative: return "iterative";
    }
    return "answer_only";
}

std::optional<InferMode> infer_mode_from_string(const std::string& s) {
    for (InferMode m : {InferMode::answer_only, InferMode::cot, InferMode::unified, InferMode::iterative}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::max_steps: return "max_steps";
        case Termination::empty_generation: return "empty_generation";
        case Termination::parse_failure: return "parse_failure";
    }
    return "completed";
}

namespace {

Termination termination_from_string(const std::string& s) {
    if (s == "max_steps") return Termination::max_steps;
    if (s == "empty_generation") return Termination::empty_generation;
    if (s == "parse_failure") return Termination::parse_failure;
    return Termination::completed;
}

InferenceTrace single_pass(const Problem& p, const ModelHandle& m, const StudentBackend& backend,
                           const SamplingConfig& sampling, InferMode mode) {
    InferenceTrace trace;
    trace.problem_id = p.id;
    trace.mode = mode;
    trace.final_text = backend.generate(m, p.text, sampling);
    if (trace.final_text.empty()) {
        trace.termination = Termination::empty_generation;
        return trace;
    }
    if (mode == InferMode::unified) {
        split_qa_segments(trace.final_text, &trace.generated_questions, &trace.generated_solutions);
    } else if (mode == InferMode::cot) {
        trace.generated_solutions = completion_lines(trace.final_text);
    }
    trace.predicted = extract_final_answer(trace.final_text, p.gold_answer.kind());
    trace.termination = trace.predicted ? Termination::completed : Termination::parse_failure;
    return trace;
}

} // namespace

InferenceTrace infer_unified(const Problem& p, const ModelHandle& m, const StudentBackend& backend,
                             const SamplingConfig& sampling) {
    return single_pass(p, m, backend, sampling, InferMode::unified);
}

InferenceTrace infer_answer_only(const Problem& p, const ModelHandle& m, const StudentBackend& backend,
                                 const SamplingConfig& sampling) {
    return single_pass(p, m, backend, sampling, InferMode::answer_only);
}

InferenceTrace infer_cot(const Problem& p, const ModelHandle& m, const StudentBackend& backend,
                         const SamplingConfig& sampling) {
    return single_pass(p, m, backend, sampling, InferMode::cot);
}

InferenceTrace infer_iterative(const Problem& p, const ModelHandle& qg, const ModelHandle& qa,
                               const StudentBackend& backend, const SamplingConfig& sampling,
                               const ModelHandle* guide, int max_steps) {
    if (max_steps < 1) throw ConfigError("infer_iterative: max_steps must be >= 1");

    InferenceTrace trace;
    trace.problem_id = p.id;
    trace.mode = InferMode::iterative;

    // Stage 0: optional guidance conditioning of the QG context.
    std::string qg_context = p.text;
    if (guide != nullptr) {
        SamplingConfig guide_sampling = sampling;
        guide_sampling.stop_sequences = {"\n"};
        const std::string guidance = backend.generate(*guide, p.text, guide_sampling);
        qg_context = guidance_prefix(guidance) + p.text;
    }

    // Stage 1: all subquestions in one pass.
    const std::string qg_output = backend.generate(qg, qg_context, sampling);
    std::vector<std::string> questions = strip_question_prefixes(completion_lines(qg_output));
    if (questions.empty()) {
        trace.termination = Termination::empty_generation;
        return trace;
    }
    bool truncated = false;
    if (static_cast<int>(questions.size()) > max_steps) {
        questions.resize(max_steps);
        truncated = true;
    }

    // Stage 2: answer each subquestion, conditioning on the model's own
    // prior solutions (no teacher forcing at inference time).
    SamplingConfig qa_sampling = sampling;
    qa_sampling.stop_sequences = {"\n"};
    std::vector<std::string> solutions;
    bool ran_dry = false;
    for (std::size_t j = 0; j < questions.size(); ++j) {
        trace.generated_questions.push_back(questions[j]);
        std::vector<std::string> asked(questions.begin(), questions.begin() + j + 1);
        const std::string context = assemble_qa_context(p.text, asked, solutions);
        const std::string solution = backend.generate(qa, context, qa_sampling);
        if (solution.empty()) {
            ran_dry = true;
            break;
        }
        solutions.push_back(solution);
        trace.generated_solutions.push_back(solution);
    }

    for (std::size_t i = 0; i < trace.generated_questions.size() && i < solutions.size(); ++i) {
        if (i > 0) trace.final_text += " ";
        trace.final_text += trace.generated_questions[i];
        trace.final_text += " ";
        trace.final_text += solutions[i];
    }

    if (ran_dry) {
        trace.termination = Termination::empty_generation;
        return trace;
    }
    trace.predicted = extract_final_answer(solutions.back(), p.gold_answer.kind());
    if (!trace.predicted) {
        trace.termination = Termination::parse_failure;
    } else if (truncated) {
        trace.termination = Termination::max_steps;
    } else {
        trace.termination = Termination::completed;
    }
    return trace;
}

void write_traces(const std::vector<InferenceTrace>& traces, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write traces: " + path);
    for (const auto& t : traces) {
        json j;
        j["problem_id"] = t.problem_id;
        j["mode"] = to_string(t.mode);
        j["questions"] = t.generated_questions;
        j["solutions"] = t.generated_solutions;
        j["final_text"] = t.final_text;
        if (t.predicted) {
            j["predicted"] = t.predicted->to_string();
        } else {
            j["predicted"] = nullptr;
        }
        j["termination"] = to_string(t.termination);
        out << j.dump() << "\n";
    }
}

std::vector<InferenceTrace> read_traces(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open traces: " + path);
    std::vector<InferenceTrace> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("traces line " + std::to_string(line_no) + ": " + e.what());
        }
        InferenceTrace t;
        t.problem_id = j.at("problem_id").get<std::string>();
        t.mode = infer_mode_from_string(j.at("mode").get<std::string>()).value_or(InferMode::answer_only);
        t.generated_questions = j.value("questions", std::vector<std::string>{});
        t.generated_solutions = j.value("solutions", std::vector<std::string>{});
        t.final_text = j.value("final_text", "");
        if (j.contains("predicted") && !j["predicted"].is_null()) {
            t.predicted = Answer::parse(j["predicted"].get<std::string>());
        }
        t.termination = termination_from_string(j.value("termination", "completed"));
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace distill
