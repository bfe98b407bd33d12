#include "distill/annotator.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <mutex>
#include <thread>

#include "distill/errors.hpp"
#include "distill/extract.hpp"
#include "distill/rng.hpp"

namespace distill {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// One teacher call with transport retries and the completion cache in front.
std::string complete_once(TeacherClient& client, const PromptTemplate& tmpl, const Problem& p,
                          int attempt, const std::string& prompt, const SamplingConfig& sampling,
                          const AnnotatorOptions& opt, std::atomic<long>* call_counter) {
    std::string key;
    if (opt.cache && opt.cache->enabled()) {
        key = AnnotationCache::make_key(tmpl.id(), p.id, attempt, sampling.fingerprint());
        auto hit = opt.cache->get(key);
        if (hit) return *hit;
    }
    int backoff_ms = opt.backoff_initial_ms;
    for (int transport_attempt = 0;; ++transport_attempt) {
        try {
            const std::string completion = client.complete(prompt, sampling);
            if (call_counter) call_counter->fetch_add(1, std::memory_order_relaxed);
            if (!key.empty()) opt.cache->put(key, completion);
            return completion;
        } catch (const TransportError& e) {
            if (transport_attempt >= opt.max_transport_retries) {
                throw AnnotationError("teacher transport failed after backoff: " + std::string(e.what()));
            }
            if (backoff_ms > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            }
            backoff_ms *= 2;
        }
    }
}

SamplingConfig sampling_for_attempt(const AnnotatorOptions& opt, int attempt) {
    SamplingConfig s;
    s.temperature = attempt == 1 ? opt.base_temperature : opt.retry_temperature;
    s.max_tokens = opt.max_tokens;
    s.stop_sequences = {"\n---"};
    s.seed = opt.seed + static_cast<std::uint64_t>(attempt);
    return s;
}

bool final_answer_matches(const std::optional<Answer>& extracted, const Answer& gold) {
    return extracted && answers_equal(*extracted, gold);
}

// Marker prefix "SQ3:" or "A3:"; returns the index or 0 when absent.
int marker_index(const std::string& line, const std::string& tag, std::size_t* body_at) {
    if (line.size() <= tag.size() || line.compare(0, tag.size(), tag) != 0) return 0;
    std::size_t i = tag.size();
    std::size_t digits = 0;
    int index = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
        index = index * 10 + (line[i] - '0');
        ++i;
        ++digits;
    }
    if (digits == 0 || i >= line.size() || line[i] != ':') return 0;
    ++i;
    while (i < line.size() && line[i] == ' ') ++i;
    *body_at = i;
    return index;
}

} // namespace

AnnotationOutcome<ReasoningChain> annotate_cot(const Problem& p, TeacherClient& client,
                                               const PromptTemplate& tmpl, const AnnotatorOptions& opt) {
    if (opt.max_retries < 1) throw ConfigError("annotate_cot: max_retries must be >= 1");
    const AnswerKind kind = p.gold_answer.kind();
    AnnotationOutcome<ReasoningChain> outcome;
    for (int attempt = 1; attempt <= opt.max_retries; ++attempt) {
        outcome.attempts = attempt;
        const auto sampling = sampling_for_attempt(opt, attempt);
        const std::string completion =
            complete_once(client, tmpl, p, attempt, tmpl.render(p.text), sampling, opt, nullptr);
        const auto steps = completion_lines(completion);
        if (steps.empty()) continue;
        ReasoningChain chain = make_reasoning_chain(steps, kind);
        auto final = chain.final_answer();
        if (!final) final = extract_final_answer(completion, kind);
        if (final_answer_matches(final, p.gold_answer)) {
            outcome.chain = std::move(chain);
            return outcome;
        }
    }
    return outcome;
}

AnnotationOutcome<SocraticChain> annotate_socratic(const Problem& p, TeacherClient& client,
                                                   const PromptTemplate& tmpl, const AnnotatorOptions& opt) {
    if (opt.max_retries < 1) throw ConfigError("annotate_socratic: max_retries must be >= 1");
    const AnswerKind kind = p.gold_answer.kind();
    AnnotationOutcome<SocraticChain> outcome;
    for (int attempt = 1; attempt <= opt.max_retries; ++attempt) {
        outcome.attempts = attempt;
        const auto sampling = sampling_for_attempt(opt, attempt);
        const std::string completion =
            complete_once(client, tmpl, p, attempt, tmpl.render(p.text), sampling, opt, nullptr);
        auto pairs = parse_subquestion_blocks(completion);
        if (!pairs) continue;
        SocraticChain chain = make_socratic_chain(std::move(*pairs), kind);
        auto final = chain.final_answer();
        if (!final) final = extract_final_answer(completion, kind);
        if (final_answer_matches(final, p.gold_answer)) {
            outcome.chain = std::move(chain);
            return outcome;
        }
    }
    return outcome;
}

AnnotationOutcome<SocraticChain> questions_from_steps(const Problem& p, TeacherClient& client,
                                                      const PromptTemplate& tmpl, const AnnotatorOptions& opt) {
    if (!p.gold_steps || p.gold_steps->empty()) {
        throw ConfigError("questions_from_steps: problem '" + p.id + "' has no gold steps");
    }
    const AnswerKind kind = p.gold_answer.kind();
    const auto& steps = *p.gold_steps;

    std::string composed = p.text;
    for (const auto& s : steps) composed += "\n" + s;

    AnnotationOutcome<SocraticChain> outcome;
    for (int attempt = 1; attempt <= opt.max_retries; ++attempt) {
        outcome.attempts = attempt;
        const auto sampling = sampling_for_attempt(opt, attempt);
        const std::string completion =
            complete_once(client, tmpl, p, attempt, tmpl.render(composed), sampling, opt, nullptr);
        const auto questions = strip_question_prefixes(completion_lines(completion));
        if (questions.size() != steps.size()) continue; // strict count enforcement
        std::vector<SocraticPair> pairs;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            pairs.push_back({questions[i], steps[i]});
        }
        SocraticChain chain = make_socratic_chain(std::move(pairs), kind);
        // Solutions are gold; reject only a positive final-answer mismatch.
        const auto& final = chain.final_answer();
        if (final && !answers_equal(*final, p.gold_answer)) continue;
        outcome.chain = std::move(chain);
        return outcome;
    }
    return outcome;
}

AnnotationOutcome<SocraticChain> facts_from_questions(const Problem& p, TeacherClient& client,
                                                      const PromptTemplate& tmpl, const AnnotatorOptions& opt) {
    if (!p.gold_subquestions || p.gold_subquestions->empty()) {
        throw ConfigError("facts_from_questions: problem '" + p.id + "' has no gold subquestions");
    }
    const AnswerKind kind = p.gold_answer.kind();
    const auto& questions = *p.gold_subquestions;

    std::string composed = p.text;
    for (const auto& q : questions) composed += "\n" + q;

    AnnotationOutcome<SocraticChain> outcome;
    for (int attempt = 1; attempt <= opt.max_retries; ++attempt) {
        outcome.attempts = attempt;
        const auto sampling = sampling_for_attempt(opt, attempt);
        const std::string completion =
            complete_once(client, tmpl, p, attempt, tmpl.render(composed), sampling, opt, nullptr);
        auto lines = completion_lines(completion);

        // A trailing final-answer line is split off the facts.
        std::string marker_line;
        if (!lines.empty()) {
            std::string lowered = lines.back();
            for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            if (lowered.find("answer is") != std::string::npos && lines.size() == questions.size() + 1) {
                marker_line = lines.back();
                lines.pop_back();
            }
        }
        if (lines.size() != questions.size()) continue;

        const auto extracted = extract_final_answer(completion, kind);
        if (!final_answer_matches(extracted, p.gold_answer)) continue;

        std::vector<SocraticPair> pairs;
        for (std::size_t i = 0; i < questions.size(); ++i) {
            pairs.push_back({questions[i], lines[i]});
        }
        if (!marker_line.empty()) {
            pairs.back().solution += " " + marker_line;
        }
        outcome.chain = make_socratic_chain(std::move(pairs), kind);
        return outcome;
    }
    return outcome;
}

PromptSolveResult socratic_prompt_solve(const Problem& p, TeacherClient& client,
                                        const PromptTemplate& decompose_tmpl,
                                        const PromptTemplate& solve_tmpl, const AnnotatorOptions& opt) {
    const AnswerKind kind = p.gold_answer.kind();

    const auto stage1_sampling = sampling_for_attempt(opt, 1);
    const std::string stage1 = complete_once(client, decompose_tmpl, p, 1, decompose_tmpl.render(p.text),
                                             stage1_sampling, opt, nullptr);
    const auto questions = strip_question_prefixes(completion_lines(stage1));
    if (questions.empty()) {
        throw PromptingError("socratic_prompt_solve: stage-1 decomposition is empty for '" + p.id + "'");
    }

    std::string composed = p.text;
    for (const auto& q : questions) composed += "\n" + q;
    const auto stage2_sampling = sampling_for_attempt(opt, 1);
    const std::string stage2 = complete_once(client, solve_tmpl, p, 1, solve_tmpl.render(composed),
                                             stage2_sampling, opt, nullptr);

    auto solutions = completion_lines(stage2);
    std::vector<SocraticPair> pairs;
    const std::size_t n = std::min(questions.size(), solutions.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t body_at = 0;
        std::string sol = solutions[i];
        if (marker_index(sol, "A", &body_at) > 0) sol = trim(sol.substr(body_at));
        pairs.push_back({questions[i], sol});
    }
    if (pairs.empty()) {
        throw PromptingError("socratic_prompt_solve: stage-2 produced no solutions for '" + p.id + "'");
    }

    PromptSolveResult result;
    result.chain = make_socratic_chain(std::move(pairs), kind);
    result.answer = extract_final_answer(stage2, kind);
    return result;
}

std::string to_string(AnnotationMode m) {
    switch (m) {
        case AnnotationMode::cot: return "cot";
        case AnnotationMode::socratic: return "socratic";
        case AnnotationMode::questions_from_steps: return "questions_from_steps";
        case AnnotationMode::facts_from_questions: return "facts_from_questions";
    }
    return "cot";
}

std::optional<AnnotationMode> annotation_mode_from_string(const std::string& s) {
    if (s == "cot") return AnnotationMode::cot;
    if (s == "socratic") return AnnotationMode::socratic;
    if (s == "questions_from_steps") return AnnotationMode::questions_from_steps;
    if (s == "facts_from_questions") return AnnotationMode::facts_from_questions;
    return std::nullopt;
}

namespace {

// Counts completions that actually reached the client (cache misses).
class CountingClient : public TeacherClient {
public:
    CountingClient(TeacherClient& inner, std::atomic<long>& calls)
        : inner_(inner), calls_(calls), serialize_(!inner.concurrent_safe()) {}

    std::string complete(const std::string& prompt, const SamplingConfig& sampling) override {
        if (serialize_) {
            std::lock_guard<std::mutex> lock(mutex_);
            calls_.fetch_add(1, std::memory_order_relaxed);
            return inner_.complete(prompt, sampling);
        }
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_.complete(prompt, sampling);
    }

    bool concurrent_safe() const override { return true; }

private:
    TeacherClient& inner_;
    std::atomic<long>& calls_;
    bool serialize_;
    std::mutex mutex_;
};

} // namespace

AnnotatedDataset annotate_dataset(const Dataset& d, AnnotationMode mode, TeacherClient& client,
                                  const PromptTemplate& tmpl, const AnnotatorOptions& opt,
                                  AnnotateStats* stats, int parallelism) {
    std::atomic<long> calls{0};
    CountingClient counted(client, calls);

    struct Slot {
        std::optional<Annotation> annotation;
        int attempts = 0;
    };
    std::vector<Slot> slots(d.problems.size());

    auto work = [&](std::size_t index) {
        const Problem& p = d.problems[index];
        Slot& slot = slots[index];
        switch (mode) {
            case AnnotationMode::cot: {
                auto out = annotate_cot(p, counted, tmpl, opt);
                slot.attempts = out.attempts;
                if (out.chain) {
                    Annotation a;
                    a.cot = std::move(out.chain);
                    slot.annotation = std::move(a);
                }
                break;
            }
            case AnnotationMode::socratic:
            case AnnotationMode::questions_from_steps:
            case AnnotationMode::facts_from_questions: {
                AnnotationOutcome<SocraticChain> out;
                if (mode == AnnotationMode::socratic) {
                    out = annotate_socratic(p, counted, tmpl, opt);
                } else if (mode == AnnotationMode::questions_from_steps) {
                    out = questions_from_steps(p, counted, tmpl, opt);
                } else {
                    out = facts_from_questions(p, counted, tmpl, opt);
                }
                slot.attempts = out.attempts;
                if (out.chain) {
                    Annotation a;
                    a.socratic = std::move(out.chain);
                    slot.annotation = std::move(a);
                }
                break;
            }
        }
    };

    if (parallelism <= 1 || d.problems.size() < 2) {
        for (std::size_t i = 0; i < d.problems.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        const int n_workers = std::min<std::size_t>(parallelism, d.problems.size());
        workers.reserve(n_workers);
        std::exception_ptr first_error;
        std::mutex error_mutex;
        for (int w = 0; w < n_workers; ++w) {
            workers.emplace_back([&]() {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= d.problems.size()) return;
                    try {
                        work(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : workers) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    AnnotatedDataset ad;
    ad.base = d;
    AnnotateStats local;
    local.total = static_cast<int>(d.problems.size());
    for (std::size_t i = 0; i < d.problems.size(); ++i) {
        local.attempts_histogram[slots[i].attempts] += 1;
        if (slots[i].annotation) {
            local.accepted += 1;
            ad.annotations[d.problems[i].id] = std::move(*slots[i].annotation);
            ad.provenance[d.problems[i].id] = {AnnotationSource::teacher, slots[i].attempts};
        }
    }
    local.teacher_calls = calls.load();
    if (stats) *stats = local;
    return ad;
}

} // namespace distill
