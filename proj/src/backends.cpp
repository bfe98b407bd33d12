#include "distill/backends.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "distill/calc.hpp"
#include "distill/errors.hpp"
#include "distill/extract.hpp"

namespace distill {

using nlohmann::json;

// --- UniformBackend ---------------------------------------------------------

namespace {

struct UniformState {
    int vocab_size;
};

} // namespace

ModelHandle UniformBackend::init(const std::vector<TrainingExample>& corpus, const Hyperparams&) {
    ModelHandle m;
    m.backend = id();
    m.tag = corpus.empty() ? "" : corpus.front().meta.config;
    m.state = std::make_shared<UniformState>(UniformState{vocab_size_});
    return m;
}

double UniformBackend::loss(const ModelHandle& m, const TrainingExample& example) const {
    const auto* st = static_cast<const UniformState*>(m.state.get());
    const int vocab = st ? st->vocab_size : vocab_size_;
    if (example.target.empty()) return 0.0;
    return std::log(static_cast<double>(vocab));
}

void UniformBackend::save(const ModelHandle& m, const std::string& path) const {
    const auto* st = static_cast<const UniformState*>(m.state.get());
    json j;
    j["backend"] = id();
    j["tag"] = m.tag;
    j["vocab_size"] = st ? st->vocab_size : vocab_size_;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    out << j.dump() << "\n";
}

ModelHandle UniformBackend::load(const std::string& path) const {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read checkpoint: " + path);
    json j;
    in >> j;
    if (j.value("backend", "") != id()) {
        throw StalenessError("checkpoint at " + path + " was not written by the uniform backend");
    }
    ModelHandle m;
    m.backend = id();
    m.tag = j.value("tag", "");
    m.state = std::make_shared<UniformState>(UniformState{j.value("vocab_size", 4)});
    return m;
}

// --- OracleBackend ----------------------------------------------------------

OracleBackend::OracleBackend(Dataset dataset, std::optional<int> corrupt_step)
    : dataset_(std::move(dataset)), corrupt_step_(corrupt_step) {}

std::optional<SocraticChain> OracleBackend::gold_chain(const Problem& p) {
    if (p.gold_subquestions && p.gold_steps && !p.gold_subquestions->empty() &&
        p.gold_subquestions->size() == p.gold_steps->size()) {
        std::vector<SocraticPair> pairs;
        for (std::size_t i = 0; i < p.gold_steps->size(); ++i) {
            pairs.push_back({(*p.gold_subquestions)[i], (*p.gold_steps)[i]});
        }
        return make_socratic_chain(std::move(pairs), p.gold_answer.kind());
    }
    return std::nullopt;
}

ModelHandle OracleBackend::init(const std::vector<TrainingExample>& corpus, const Hyperparams&) {
    ModelHandle m;
    m.backend = id();
    m.tag = corpus.empty() ? "" : corpus.front().meta.config;
    return m;
}

const Problem* OracleBackend::find_by_context(const std::string& context) const {
    // Contexts start with the problem text, possibly behind a guidance prefix.
    const Problem* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& p : dataset_.problems) {
        if (context.find(p.text) != std::string::npos && p.text.size() > best_len) {
            best = &p;
            best_len = p.text.size();
        }
    }
    return best;
}

namespace {

// Standalone number tokens with positions, for the positional rewrite.
struct NumberToken {
    std::size_t begin;
    std::size_t end;
    Rational value;
};

std::vector<NumberToken> number_tokens(const std::string& text) {
    std::vector<NumberToken> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[end])) ||
                (text[end] == '.' && end + 1 < text.size() &&
                 std::isdigit(static_cast<unsigned char>(text[end + 1]))))) {
            ++end;
        }
        auto value = Rational::parse_decimal(text.substr(i, end - i));
        if (value) out.push_back({i, end, *value});
        i = end;
    }
    return out;
}

Rational apply_op(const Rational& a, char op, const Rational& b) {
    switch (op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        default: return a / b;
    }
}

} // namespace

// Computes step j's solution the way a student would: prior value from the
// context, operation from the gold step, then the gold sentence rewritten
// with the recomputed numbers.
std::string OracleBackend::answer_qa(const Problem& p, const std::string& context) const {
    const auto chain = gold_chain(p);
    if (!chain) throw ConfigError("oracle backend: problem '" + p.id + "' has no gold chain");

    // Step index: the problem statement ends with one question mark and each
    // subquestion adds one.
    const long q_marks = std::count(context.begin(), context.end(), '?');
    const long j = q_marks - 1;
    if (j < 1 || j > static_cast<long>(chain->size())) return {};

    const std::string& gold_solution = chain->pairs[static_cast<std::size_t>(j - 1)].solution;
    const auto calcs = parse_all_calc_annotations(gold_solution);
    if (calcs.empty()) {
        if (corrupt_step_) {
            throw ConfigError("oracle backend: corrupt_step needs calc annotations in '" + p.id + "'");
        }
        return gold_solution; // replay; nothing to recompute
    }

    // Gold equation of this step: a op b = c.
    const auto lhs_tokens = number_tokens(calcs.front().lhs);
    if (lhs_tokens.size() != 2) {
        if (corrupt_step_) {
            throw ConfigError("oracle backend: corrupt_step needs binary equations in '" + p.id + "'");
        }
        return gold_solution;
    }
    const Rational gold_a = lhs_tokens[0].value;
    const Rational gold_b = lhs_tokens[1].value;
    const Rational gold_c = calcs.front().rhs;
    char op = '+';
    for (char ch : calcs.front().lhs) {
        if (ch == '+' || ch == '-' || ch == '*' || ch == '/') {
            op = ch;
            break;
        }
    }

    // Which operand carries the running value: at step 1 the equation is
    // self-contained; later, it is whichever gold operand equals the prior
    // step's gold result. The live prior comes from the rightmost calc
    // result in the context (the model's own previous solution).
    bool running_is_a = true;
    Rational prev = gold_a;
    if (j > 1) {
        const auto prior_calcs =
            parse_all_calc_annotations(chain->pairs[static_cast<std::size_t>(j - 2)].solution);
        const std::optional<Rational> prior_gold =
            prior_calcs.empty() ? std::nullopt : std::optional<Rational>(prior_calcs.back().rhs);
        if (!prior_gold || (gold_a != *prior_gold && gold_b != *prior_gold)) {
            // Not a value chain; nothing propagates between steps.
            if (corrupt_step_) {
                throw ConfigError("oracle backend: corrupt_step needs chained equations in '" + p.id + "'");
            }
            return gold_solution;
        }
        running_is_a = gold_a == *prior_gold;
        const auto context_calcs = parse_all_calc_annotations(context);
        prev = context_calcs.empty() ? *prior_gold : context_calcs.back().rhs;
    }
    const Rational running_gold = running_is_a ? gold_a : gold_b;
    Rational cur = running_is_a ? apply_op(prev, op, gold_b) : apply_op(gold_a, op, prev);
    if (corrupt_step_ && *corrupt_step_ == j) {
        cur = cur + Rational(1);
    }

    // Rewrite the gold sentence: tokens equal to the running operand become
    // the live prior, tokens equal to the gold result become the new one.
    std::string rewritten;
    std::size_t cursor = 0;
    for (const auto& tok : number_tokens(gold_solution)) {
        rewritten += gold_solution.substr(cursor, tok.begin - cursor);
        if (tok.value == gold_c) {
            rewritten += cur.to_decimal_string();
        } else if (j > 1 && tok.value == running_gold) {
            rewritten += prev.to_decimal_string();
        } else {
            rewritten += gold_solution.substr(tok.begin, tok.end - tok.begin);
        }
        cursor = tok.end;
    }
    rewritten += gold_solution.substr(cursor);
    return rewritten;
}

std::string OracleBackend::generate(const ModelHandle& m, const std::string& context,
                                    const SamplingConfig&) const {
    const Problem* p = find_by_context(context);
    if (p == nullptr) return {};
    const std::string& role = m.tag;

    if (role == "answer_only") {
        return render_answer_statement(p->gold_answer);
    }
    if (role == "cot") {
        const auto chain = gold_chain(*p);
        std::string out;
        if (chain) {
            for (std::size_t i = 0; i < chain->size(); ++i) {
                if (i > 0) out += "\n";
                out += chain->pairs[i].solution;
            }
        } else {
            out = render_answer_statement(p->gold_answer);
        }
        return out;
    }
    if (role == "unified") {
        const auto chain = gold_chain(*p);
        if (!chain) return render_answer_statement(p->gold_answer);
        return unified_target(*p, *chain);
    }
    if (role == "qg") {
        const auto chain = gold_chain(*p);
        if (!chain) return {};
        std::string out;
        for (std::size_t i = 0; i < chain->size(); ++i) {
            if (i > 0) out += "\n";
            out += chain->pairs[i].subquestion;
        }
        return out;
    }
    if (role == "guidance") {
        const auto chain = gold_chain(*p);
        if (!chain) return {};
        return build_guidance(*p, *chain).target;
    }
    if (role == "iterative_qa") {
        return answer_qa(*p, context);
    }
    throw ConfigError("oracle backend: unknown role '" + role + "'");
}

void OracleBackend::save(const ModelHandle& m, const std::string& path) const {
    json j;
    j["backend"] = id();
    j["tag"] = m.tag;
    if (corrupt_step_) j["corrupt_step"] = *corrupt_step_;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    out << j.dump() << "\n";
}

ModelHandle OracleBackend::load(const std::string& path) const {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read checkpoint: " + path);
    json j;
    in >> j;
    if (j.value("backend", "") != id()) {
        throw StalenessError("checkpoint at " + path + " was not written by the oracle backend");
    }
    ModelHandle m;
    m.backend = id();
    m.tag = j.value("tag", "");
    return m;
}

} // namespace distill
