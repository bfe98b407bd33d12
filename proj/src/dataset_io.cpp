#include "distill/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "distill/errors.hpp"
#include "distill/rng.hpp"

namespace distill {

using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json& j, const char* field, int line) {
    if (!j.is_array()) {
        throw ParseError("line " + std::to_string(line) + ": field '" + field + "' must be an array of strings");
    }
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) {
            throw ParseError("line " + std::to_string(line) + ": field '" + field + "' must contain only strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

Problem parse_problem(const json& rec, int line) {
    for (const char* field : {"id", "question", "answer"}) {
        if (!rec.contains(field) || !rec[field].is_string()) {
            throw ParseError("line " + std::to_string(line) + ": missing string field '" + field + "'");
        }
    }
    Problem p;
    p.id = rec["id"].get<std::string>();
    p.text = rec["question"].get<std::string>();
    if (p.text.empty()) {
        throw ParseError("line " + std::to_string(line) + ": empty question text");
    }
    auto answer = Answer::parse(rec["answer"].get<std::string>());
    if (!answer) {
        throw ParseError("line " + std::to_string(line) + ": unparseable answer '" +
                         rec["answer"].get<std::string>() + "'");
    }
    p.gold_answer = *answer;
    if (rec.contains("steps")) p.gold_steps = string_list(rec["steps"], "steps", line);
    if (rec.contains("facts")) p.gold_facts = string_list(rec["facts"], "facts", line);
    if (rec.contains("subquestions")) p.gold_subquestions = string_list(rec["subquestions"], "subquestions", line);
    return p;
}

void check_regime(const Problem& p, Regime regime, int line) {
    if (regime == Regime::step_by_step && (!p.gold_steps || p.gold_steps->empty())) {
        throw RegimeError("line " + std::to_string(line) + ": problem '" + p.id +
                          "' lacks 'steps' required by regime step_by_step");
    }
    if (regime == Regime::supporting_facts && (!p.gold_facts || p.gold_facts->empty())) {
        throw RegimeError("line " + std::to_string(line) + ": problem '" + p.id +
                          "' lacks 'facts' required by regime supporting_facts");
    }
}

json problem_to_json(const Problem& p) {
    json rec;
    rec["id"] = p.id;
    rec["question"] = p.text;
    rec["answer"] = p.gold_answer.to_string();
    if (p.gold_steps) rec["steps"] = *p.gold_steps;
    if (p.gold_facts) rec["facts"] = *p.gold_facts;
    if (p.gold_subquestions) rec["subquestions"] = *p.gold_subquestions;
    return rec;
}

json parse_line(const std::string& line, int line_no) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
    }
}

std::string split_name(const std::string& base, Split s) {
    return base + "/" + to_string(s);
}

} // namespace

Dataset load_dataset(const std::string& path, Regime regime) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file: " + path);

    Dataset d;
    d.name = path;
    d.regime = regime;
    std::set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json rec = parse_line(line, line_no);
        Problem p = parse_problem(rec, line_no);
        check_regime(p, regime, line_no);
        if (!seen_ids.insert(p.id).second) {
            throw ParseError("line " + std::to_string(line_no) + ": duplicate problem id '" + p.id + "'");
        }
        d.problems.push_back(std::move(p));
    }
    return d;
}

void save_dataset(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write dataset file: " + path);
    for (const auto& p : d.problems) {
        out << problem_to_json(p).dump() << "\n";
    }
}

AnnotatedDataset load_annotated_dataset(const std::string& path, Regime regime) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open annotated dataset file: " + path);

    AnnotatedDataset ad;
    ad.base.name = path;
    ad.base.regime = regime;
    std::set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json rec = parse_line(line, line_no);
        Problem p = parse_problem(rec, line_no);
        check_regime(p, regime, line_no);
        if (!seen_ids.insert(p.id).second) {
            throw ParseError("line " + std::to_string(line_no) + ": duplicate problem id '" + p.id + "'");
        }
        const AnswerKind kind = p.gold_answer.kind();

        Annotation ann;
        bool has_annotation = false;
        if (rec.contains("cot")) {
            ann.cot = make_reasoning_chain(string_list(rec["cot"], "cot", line_no), kind);
            has_annotation = true;
        }
        if (rec.contains("socratic")) {
            if (!rec["socratic"].is_array()) {
                throw ParseError("line " + std::to_string(line_no) + ": 'socratic' must be an array");
            }
            std::vector<SocraticPair> pairs;
            for (const auto& pair : rec["socratic"]) {
                if (!pair.contains("q") || !pair.contains("s")) {
                    throw ParseError("line " + std::to_string(line_no) + ": socratic pair needs 'q' and 's'");
                }
                pairs.push_back({pair["q"].get<std::string>(), pair["s"].get<std::string>()});
            }
            ann.socratic = make_socratic_chain(std::move(pairs), kind);
            has_annotation = true;
        }
        if (has_annotation) {
            Provenance prov;
            const std::string source = rec.value("source", "teacher");
            prov.source = source == "gold" ? AnnotationSource::gold : AnnotationSource::teacher;
            prov.attempts = rec.value("attempts", 1);
            ad.annotations[p.id] = std::move(ann);
            ad.provenance[p.id] = prov;
        }
        ad.base.problems.push_back(std::move(p));
    }
    return ad;
}

void save_annotated_dataset(const AnnotatedDataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write annotated dataset file: " + path);
    for (const auto& p : d.base.problems) {
        json rec = problem_to_json(p);
        auto it = d.annotations.find(p.id);
        if (it != d.annotations.end()) {
            if (it->second.cot) rec["cot"] = it->second.cot->steps;
            if (it->second.socratic) {
                json pairs = json::array();
                for (const auto& pair : it->second.socratic->pairs) {
                    pairs.push_back({{"q", pair.subquestion}, {"s", pair.solution}});
                }
                rec["socratic"] = pairs;
            }
            auto prov = d.provenance.find(p.id);
            if (prov != d.provenance.end()) {
                rec["source"] = to_string(prov->second.source);
                rec["attempts"] = prov->second.attempts;
            }
        }
        out << rec.dump() << "\n";
    }
}

std::tuple<Dataset, Dataset, Dataset> split_sequential(const Dataset& d, double train_fraction,
                                                       double validation_fraction,
                                                       double test_fraction) {
    if (d.problems.empty()) throw ConfigError("split_sequential: empty dataset");
    if (train_fraction <= 0 || validation_fraction <= 0 || test_fraction <= 0) {
        throw ConfigError("split_sequential: fractions must be positive");
    }
    const double sum = train_fraction + validation_fraction + test_fraction;
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw ConfigError("split_sequential: fractions must sum to 1");
    }
    // Validation and test take floor(fraction * N); train absorbs the
    // remainder so tiny datasets always keep at least their head in train.
    const std::size_t n = d.problems.size();
    const std::size_t n_val = static_cast<std::size_t>(std::floor(validation_fraction * static_cast<double>(n)));
    const std::size_t n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
    const std::size_t n_train = n - n_val - n_test;

    Dataset train{split_name(d.name, Split::train), d.regime, Split::train, {}};
    Dataset val{split_name(d.name, Split::validation), d.regime, Split::validation, {}};
    Dataset test{split_name(d.name, Split::test), d.regime, Split::test, {}};
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_train) {
            train.problems.push_back(d.problems[i]);
        } else if (i < n_train + n_val) {
            val.problems.push_back(d.problems[i]);
        } else {
            test.problems.push_back(d.problems[i]);
        }
    }
    return {std::move(train), std::move(val), std::move(test)};
}

std::string dataset_fingerprint(const Dataset& d) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        h ^= fnv1a64(s);
        h *= 0x100000001b3ULL;
    };
    for (const auto& p : d.problems) {
        mix(p.id);
        mix(p.text);
        mix(p.gold_answer.to_string());
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

} // namespace distill
