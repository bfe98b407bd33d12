#include "distill/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "distill/errors.hpp"

namespace distill {

using nlohmann::json;

std::string EvalReport::to_json() const {
    json j;
    j["dataset"] = dataset;
    j["mode"] = mode;
    j["n_problems"] = n_problems;
    j["accuracy"] = accuracy;
    json per = json::array();
    for (const auto& r : per_problem) {
        json e;
        e["id"] = r.id;
        e["predicted"] = r.predicted ? json(r.predicted->to_string()) : json(nullptr);
        e["gold"] = r.gold.to_string();
        e["correct"] = r.correct;
        per.push_back(e);
    }
    j["per_problem"] = per;
    if (qg_metrics) {
        j["qg_metrics"] = {{"bleu", qg_metrics->bleu},
                           {"embed_f1", qg_metrics->embed_f1},
                           {"q_count_match", qg_metrics->q_count_match}};
    }
    return j.dump(2);
}

EvalReport EvalReport::from_json(const std::string& text) {
    const json j = json::parse(text);
    EvalReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.n_problems = j.at("n_problems").get<int>();
    r.accuracy = j.at("accuracy").get<double>();
    for (const auto& e : j.value("per_problem", json::array())) {
        PerProblemResult p;
        p.id = e.at("id").get<std::string>();
        if (!e.at("predicted").is_null()) {
            p.predicted = Answer::parse(e.at("predicted").get<std::string>());
        }
        p.gold = *Answer::parse(e.at("gold").get<std::string>());
        p.correct = e.at("correct").get<bool>();
        r.per_problem.push_back(p);
    }
    if (j.contains("qg_metrics")) {
        QgMetrics q;
        q.bleu = j["qg_metrics"].at("bleu").get<double>();
        q.embed_f1 = j["qg_metrics"].at("embed_f1").get<double>();
        q.q_count_match = j["qg_metrics"].at("q_count_match").get<double>();
        r.qg_metrics = q;
    }
    return r;
}

EvalReport score_accuracy(const std::vector<InferenceTrace>& traces, const Dataset& gold) {
    EvalReport report;
    report.dataset = gold.name;
    report.mode = traces.empty() ? "" : to_string(traces.front().mode);
    report.n_problems = static_cast<int>(traces.size());
    int correct = 0;
    for (const auto& t : traces) {
        const Problem* p = gold.find(t.problem_id);
        if (p == nullptr) {
            throw ConfigError("score_accuracy: trace id '" + t.problem_id + "' not in gold dataset");
        }
        PerProblemResult r;
        r.id = t.problem_id;
        r.predicted = t.predicted;
        r.gold = p->gold_answer;
        r.correct = t.predicted && answers_equal(*t.predicted, p->gold_answer);
        if (r.correct) ++correct;
        report.per_problem.push_back(std::move(r));
    }
    report.accuracy = traces.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(traces.size());
    return report;
}

namespace {

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

} // namespace

double score_bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references) {
    if (candidates.size() != references.size()) {
        throw ConfigError("score_bleu: candidate/reference counts differ");
    }
    constexpr int kMaxOrder = 4;
    constexpr double kEps = 1e-9;

    double matches[kMaxOrder] = {0, 0, 0, 0};
    double totals[kMaxOrder] = {0, 0, 0, 0};
    long long hyp_len = 0;
    long long ref_len = 0;

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto hyp = tokenize(candidates[i]);
        const auto ref = tokenize(references[i]);
        hyp_len += static_cast<long long>(hyp.size());
        ref_len += static_cast<long long>(ref.size());
        for (int n = 1; n <= kMaxOrder; ++n) {
            if (static_cast<int>(hyp.size()) < n) continue;
            std::map<std::vector<std::string>, int> hyp_grams;
            for (std::size_t k = 0; k + n <= hyp.size(); ++k) {
                hyp_grams[std::vector<std::string>(hyp.begin() + k, hyp.begin() + k + n)] += 1;
            }
            std::map<std::vector<std::string>, int> ref_grams;
            for (std::size_t k = 0; k + static_cast<std::size_t>(n) <= ref.size(); ++k) {
                ref_grams[std::vector<std::string>(ref.begin() + k, ref.begin() + k + n)] += 1;
            }
            totals[n - 1] += static_cast<double>(hyp.size() - n + 1);
            for (const auto& [gram, count] : hyp_grams) {
                auto it = ref_grams.find(gram);
                if (it != ref_grams.end()) matches[n - 1] += std::min(count, it->second);
            }
        }
    }

    if (hyp_len == 0) return 0.0;

    double log_sum = 0.0;
    int used = 0;
    for (int n = 0; n < kMaxOrder; ++n) {
        if (totals[n] <= 0) continue;
        const double p = std::max(matches[n], kEps) / totals[n];
        log_sum += std::log(p);
        ++used;
    }
    if (used == 0) return 0.0;

    const double geo = std::exp(log_sum / used);
    const double bp = hyp_len >= ref_len
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
    return 100.0 * bp * geo;
}

double score_q_count_match(const std::vector<std::vector<std::string>>& pred_questions,
                           const std::vector<std::vector<std::string>>& ref_questions) {
    if (pred_questions.size() != ref_questions.size()) {
        throw ConfigError("score_q_count_match: prediction/reference counts differ");
    }
    if (pred_questions.empty()) return 0.0;
    int match = 0;
    for (std::size_t i = 0; i < pred_questions.size(); ++i) {
        if (pred_questions[i].size() == ref_questions[i].size()) ++match;
    }
    return static_cast<double>(match) / static_cast<double>(pred_questions.size());
}

SimilarityScorer::Score TokenOverlapScorer::score(const std::string& candidate,
                                                  const std::string& reference) const {
    const auto cand = tokenize(candidate);
    const auto ref = tokenize(reference);
    if (cand.empty() || ref.empty()) return {0.0, 0.0, 0.0};
    std::map<std::string, int> ref_counts;
    for (const auto& t : ref) ref_counts[t] += 1;
    int overlap = 0;
    for (const auto& t : cand) {
        auto it = ref_counts.find(t);
        if (it != ref_counts.end() && it->second > 0) {
            ++overlap;
            it->second -= 1;
        }
    }
    Score s;
    s.precision = static_cast<double>(overlap) / static_cast<double>(cand.size());
    s.recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
    s.f1 = (s.precision + s.recall) > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

double score_embed_f1(const std::vector<std::string>& candidates,
                      const std::vector<std::string>& references, const SimilarityScorer& scorer) {
    if (candidates.size() != references.size()) {
        throw ConfigError("score_embed_f1: candidate/reference counts differ");
    }
    if (candidates.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        sum += scorer.score(candidates[i], references[i]).f1;
    }
    return sum / static_cast<double>(candidates.size());
}

std::string format_percent(double fraction) {
    // Decimal half-even rounding at two places, independent of the binary
    // printf rounding mode.
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", fraction * 100.0);
    std::string s(buf);
    const std::size_t dot = s.find('.');
    std::string digits = s.substr(0, dot) + s.substr(dot + 1); // all digits, implicit scale 6
    const int keep = static_cast<int>(dot) + 2;                // digits to keep
    bool negative = false;
    if (digits[0] == '-') {
        negative = true;
        digits.erase(digits.begin());
    }
    const int total = static_cast<int>(digits.size());
    const int cut = keep - (negative ? 1 : 0);
    if (cut >= total) return s; // nothing to round
    const std::string kept = digits.substr(0, cut);
    const std::string rest = digits.substr(cut);

    bool round_up = false;
    if (rest[0] > '5') {
        round_up = true;
    } else if (rest[0] == '5') {
        const bool tail_nonzero = rest.find_first_not_of('0', 1) != std::string::npos;
        if (tail_nonzero) {
            round_up = true;
        } else {
            round_up = ((kept.back() - '0') % 2) == 1; // tie: to even
        }
    }
    std::string out = kept;
    if (round_up) {
        int i = static_cast<int>(out.size()) - 1;
        for (; i >= 0; --i) {
            if (out[i] == '9') {
                out[i] = '0';
            } else {
                out[i] += 1;
                break;
            }
        }
        if (i < 0) out.insert(out.begin(), '1');
    }
    // Reinsert the decimal point two places from the end.
    out.insert(out.size() - 2, ".");
    if (out[0] == '.') out.insert(out.begin(), '0');
    return (negative ? "-" : "") + out;
}

std::string render_table(const std::vector<EvalReport>& reports, TableFormat format) {
    if (reports.empty()) throw ConfigError("render_table: no reports");

    std::vector<std::string> datasets;
    std::vector<std::string> modes;
    for (const auto& r : reports) {
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
            datasets.push_back(r.dataset);
        }
        if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) {
            modes.push_back(r.mode);
        }
    }
    auto cell = [&reports](const std::string& d, const std::string& m) -> std::string {
        for (const auto& r : reports) {
            if (r.dataset == d && r.mode == m) return format_percent(r.accuracy);
        }
        return "-";
    };

    std::ostringstream out;
    if (format == TableFormat::csv) {
        out << "dataset";
        for (const auto& m : modes) out << "," << m;
        out << "\n";
        for (const auto& d : datasets) {
            out << d;
            for (const auto& m : modes) out << "," << cell(d, m);
            out << "\n";
        }
        return out.str();
    }

    std::size_t name_width = std::string("dataset").size();
    for (const auto& d : datasets) name_width = std::max(name_width, d.size());
    std::vector<std::size_t> widths;
    for (const auto& m : modes) {
        std::size_t w = m.size();
        for (const auto& d : datasets) w = std::max(w, cell(d, m).size());
        widths.push_back(w);
    }
    auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
    };
    out << pad("dataset", name_width);
    for (std::size_t i = 0; i < modes.size(); ++i) out << "  " << pad(modes[i], widths[i]);
    out << "\n";
    for (const auto& d : datasets) {
        out << pad(d, name_width);
        for (std::size_t i = 0; i < modes.size(); ++i) out << "  " << pad(cell(d, modes[i]), widths[i]);
        out << "\n";
    }
    return out.str();
}

} // namespace distill
