#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distill/data.hpp"
#include "distill/inference.hpp"

namespace distill {

struct PerProblemResult {
    std::string id;
    std::optional<Answer> predicted;
    Answer gold = Answer::numeric(Rational(0));
    bool correct = false;
};

struct QgMetrics {
    double bleu = 0.0;
    double embed_f1 = 0.0;
    double q_count_match = 0.0;
};

struct EvalReport {
    std::string dataset;
    std::string mode;
    int n_problems = 0;
    double accuracy = 0.0;
    std::vector<PerProblemResult> per_problem;
    std::optional<QgMetrics> qg_metrics;

    std::string to_json() const;
    static EvalReport from_json(const std::string& text);
};

// Final-answer accuracy: correct iff a prediction exists and matches gold.
// Every trace id must exist in the gold dataset.
EvalReport score_accuracy(const std::vector<InferenceTrace>& traces, const Dataset& gold);

// Corpus BLEU, 4-gram geometric mean with brevity penalty, on a 0-100 scale.
// Candidates pair with references by index. Zero n-gram matches are floored
// at 1e-9 (add-epsilon smoothing); orders with no candidate n-grams at all
// are left out of the mean.
double score_bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references);

// Fraction of problems whose generated question count equals the reference's.
double score_q_count_match(const std::vector<std::vector<std::string>>& pred_questions,
                           const std::vector<std::vector<std::string>>& ref_questions);

// Pluggable sentence-similarity scorer for the embedding-based F1 metric.
class SimilarityScorer {
public:
    struct Score {
        double precision = 0.0;
        double recall = 0.0;
        double f1 = 0.0;
    };
    virtual ~SimilarityScorer() = default;
    virtual Score score(const std::string& candidate, const std::string& reference) const = 0;
};

// Deterministic default: multiset token overlap. Keeps the metric runnable
// without any model downloads.
class TokenOverlapScorer : public SimilarityScorer {
public:
    Score score(const std::string& candidate, const std::string& reference) const override;
};

// Mean F1 across index-aligned pairs.
double score_embed_f1(const std::vector<std::string>& candidates,
                      const std::vector<std::string>& references, const SimilarityScorer& scorer);

enum class TableFormat { text, csv };

// Accuracy comparison table, datasets x configs, percentages with two
// decimals (half-even). Row/column order follows first appearance.
std::string render_table(const std::vector<EvalReport>& reports, TableFormat format);

// Half-even decimal rounding used by the tables, exposed for tests.
std::string format_percent(double fraction);

} // namespace distill
