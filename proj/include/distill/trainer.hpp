#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distill/builders.hpp"
#include "distill/data.hpp"
#include "distill/training.hpp"

namespace distill {

struct EvalPoint {
    int iteration;
    double val_loss;
};

// Written next to every checkpoint; equal budgets across configs are audited
// by comparing the iterations field.
struct RunManifest {
    std::string config;
    Hyperparams hyperparams;
    std::string dataset_fingerprint;
    std::string val_fingerprint;
    int iterations = 0;
    int examples_built = 0;
    int examples_dropped = 0; // over max_seq_len
    int problems_skipped = 0; // missing the annotation the config needs
    std::vector<EvalPoint> evals;
    std::string checkpoint_path;

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);
};

struct TrainResult {
    ModelHandle model;
    RunManifest manifest;
};

struct TrainRunOptions {
    GuidanceKind guidance_kind = GuidanceKind::equations;
    bool qg_guidance = false; // prefix QG contexts with the chain's own equations
};

// The chain a config trains on: the teacher annotation when present, the gold
// annotation fields otherwise.
std::optional<SocraticChain> socratic_chain_for(const AnnotatedDataset& data, const Problem& p);
std::optional<ReasoningChain> cot_chain_for(const AnnotatedDataset& data, const Problem& p);

// All examples the config derives from the dataset. Problems lacking the
// required annotation are skipped and reported; a dataset yielding nothing
// raises ConfigError naming the offenders.
struct BuiltExamples {
    std::vector<TrainingExample> examples;
    std::vector<std::string> skipped_ids;
};
BuiltExamples build_examples(TrainConfig config, const AnnotatedDataset& data,
                             const TrainRunOptions& opts = {});

// Builds examples, shuffles with h.seed, drops overlong examples, then
// fine-tunes for exactly h.iterations with validation loss measured every
// h.eval_every iterations. Returns the best-validation checkpoint.
TrainResult train(TrainConfig config, const AnnotatedDataset& train_data,
                  const AnnotatedDataset& val_data, StudentBackend& backend, const Hyperparams& h,
                  const TrainRunOptions& opts = {});

// Example dump for golden-file tests: one {"context","target","meta"} object
// per line.
void dump_examples(const std::vector<TrainingExample>& examples, const std::string& path);
std::vector<TrainingExample> load_examples(const std::string& path);

} // namespace distill
