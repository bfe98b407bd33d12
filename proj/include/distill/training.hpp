#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "distill/teacher.hpp"

namespace distill {

struct ExampleMeta {
    std::string problem_id;
    int step_index = 0; // 1-based for per-step builders, 0 for whole-sequence ones
    std::string config;
};

// One (conditioning text, supervised text) pair. The loss mask boundary is
// exactly the context/target split: context tokens never incur loss.
struct TrainingExample {
    std::string context;
    std::string target;
    ExampleMeta meta;
};

struct Hyperparams {
    int iterations = 1000;       // optimizer steps; the equal-budget unit
    double learning_rate = 3e-3;
    int batch_size = 8;
    std::uint64_t seed = 0;
    int max_seq_len = 256;       // characters of context+target; longer examples are dropped
    int eval_every = 100;        // validation cadence, in iterations

    void validate() const;
};

// Opaque trained-student reference. `state` is owned by the backend that
// created it; `backend` names that backend, `tag` carries the training
// config label for backends that dispatch on it.
struct ModelHandle {
    std::string backend;
    std::string tag;
    std::shared_ptr<void> state;
};

// A trainable student. generate() at temperature 0 with a fixed seed must be
// deterministic; loss() is the mean per-token negative log-likelihood over
// the target tokens under the backend's own tokenizer. A handle is owned
// exclusively while training; generate/loss on distinct handles may run
// concurrently.
class StudentBackend {
public:
    virtual ~StudentBackend() = default;

    virtual std::string id() const = 0;

    // Fresh student prepared against the corpus (vocabulary and the like).
    virtual ModelHandle init(const std::vector<TrainingExample>& corpus, const Hyperparams& h) = 0;

    // Advance `iterations` optimizer steps over the corpus.
    virtual void advance(ModelHandle& m, const std::vector<TrainingExample>& corpus,
                         const Hyperparams& h, int iterations) = 0;

    // Deep copy for checkpoint selection.
    virtual ModelHandle snapshot(const ModelHandle& m) const = 0;

    virtual double loss(const ModelHandle& m, const TrainingExample& example) const = 0;

    virtual std::string generate(const ModelHandle& m, const std::string& context,
                                 const SamplingConfig& sampling) const = 0;

    virtual void save(const ModelHandle& m, const std::string& path) const = 0;
    virtual ModelHandle load(const std::string& path) const = 0;

    // init + advance over the full iteration budget.
    ModelHandle fine_tune(const std::vector<TrainingExample>& corpus, const Hyperparams& h);
};

double mean_loss(const StudentBackend& backend, const ModelHandle& m,
                 const std::vector<TrainingExample>& examples);

} // namespace distill
