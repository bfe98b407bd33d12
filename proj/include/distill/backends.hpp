#pragma once

#include <optional>

#include "distill/builders.hpp"
#include "distill/data.hpp"
#include "distill/training.hpp"

namespace distill {

// Assigns every token probability 1/vocab_size, so loss is exactly
// ln(vocab_size) per target token. Token = one character of the target text.
class UniformBackend : public StudentBackend {
public:
    explicit UniformBackend(int vocab_size = 4) : vocab_size_(vocab_size) {}

    std::string id() const override { return "uniform"; }
    ModelHandle init(const std::vector<TrainingExample>& corpus, const Hyperparams& h) override;
    void advance(ModelHandle&, const std::vector<TrainingExample>&, const Hyperparams&, int) override {}
    ModelHandle snapshot(const ModelHandle& m) const override { return m; }
    double loss(const ModelHandle& m, const TrainingExample& example) const override;
    std::string generate(const ModelHandle&, const std::string&, const SamplingConfig&) const override {
        return {};
    }
    void save(const ModelHandle& m, const std::string& path) const override;
    ModelHandle load(const std::string& path) const override;

private:
    int vocab_size_;
};

// A student that answers from the gold chains of its dataset instead of
// learning. fine_tune is free; generate dispatches on the training config the
// handle was built from. The QA role recomputes each step's arithmetic from
// the context it is given, so a corrupt_step setting poisons that step and
// every later value, which is what the end-to-end wiring checks need.
class OracleBackend : public StudentBackend {
public:
    explicit OracleBackend(Dataset dataset, std::optional<int> corrupt_step = std::nullopt);

    std::string id() const override { return "oracle"; }
    ModelHandle init(const std::vector<TrainingExample>& corpus, const Hyperparams& h) override;
    void advance(ModelHandle&, const std::vector<TrainingExample>&, const Hyperparams&, int) override {}
    ModelHandle snapshot(const ModelHandle& m) const override { return m; }
    double loss(const ModelHandle&, const TrainingExample&) const override { return 0.0; }
    std::string generate(const ModelHandle& m, const std::string& context,
                         const SamplingConfig& sampling) const override;
    void save(const ModelHandle& m, const std::string& path) const override;
    ModelHandle load(const std::string& path) const override;

    // The gold socratic chain for a problem, built from its annotation fields.
    static std::optional<SocraticChain> gold_chain(const Problem& p);

private:
    const Problem* find_by_context(const std::string& context) const;
    std::string answer_qa(const Problem& p, const std::string& context) const;

    Dataset dataset_;
    std::optional<int> corrupt_step_;
};

} // namespace distill
