#pragma once

#include "distill/training.hpp"

namespace distill {

// Dimensions of the character-level transformer student. The defaults land
// around 120k parameters, far under the megabyte-scale budget this project
// targets, and train in minutes on one core.
struct TinyGptConfig {
    int d_model = 64;
    int n_layers = 2;
    int n_heads = 4;
    int d_ff = 256;
    int max_positions = 256; // sequence length cap including the 3 special tokens
    double init_std = 0.08;
    double grad_clip = 1.0;
    int warmup_steps = 50;
};

// A from-scratch decoder-only transformer over characters: learned token and
// position embeddings, pre-RMSNorm attention and MLP blocks, untied head,
// Adam. Sequences are tokenized as BOS + context + SEP + target + EOS; loss
// is taken over the target tokens and EOS only.
class TinyGptBackend : public StudentBackend {
public:
    explicit TinyGptBackend(TinyGptConfig cfg = {}) : cfg_(cfg) {}

    std::string id() const override { return "tinygpt"; }
    ModelHandle init(const std::vector<TrainingExample>& corpus, const Hyperparams& h) override;
    void advance(ModelHandle& m, const std::vector<TrainingExample>& corpus, const Hyperparams& h,
                 int iterations) override;
    ModelHandle snapshot(const ModelHandle& m) const override;
    double loss(const ModelHandle& m, const TrainingExample& example) const override;
    std::string generate(const ModelHandle& m, const std::string& context,
                         const SamplingConfig& sampling) const override;
    void save(const ModelHandle& m, const std::string& path) const override;
    ModelHandle load(const std::string& path) const override;

    static std::size_t parameter_count(const ModelHandle& m);

private:
    TinyGptConfig cfg_;
};

} // namespace distill
