#pragma once

#include <vector>

#include "distill/tiny_gpt.hpp"

// Test hooks into the transformer internals, for gradient checking only.
namespace distill::tinygpt_debug {

double example_loss(const ModelHandle& m, const TrainingExample& example);

// Analytic d(loss)/d(params) for one example.
std::vector<float> example_gradient(const ModelHandle& m, const TrainingExample& example);

// Mutable parameter vector of the handle's model.
std::vector<float>& parameters(const ModelHandle& m);

} // namespace distill::tinygpt_debug
