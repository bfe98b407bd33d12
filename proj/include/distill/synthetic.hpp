#pragma once

#include <cstdint>
#include <string>

#include "distill/data.hpp"

namespace distill {

// Generator of k-step arithmetic word problems with known subquestion and
// solution chains. Every problem carries gold_steps and gold_subquestions
// aligned one-to-one, and inline calc annotations, so oracle teachers and
// oracle students can replay or recompute them.
struct SyntheticSpec {
    int count = 50;
    int min_steps = 2;
    int max_steps = 4;
    std::uint64_t seed = 0;
    std::string id_prefix = "syn";
};

Dataset generate_synthetic(const SyntheticSpec& spec);

} // namespace distill
