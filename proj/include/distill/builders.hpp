#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distill/data.hpp"
#include "distill/training.hpp"

namespace distill {

// Student training configurations.
enum class TrainConfig { answer_only, cot, unified, iterative_qa, qg, guidance, no_subq };
std::string to_string(TrainConfig c);
std::optional<TrainConfig> train_config_from_string(const std::string& s);

// What the guidance model predicts: the chain's equations, or just the number
// of steps/facts (the StrategyQA/SVAMP variant).
enum class GuidanceKind { equations, step_count };

// --- sequence builders ------------------------------------------------------
// All builders leave the problem statement in the context and the supervised
// text in the target; gold final answers appear only in targets.

// context = problem text; target = canonical answer statement.
std::vector<TrainingExample> build_answer_only(const Problem& p);

// context = problem text; target = steps joined by newlines, with a final
// answer line appended when the last step does not already carry one.
std::vector<TrainingExample> build_cot(const Problem& p, const ReasoningChain& chain);

// context = problem text; target = "q1 s1 q2 s2 ..." joined by single spaces.
std::vector<TrainingExample> build_unified(const Problem& p, const SocraticChain& chain);

// The per-pair view of the unified sequence: example j conditions on the
// problem plus pairs 1..j-1 and supervises pair j. Targets concatenate
// exactly to the unified target (pair j > 1 keeps its leading space).
std::vector<TrainingExample> build_unified_pairs(const Problem& p, const SocraticChain& chain);

// n examples; example j: context = problem + q1 s1 ... q_j with the chain's
// own solutions (teacher forcing), target = s_j.
std::vector<TrainingExample> build_iterative_qa(const Problem& p, const SocraticChain& chain);

// One example; context optionally prefixed "Equations: ...\n"; target =
// subquestions only, one per line. Solutions never reach the target.
std::vector<TrainingExample> build_qg(const Problem& p, const SocraticChain& chain,
                                      const std::optional<std::string>& guidance);

// context = problem text; target = calc-annotation equations joined " | ",
// or the step count when kind is step_count. Equations mode with a chain
// holding no calc annotations is an error.
TrainingExample build_guidance(const Problem& p, const SocraticChain& chain,
                               GuidanceKind kind = GuidanceKind::equations);
TrainingExample build_guidance(const Problem& p, const ReasoningChain& chain,
                               GuidanceKind kind = GuidanceKind::equations);

// Ablation without a question module: example j: context = problem + q_j
// only; target = s_1 ... s_j (the whole prefix chain).
std::vector<TrainingExample> build_no_subq_ablation(const Problem& p, const SocraticChain& chain);

// Shared context assembly for iterative QA, also used at inference time so
// that training and inference contexts differ only in where the solutions
// come from. questions has j entries, solutions j-1.
std::string assemble_qa_context(const std::string& problem_text,
                                const std::vector<std::string>& questions,
                                const std::vector<std::string>& solutions);

// The guidance prefix exactly as build_qg renders it.
std::string guidance_prefix(const std::string& guidance_target);

// The unified target text for a chain (exposed for oracles and tests).
std::string unified_target(const Problem& p, const SocraticChain& chain);

} // namespace distill
