#pragma once

#include <string>
#include <vector>

#include "distill/data.hpp"

namespace testsupport {

// The GSM8K robe problem and its two-step Socratic decomposition, the
// canonical worked example for all sequence formats.
inline const std::string kRobeText =
    "A robe takes 2 bolts of blue fiber and half that much white fiber. "
    "How many bolts in total does it take?";
inline const std::string kRobeQ1 = "How many bolts of white fiber does it take?";
inline const std::string kRobeS1 = "It takes 2/2 = <<2/2=1>> 1 bolt of white fiber.";
inline const std::string kRobeQ2 = "How many bolts in total does it take?";
inline const std::string kRobeS2 =
    "So the total amount of fabric is 2+1 = <<2+1=3>> 3 bolts of fabric. The answer is 3.";

inline distill::Problem robe_problem() {
    distill::Problem p;
    p.id = "robe";
    p.text = kRobeText;
    p.gold_answer = distill::Answer::numeric(distill::Rational(3));
    p.gold_steps = {{kRobeS1, kRobeS2}};
    p.gold_subquestions = {{kRobeQ1, kRobeQ2}};
    return p;
}

inline distill::SocraticChain robe_chain() {
    return distill::make_socratic_chain({{kRobeQ1, kRobeS1}, {kRobeQ2, kRobeS2}},
                                        distill::AnswerKind::numeric);
}

inline distill::PromptTemplate toy_template() {
    distill::PromptTemplate t;
    t.header = "Decompose each problem into subquestions, one operation per step.";
    t.exemplars = {"Q: Two pens cost 4 coins. What does one cost?\n\nSQ1: What is the price of one pen?\nA1: One pen costs 4/2 = <<4/2=2>> 2 coins. The answer is 2."};
    return t;
}

} // namespace testsupport
