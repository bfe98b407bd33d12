#include "distill/synthetic.hpp"

#include "distill/errors.hpp"
#include "distill/rng.hpp"

namespace distill {

namespace {

const char* kNames[] = {"Ava", "Ben", "Ivy", "Leo", "Max", "Mia", "Sam", "Zoe"};
const char* kItems[] = {"bags", "cans", "caps", "cups", "figs", "hats", "pens", "toys"};

} // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.count < 1 || spec.min_steps < 1 || spec.max_steps < spec.min_steps) {
        throw ConfigError("synthetic spec: count >= 1 and 1 <= min_steps <= max_steps required");
    }
    Rng rng(spec.seed ^ 0x73796eULL);
    Dataset d;
    d.name = spec.id_prefix;
    d.regime = Regime::step_by_step;

    for (int i = 0; i < spec.count; ++i) {
        const std::string name = kNames[rng.next_below(8)];
        const std::string item = kItems[rng.next_below(8)];
        const int steps = spec.min_steps + static_cast<int>(rng.next_below(spec.max_steps - spec.min_steps + 1));
        int value = 2 + static_cast<int>(rng.next_below(8)); // 2..9

        std::string text = name + " has " + std::to_string(value) + " " + item + ".";
        std::vector<std::string> questions;
        std::vector<std::string> solutions;
        for (int j = 1; j <= steps; ++j) {
            const bool gain = value < 3 || rng.next_below(10) < 6;
            const int delta = gain ? 2 + static_cast<int>(rng.next_below(8))
                                   : 1 + static_cast<int>(rng.next_below(std::min(value - 1, 9)));
            const int next = gain ? value + delta : value - delta;
            const char op = gain ? '+' : '-';

            text += gain ? " Then " + name + " gets " + std::to_string(delta) + " more."
                         : " Then " + name + " gives " + std::to_string(delta) + " away.";

            questions.push_back("How many " + item + " after step " + std::to_string(j) + "?");
            std::string solution = name + " has " + std::to_string(value) + " " + op + " " +
                                   std::to_string(delta) + " = <<" + std::to_string(value) + op +
                                   std::to_string(delta) + "=" + std::to_string(next) + ">> " +
                                   std::to_string(next) + " " + item + ".";
            if (j == steps) {
                solution += " The answer is " + std::to_string(next) + ".";
            }
            solutions.push_back(solution);
            value = next;
        }
        text += " How many " + item + " does " + name + " have now?";

        Problem p;
        p.id = spec.id_prefix + std::to_string(i);
        p.text = text;
        p.gold_answer = Answer::numeric(Rational(value));
        p.gold_steps = solutions;
        p.gold_subquestions = questions;
        d.problems.push_back(std::move(p));
    }
    return d;
}

} // namespace distill
