#pragma once

#include <optional>
#include <string>

#include "distill/answer.hpp"

namespace distill {

// Final-answer extraction. Heuristic cascade, first rule that yields a value
// wins:
//   1. last "the answer is X" / "the final answer is X" marker, any case;
//   2. numeric only: rightmost calculator-annotation RHS;
//   3. numeric only: last standalone number in the text;
//   4. none.
// Numbers shed currency signs, thousands commas, and a trailing sentence
// period. Booleans map YES/NO/TRUE/FALSE. Total: never throws.
std::optional<Answer> extract_final_answer(const std::string& text, AnswerKind kind);

// The canonical sentences the pipeline trains students to emit.
// numeric -> "The answer is X."   boolean -> "The final answer is YES."
std::string render_answer_statement(const Answer& a);

// Last standalone number in the text, if any. Standalone means delimited by
// non-alphanumeric characters; thousands commas and decimal points are part
// of the number.
std::optional<Rational> last_standalone_number(const std::string& text);

} // namespace distill
