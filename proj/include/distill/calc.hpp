#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distill/rational.hpp"

namespace distill {

// One inline calculator span: "<<EXPR=VALUE>>".
// Grammar (bit-exact): "<<" EXPR "=" NUMBER ">>", EXPR := NUMBER (OP NUMBER)*,
// OP in {+,-,*,/}, NUMBER := [sign] digits [ "." digits ]. Spaces between
// tokens are tolerated, nesting is not.
struct CalcAnnotation {
    std::string raw;   // full span including delimiters
    std::string lhs;   // expression text left of '='
    Rational rhs;      // declared value
};

struct CalcFailure {
    std::string span;
    std::string reason;
};

struct CalcReport {
    int total = 0;
    int valid = 0;
    std::vector<CalcFailure> failures;
};

// Finds every "<<...>>" span in reading order. Malformed spans are returned
// with raw text only; the caller decides how to treat them.
std::vector<std::string> find_calc_spans(const std::string& text);

// Parses one span. Returns nullopt for malformed spans (missing '=',
// unbalanced delimiters, bad number syntax).
std::optional<CalcAnnotation> parse_calc_annotation(const std::string& span);

// Evaluates EXPR with exact rational arithmetic and standard operator
// precedence (* and / bind before + and -, left associative within a level).
// Division by zero -> nullopt with reason via out param.
std::optional<Rational> eval_calc_expression(const std::string& expr, std::string* error = nullptr);

// Checks every span in the text. A span is valid when LHS equals RHS exactly
// after reduction; when the LHS value has no finite decimal expansion the
// comparison allows |LHS - RHS| <= 1e-6 since the written RHS is necessarily
// truncated. Malformed spans count as failures, never exceptions.
CalcReport verify_calc_annotations(const std::string& text);

// RHS values of well-formed spans, in reading order. Used by answer
// extraction (rightmost wins) and guidance targets.
std::vector<CalcAnnotation> parse_all_calc_annotations(const std::string& text);

} // namespace distill
