#pragma once

#include <optional>
#include <string>

#include "distill/rational.hpp"

namespace distill {

enum class AnswerKind { numeric, boolean };

std::string to_string(AnswerKind k);
std::optional<AnswerKind> answer_kind_from_string(const std::string& s);

// A final answer: either a finite rational or a truth value.
class Answer {
public:
    static Answer numeric(Rational value) { return Answer(value); }
    static Answer boolean(bool value) { return Answer(value); }

    AnswerKind kind() const { return kind_; }
    const Rational& number() const;
    bool truth() const;

    // Canonical serialized form: exact decimal string or "true"/"false".
    std::string to_string() const;

    // Parses the serialized form. Boolean accepts YES/NO/TRUE/FALSE in any
    // case; everything else must be a decimal number.
    static std::optional<Answer> parse(const std::string& text);
    static std::optional<Answer> parse(const std::string& text, AnswerKind kind);

private:
    explicit Answer(Rational v) : kind_(AnswerKind::numeric), number_(v), truth_(false) {}
    explicit Answer(bool v) : kind_(AnswerKind::boolean), number_(0), truth_(v) {}

    AnswerKind kind_;
    Rational number_;
    bool truth_;
};

// Booleans compare exactly; numerics compare with absolute tolerance
// (default 1e-6). Mismatched kinds are never equal.
bool answers_equal(const Answer& a, const Answer& b, const Rational& tolerance = Rational(1, 1000000));

} // namespace distill
