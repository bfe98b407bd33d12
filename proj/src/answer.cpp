#include "distill/answer.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace distill {

std::string to_string(AnswerKind k) {
    return k == AnswerKind::numeric ? "numeric" : "boolean";
}

std::optional<AnswerKind> answer_kind_from_string(const std::string& s) {
    if (s == "numeric") return AnswerKind::numeric;
    if (s == "boolean") return AnswerKind::boolean;
    return std::nullopt;
}

const Rational& Answer::number() const {
    if (kind_ != AnswerKind::numeric) throw std::logic_error("answer is not numeric");
    return number_;
}

bool Answer::truth() const {
    if (kind_ != AnswerKind::boolean) throw std::logic_error("answer is not boolean");
    return truth_;
}

std::string Answer::to_string() const {
    if (kind_ == AnswerKind::boolean) return truth_ ? "true" : "false";
    return number_.to_decimal_string();
}

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace

std::optional<Answer> Answer::parse(const std::string& text) {
    const std::string l = lower(text);
    if (l == "true" || l == "yes") return Answer::boolean(true);
    if (l == "false" || l == "no") return Answer::boolean(false);
    auto r = Rational::parse_decimal(text);
    if (r) return Answer::numeric(*r);
    return std::nullopt;
}

std::optional<Answer> Answer::parse(const std::string& text, AnswerKind kind) {
    auto a = parse(text);
    if (!a || a->kind() != kind) return std::nullopt;
    return a;
}

bool answers_equal(const Answer& a, const Answer& b, const Rational& tolerance) {
    if (a.kind() != b.kind()) return false;
    if (a.kind() == AnswerKind::boolean) return a.truth() == b.truth();
    const Rational diff = (a.number() - b.number()).abs();
    return diff < tolerance || diff == tolerance;
}

} // namespace distill
