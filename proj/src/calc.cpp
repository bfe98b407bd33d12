#include "distill/calc.hpp"

#include <cctype>
#include <stdexcept>

namespace distill {

namespace {

struct Token {
    enum class Kind { number, op } kind;
    Rational value{0};
    char op = 0;
};

bool tokenize(const std::string& expr, std::vector<Token>& out, std::string* error) {
    std::size_t i = 0;
    const std::size_t n = expr.size();
    bool expect_number = true;
    while (i < n) {
        const char c = expr[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (expect_number) {
            std::size_t start = i;
            if (expr[i] == '+' || expr[i] == '-') ++i;
            std::size_t digits = 0;
            while (i < n && std::isdigit(static_cast<unsigned char>(expr[i]))) {
                ++i;
                ++digits;
            }
            if (i < n && expr[i] == '.') {
                ++i;
                while (i < n && std::isdigit(static_cast<unsigned char>(expr[i]))) {
                    ++i;
                    ++digits;
                }
            }
            if (digits == 0) {
                if (error) *error = "expected number";
                return false;
            }
            auto r = Rational::parse_decimal(expr.substr(start, i - start));
            if (!r) {
                if (error) *error = "bad number syntax";
                return false;
            }
            out.push_back(Token{Token::Kind::number, *r, 0});
            expect_number = false;
        } else {
            if (c != '+' && c != '-' && c != '*' && c != '/') {
                if (error) *error = std::string("unexpected character '") + c + "'";
                return false;
            }
            out.push_back(Token{Token::Kind::op, Rational(0), c});
            ++i;
            expect_number = true;
        }
    }
    if (out.empty() || expect_number) {
        if (error) *error = "expression ends mid-operation";
        return false;
    }
    return true;
}

} // namespace

std::optional<Rational> eval_calc_expression(const std::string& expr, std::string* error) {
    std::vector<Token> tokens;
    if (!tokenize(expr, tokens, error)) return std::nullopt;

    // Collapse * and / first, then fold + and - left to right.
    std::vector<Rational> terms;
    std::vector<char> adds; // sign preceding terms[i+1]
    Rational current = tokens[0].value;
    try {
        for (std::size_t i = 1; i + 1 < tokens.size(); i += 2) {
            const char op = tokens[i].op;
            const Rational& rhs = tokens[i + 1].value;
            if (op == '*') {
                current = current * rhs;
            } else if (op == '/') {
                if (rhs.num() == 0) {
                    if (error) *error = "division by zero";
                    return std::nullopt;
                }
                current = current / rhs;
            } else {
                terms.push_back(current);
                adds.push_back(op);
                current = rhs;
            }
        }
        terms.push_back(current);
        Rational acc = terms[0];
        for (std::size_t i = 0; i < adds.size(); ++i) {
            acc = adds[i] == '+' ? acc + terms[i + 1] : acc - terms[i + 1];
        }
        return acc;
    } catch (const std::overflow_error&) {
        if (error) *error = "value exceeds exact range";
        return std::nullopt;
    }
}

std::vector<std::string> find_calc_spans(const std::string& text) {
    std::vector<std::string> spans;
    std::size_t pos = 0;
    while (true) {
        const std::size_t open = text.find("<<", pos);
        if (open == std::string::npos) break;
        const std::size_t close = text.find(">>", open + 2);
        const std::size_t next_open = text.find("<<", open + 2);
        if (close == std::string::npos) {
            // Unbalanced: report the dangling opener as a span.
            spans.push_back(text.substr(open));
            break;
        }
        if (next_open != std::string::npos && next_open < close) {
            // "<<a <<b=1>>": treat the outer opener as malformed, keep going.
            spans.push_back(text.substr(open, next_open - open));
            pos = next_open;
            continue;
        }
        spans.push_back(text.substr(open, close + 2 - open));
        pos = close + 2;
    }
    return spans;
}

std::optional<CalcAnnotation> parse_calc_annotation(const std::string& span) {
    if (span.size() < 5 || span.substr(0, 2) != "<<" || span.substr(span.size() - 2) != ">>") {
        return std::nullopt;
    }
    const std::string inner = span.substr(2, span.size() - 4);
    const std::size_t eq = inner.rfind('=');
    if (eq == std::string::npos) return std::nullopt;
    const std::string lhs = inner.substr(0, eq);
    std::string rhs_text = inner.substr(eq + 1);
    // Trim spaces around the declared value.
    while (!rhs_text.empty() && std::isspace(static_cast<unsigned char>(rhs_text.front()))) rhs_text.erase(rhs_text.begin());
    while (!rhs_text.empty() && std::isspace(static_cast<unsigned char>(rhs_text.back()))) rhs_text.pop_back();
    auto rhs = Rational::parse_decimal(rhs_text);
    if (!rhs || lhs.empty()) return std::nullopt;
    return CalcAnnotation{span, lhs, *rhs};
}

std::vector<CalcAnnotation> parse_all_calc_annotations(const std::string& text) {
    std::vector<CalcAnnotation> out;
    for (const auto& span : find_calc_spans(text)) {
        auto ann = parse_calc_annotation(span);
        if (ann) out.push_back(*ann);
    }
    return out;
}

CalcReport verify_calc_annotations(const std::string& text) {
    CalcReport report;
    for (const auto& span : find_calc_spans(text)) {
        ++report.total;
        auto ann = parse_calc_annotation(span);
        if (!ann) {
            report.failures.push_back({span, "malformed annotation"});
            continue;
        }
        std::string err;
        auto lhs = eval_calc_expression(ann->lhs, &err);
        if (!lhs) {
            report.failures.push_back({span, err.empty() ? "unevaluable expression" : err});
            continue;
        }
        bool ok;
        if (lhs->is_terminating_decimal()) {
            ok = *lhs == ann->rhs;
        } else {
            const Rational tol(1, 1000000);
            const Rational diff = (*lhs - ann->rhs).abs();
            ok = diff < tol || diff == tol;
        }
        if (ok) {
            ++report.valid;
        } else {
            report.failures.push_back({span, "expected " + lhs->to_decimal_string()});
        }
    }
    return report;
}

} // namespace distill
