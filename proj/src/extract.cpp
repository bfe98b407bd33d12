#include "distill/extract.hpp"

#include <algorithm>
#include <cctype>

#include "distill/calc.hpp"

namespace distill {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string to_lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Matches one number at position `i`: [-]? digits (,ddd)* (.digits)?
// Thousands commas must group exactly three digits. Returns the cleaned
// numeric body (commas removed) and advances `end` past the match, or returns
// empty when `i` does not start a number.
std::string match_number(const std::string& text, std::size_t i, std::size_t& end) {
    std::string body;
    std::size_t p = i;
    if (p < text.size() && text[p] == '-') {
        body.push_back('-');
        ++p;
    }
    if (p >= text.size() || !is_digit(text[p])) return {};
    while (p < text.size() && is_digit(text[p])) body.push_back(text[p++]);
    // Comma groups: ",ddd" consumed only when exactly three digits follow.
    while (p < text.size() && text[p] == ',') {
        std::size_t q = p + 1;
        std::size_t digits = 0;
        while (q < text.size() && is_digit(text[q])) {
            ++q;
            ++digits;
        }
        if (digits != 3) break;
        body += text.substr(p + 1, 3);
        p += 4;
    }
    if (p + 1 < text.size() && text[p] == '.' && is_digit(text[p + 1])) {
        body.push_back('.');
        ++p;
        while (p < text.size() && is_digit(text[p])) body.push_back(text[p++]);
    }
    end = p;
    return body;
}

// All standalone numbers in reading order. Standalone: the character before
// (past an optional sign/currency mark) and after the match is not
// alphanumeric.
std::vector<Rational> standalone_numbers(const std::string& text) {
    std::vector<Rational> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (!is_digit(text[i]) && !(text[i] == '-' && i + 1 < n && is_digit(text[i + 1]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (text[i] == '-') {
            // A minus glued to a preceding digit is a binary operator.
            if (i > 0 && (is_digit(text[i - 1]) || is_alnum(text[i - 1]))) {
                ++i;
                continue;
            }
        }
        std::size_t end = start;
        const std::string body = match_number(text, start, end);
        if (body.empty()) {
            ++i;
            continue;
        }
        // Left boundary: allow '$' and other non-alphanumerics.
        const bool left_ok = start == 0 || !is_alnum(text[start - 1]);
        // Right boundary: "2nd", "7pm" are not standalone numbers.
        const bool right_ok = end >= n || !is_alnum(text[end]);
        if (left_ok && right_ok) {
            auto r = Rational::parse_decimal(body);
            if (r) out.push_back(*r);
        }
        // Skip any alphanumeric tail so "2nd" is consumed whole.
        i = end;
        while (i < n && is_alnum(text[i])) ++i;
    }
    return out;
}

// Reads the token following an answer marker and parses it per kind.
std::optional<Answer> parse_marker_payload(const std::string& text, std::size_t pos, AnswerKind kind) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == ':')) ++pos;

    if (kind == AnswerKind::boolean) {
        std::size_t end = pos;
        while (end < text.size() && is_alnum(text[end])) ++end;
        const std::string l = to_lower(text.substr(pos, end - pos));
        if (l == "yes" || l == "true") return Answer::boolean(true);
        if (l == "no" || l == "false") return Answer::boolean(false);
        return std::nullopt;
    }

    if (pos < text.size() && text[pos] == '$') ++pos; // currency sign
    std::size_t end = pos;
    const std::string body = match_number(text, pos, end);
    if (body.empty()) return std::nullopt;
    auto r = Rational::parse_decimal(body);
    if (!r) return std::nullopt;
    return Answer::numeric(*r);
}

} // namespace

std::optional<Rational> last_standalone_number(const std::string& text) {
    auto all = standalone_numbers(text);
    if (all.empty()) return std::nullopt;
    return all.back();
}

std::optional<Answer> extract_final_answer(const std::string& text, AnswerKind kind) {
    if (text.empty()) return std::nullopt;

    // Rule 1: rightmost answer marker.
    const std::string lowered = to_lower(text);
    static const std::string kMarkers[] = {"the final answer is", "the answer is"};
    std::size_t best = std::string::npos;
    std::size_t best_len = 0;
    for (const auto& m : kMarkers) {
        const std::size_t at = lowered.rfind(m);
        if (at != std::string::npos && (best == std::string::npos || at > best)) {
            best = at;
            best_len = m.size();
        }
    }
    if (best != std::string::npos) {
        auto a = parse_marker_payload(text, best + best_len, kind);
        if (a) return a;
    }

    if (kind == AnswerKind::numeric) {
        // Rule 2: rightmost calculator annotation.
        const auto anns = parse_all_calc_annotations(text);
        if (!anns.empty()) return Answer::numeric(anns.back().rhs);

        // Rule 3: last standalone number.
        auto r = last_standalone_number(text);
        if (r) return Answer::numeric(*r);
    }

    return std::nullopt;
}

std::string render_answer_statement(const Answer& a) {
    if (a.kind() == AnswerKind::boolean) {
        return std::string("The final answer is ") + (a.truth() ? "YES" : "NO") + ".";
    }
    return "The answer is " + a.number().to_decimal_string() + ".";
}

} // namespace distill
