#include "distill/parsing.hpp"

#include <cctype>

namespace distill {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Marker prefix "SQ3:" or "A3:"; returns the index or 0 when absent.
int marker_index(const std::string& line, const std::string& tag, std::size_t* body_at) {
    if (line.size() <= tag.size() || line.compare(0, tag.size(), tag) != 0) return 0;
    std::size_t i = tag.size();
    std::size_t digits = 0;
    int index = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
        index = index * 10 + (line[i] - '0');
        ++i;
        ++digits;
    }
    if (digits == 0 || i >= line.size() || line[i] != ':') return 0;
    ++i;
    while (i < line.size() && line[i] == ' ') ++i;
    *body_at = i;
    return index;
}

} // namespace

std::vector<std::string> completion_lines(const std::string& completion) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&]() {
        const std::string t = trim(cur);
        cur.clear();
        if (t.empty()) return false;
        if (t == "---") return true; // run-on into the next exemplar: stop
        out.push_back(t);
        return false;
    };
    for (char c : completion) {
        if (c == '\n') {
            if (flush()) return out;
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    flush();
    return out;
}

std::optional<std::vector<SocraticPair>> parse_subquestion_blocks(const std::string& completion) {
    std::vector<SocraticPair> pairs;
    enum class State { want_q, in_q, in_a } state = State::want_q;
    int expected = 1;
    for (const auto& line : completion_lines(completion)) {
        std::size_t body_at = 0;
        const int q_idx = marker_index(line, "SQ", &body_at);
        if (q_idx > 0) {
            if (state == State::in_q) return std::nullopt; // SQ without an A
            if (q_idx != expected) return std::nullopt;    // gap or restart
            pairs.push_back({trim(line.substr(body_at)), ""});
            state = State::in_q;
            continue;
        }
        const int a_idx = marker_index(line, "A", &body_at);
        if (a_idx > 0) {
            if (state != State::in_q || a_idx != expected) return std::nullopt;
            pairs.back().solution = trim(line.substr(body_at));
            state = State::in_a;
            ++expected;
            continue;
        }
        // Continuation line of the current block.
        switch (state) {
            case State::want_q:
                return std::nullopt; // prose before the first subquestion
            case State::in_q:
                pairs.back().subquestion += " " + line;
                break;
            case State::in_a:
                pairs.back().solution += " " + line;
                break;
        }
    }
    if (pairs.empty() || state != State::in_a) return std::nullopt;
    for (const auto& pair : pairs) {
        if (pair.subquestion.empty() || pair.solution.empty()) return std::nullopt;
    }
    return pairs;
}

std::vector<std::string> strip_question_prefixes(const std::vector<std::string>& lines) {
    std::vector<std::string> out;
    for (const auto& line : lines) {
        std::size_t body_at = 0;
        if (marker_index(line, "SQ", &body_at) > 0 || marker_index(line, "Q", &body_at) > 0) {
            out.push_back(trim(line.substr(body_at)));
            continue;
        }
        // "1." / "1)" list numbering.
        std::size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
            out.push_back(trim(line.substr(i + 1)));
            continue;
        }
        out.push_back(line);
    }
    return out;
}


void split_qa_segments(const std::string& text, std::vector<std::string>* questions,
                       std::vector<std::string>* solutions) {
    questions->clear();
    solutions->clear();
    std::string current;
    std::string pending_solution;
    bool in_solution = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            current += ' ';
        } else {
            current += c;
        }
        const bool sentence_end = (c == '?' || c == '.') &&
                                  (i + 1 >= text.size() || text[i + 1] == ' ' || text[i + 1] == '\n');
        if (!sentence_end) continue;
        const std::string sentence = trim(current);
        current.clear();
        if (sentence.empty()) continue;
        if (c == '?') {
            if (in_solution) {
                solutions->push_back(trim(pending_solution));
                pending_solution.clear();
            }
            questions->push_back(sentence);
            in_solution = true;
        } else if (in_solution) {
            if (!pending_solution.empty()) pending_solution += ' ';
            pending_solution += sentence;
        }
    }
    const std::string tail = trim(current);
    if (in_solution) {
        std::string last = pending_solution;
        if (!tail.empty()) {
            if (!last.empty()) last += ' ';
            last += tail;
        }
        solutions->push_back(trim(last));
    }
}

} // namespace distill
