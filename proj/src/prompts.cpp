#include "distill/teacher.hpp"

#include <fstream>
#include <sstream>

#include "distill/errors.hpp"
#include "distill/rng.hpp"

namespace distill {

std::string SamplingConfig::fingerprint() const {
    std::ostringstream os;
    os << "t=" << temperature << ";m=" << max_tokens << ";s=";
    if (seed) os << *seed;
    os << ";stop=";
    for (const auto& s : stop_sequences) os << s << '\x1f';
    return os.str();
}

std::string PromptTemplate::render(const std::string& problem_text) const {
    std::ostringstream os;
    os << header << "\n\n";
    for (const auto& ex : exemplars) {
        os << "---\n" << ex << "\n\n";
    }
    os << "---\n";
    std::string slot = problem_format;
    const std::string placeholder = "{problem}";
    const std::size_t at = slot.find(placeholder);
    if (at == std::string::npos) {
        throw ConfigError("prompt template problem_format lacks {problem} placeholder");
    }
    slot.replace(at, placeholder.size(), problem_text);
    os << slot;
    return os.str();
}

std::string PromptTemplate::id() const {
    std::ostringstream all;
    all << header << '\x1e' << problem_format << '\x1e';
    for (const auto& ex : exemplars) all << ex << '\x1f';
    std::ostringstream os;
    os << std::hex << fnv1a64(all.str());
    return os.str();
}

PromptTemplate PromptTemplate::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open prompt template: " + path);
    std::vector<std::string> sections(1);
    std::string line;
    while (std::getline(in, line)) {
        if (line == "---") {
            sections.emplace_back();
            continue;
        }
        std::string& cur = sections.back();
        if (!cur.empty()) cur.push_back('\n');
        cur += line;
    }
    PromptTemplate t;
    auto trim = [](std::string s) {
        while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
        std::size_t b = 0;
        while (b < s.size() && (s[b] == '\n' || s[b] == ' ')) ++b;
        return s.substr(b);
    };
    t.header = trim(sections[0]);
    for (std::size_t i = 1; i < sections.size(); ++i) {
        const std::string ex = trim(sections[i]);
        if (!ex.empty()) t.exemplars.push_back(ex);
    }
    if (t.header.empty() && t.exemplars.empty()) {
        throw ConfigError("prompt template is empty: " + path);
    }
    return t;
}

void PromptTemplate::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write prompt template: " + path);
    out << header << "\n";
    for (const auto& ex : exemplars) {
        out << "---\n" << ex << "\n";
    }
}

} // namespace distill
