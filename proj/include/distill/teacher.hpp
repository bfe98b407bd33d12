#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace distill {

struct SamplingConfig {
    double temperature = 0.0;
    int max_tokens = 512;
    std::vector<std::string> stop_sequences;
    std::optional<std::uint64_t> seed;

    // Stable fingerprint for cache keys.
    std::string fingerprint() const;
};

// A completion-style language model endpoint. Implementations must be
// deterministic at temperature 0 with a fixed seed (required of mocks,
// best-effort for remote services) and must either tolerate concurrent
// calls or advertise a serial contract via concurrent_safe().
class TeacherClient {
public:
    virtual ~TeacherClient() = default;
    virtual std::string complete(const std::string& prompt, const SamplingConfig& sampling) = 0;
    virtual bool concurrent_safe() const { return true; }
};

// Few-shot prompt: header, exemplars joined by "---" delimiter lines, then
// the problem rendered through problem_format ("{problem}" placeholder).
struct PromptTemplate {
    std::string header;
    std::vector<std::string> exemplars;
    std::string problem_format = "Q: {problem}\n";

    std::string render(const std::string& problem_text) const;

    // Identity used in cache keys; stable across processes.
    std::string id() const;

    // File format: sections separated by lines containing exactly "---".
    // First section is the header, the rest are exemplars.
    static PromptTemplate load(const std::string& path);
    void save(const std::string& path) const;
};

} // namespace distill
