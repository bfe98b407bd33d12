#pragma once

#include <stdexcept>
#include <string>

namespace distill {

// Schema or syntax problem in an input file. Message carries the line number.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dataset content does not satisfy the declared annotation regime.
struct RegimeError : std::runtime_error {
    explicit RegimeError(const std::string& msg) : std::runtime_error(msg) {}
};

// A stage was asked to run with settings it cannot satisfy.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Teacher transport failed after backoff was exhausted.
struct AnnotationError : std::runtime_error {
    explicit AnnotationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Retryable transport failure from a teacher client.
struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& msg) : std::runtime_error(msg) {}
};

// Two-stage prompting produced output that cannot be consumed.
struct PromptingError : std::runtime_error {
    explicit PromptingError(const std::string& msg) : std::runtime_error(msg) {}
};

// Artifacts on disk were produced by a different configuration.
struct StalenessError : std::runtime_error {
    explicit StalenessError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace distill
