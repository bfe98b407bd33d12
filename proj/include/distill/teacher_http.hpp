#pragma once

#include <string>

#include "distill/teacher.hpp"

namespace distill {

// Completion endpoint speaking the common JSON chat-less completions shape:
//   POST {path} {"model": ..., "prompt": ..., "max_tokens": ...,
//                "temperature": ..., "stop": [...], "seed": ...}
//   -> {"choices": [{"text": "..."}]}
// The bearer token is read from the named environment variable at call time;
// an empty variable sends no Authorization header.
struct HttpTeacherConfig {
    std::string base_url;             // e.g. "http://localhost:8080"
    std::string model;
    std::string path = "/v1/completions";
    std::string auth_env = "TEACHER_API_KEY";
    int timeout_seconds = 120;
};

class HttpTeacherClient : public TeacherClient {
public:
    explicit HttpTeacherClient(HttpTeacherConfig config);

    // Connection failures and 5xx responses throw TransportError (retryable);
    // 4xx responses and malformed bodies throw AnnotationError.
    std::string complete(const std::string& prompt, const SamplingConfig& sampling) override;

private:
    HttpTeacherConfig config_;
};

} // namespace distill
