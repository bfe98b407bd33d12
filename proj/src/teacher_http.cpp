#include "distill/teacher_http.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "distill/errors.hpp"

namespace distill {

using nlohmann::json;

HttpTeacherClient::HttpTeacherClient(HttpTeacherConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ConfigError("http teacher: base_url is empty");
}

std::string HttpTeacherClient::complete(const std::string& prompt, const SamplingConfig& sampling) {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);

    httplib::Headers headers;
    if (!config_.auth_env.empty()) {
        const char* token = std::getenv(config_.auth_env.c_str());
        if (token != nullptr && token[0] != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }

    json body;
    body["model"] = config_.model;
    body["prompt"] = prompt;
    body["max_tokens"] = sampling.max_tokens;
    body["temperature"] = sampling.temperature;
    if (!sampling.stop_sequences.empty()) body["stop"] = sampling.stop_sequences;
    if (sampling.seed) body["seed"] = *sampling.seed;

    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res) {
        throw TransportError("http teacher: no response from " + config_.base_url);
    }
    if (res->status >= 500) {
        throw TransportError("http teacher: server error " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw AnnotationError("http teacher: request rejected with status " + std::to_string(res->status) +
                              ": " + res->body);
    }

    try {
        const json parsed = json::parse(res->body);
        if (!parsed.contains("choices") || parsed["choices"].empty()) {
            throw AnnotationError("http teacher: response has no choices");
        }
        return parsed["choices"][0].at("text").get<std::string>();
    } catch (const json::exception& e) {
        throw AnnotationError(std::string("http teacher: malformed response: ") + e.what());
    }
}

} // namespace distill
