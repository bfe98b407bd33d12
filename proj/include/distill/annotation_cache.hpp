#pragma once

#include <mutex>
#include <optional>
#include <string>

namespace distill {

// Disk cache for teacher completions, one content-addressed file per key.
// Reads and writes are atomic per key (temp file + rename), so concurrent
// annotation workers can share one cache directory.
class AnnotationCache {
public:
    // Empty directory disables caching.
    explicit AnnotationCache(std::string directory);

    bool enabled() const { return !dir_.empty(); }

    static std::string make_key(const std::string& template_id, const std::string& problem_id,
                                int attempt, const std::string& sampling_fingerprint);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& completion);

private:
    std::string path_for(const std::string& key) const;

    std::string dir_;
    mutable std::mutex mutex_;
};

} // namespace distill
