#include "distill/annotation_cache.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "distill/rng.hpp"

namespace distill {

namespace fs = std::filesystem;

AnnotationCache::AnnotationCache(std::string directory) : dir_(std::move(directory)) {
    if (!dir_.empty()) fs::create_directories(dir_);
}

std::string AnnotationCache::make_key(const std::string& template_id, const std::string& problem_id,
                                      int attempt, const std::string& sampling_fingerprint) {
    std::ostringstream material;
    material << template_id << '\x1f' << problem_id << '\x1f' << attempt << '\x1f' << sampling_fingerprint;
    std::ostringstream key;
    key << std::hex << fnv1a64(material.str()) << "-" << fnv1a64(problem_id);
    return key.str();
}

std::string AnnotationCache::path_for(const std::string& key) const {
    return (fs::path(dir_) / (key + ".txt")).string();
}

std::optional<std::string> AnnotationCache::get(const std::string& key) const {
    if (!enabled()) return std::nullopt;
    std::lock_guard<std::mutex> lock(mutex_);
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

void AnnotationCache::put(const std::string& key, const std::string& completion) {
    if (!enabled()) return;
    std::lock_guard<std::mutex> lock(mutex_);
    const std::string final_path = path_for(key);
    const std::string tmp_path = final_path + ".tmp";
    {
        std::ofstream out(tmp_path, std::ios::binary);
        out << completion;
    }
    fs::rename(tmp_path, final_path);
}

} // namespace distill
