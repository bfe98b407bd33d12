#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <mutex>

#include "distill/annotator.hpp"
#include "distill/data.hpp"
#include "distill/errors.hpp"
#include "distill/teacher.hpp"

namespace distill {

// Replays a fixed queue of completions. Unit-test workhorse.
class ScriptedTeacher : public TeacherClient {
public:
    explicit ScriptedTeacher(std::vector<std::string> completions)
        : queue_(completions.begin(), completions.end()) {}

    std::string complete(const std::string&, const SamplingConfig&) override {
        std::lock_guard<std::mutex> lock(mutex_);
        if (queue_.empty()) throw AnnotationError("scripted teacher exhausted");
        std::string next = std::move(queue_.front());
        queue_.pop_front();
        ++calls_;
        return next;
    }

    long calls() const { return calls_; }
    bool concurrent_safe() const override { return false; }

private:
    std::deque<std::string> queue_;
    long calls_ = 0;
    std::mutex mutex_;
};

// Deterministic stand-in for the large teacher model, driven by the gold
// annotations of a dataset. Emits well-formed completions for the configured
// annotation mode; with probability 1 - correct_prob (hashed from problem id,
// sampling seed, and the teacher seed, so reruns are identical) it appends a
// wrong final answer for the validity filter to reject.
class OracleTeacher : public TeacherClient {
public:
    OracleTeacher(Dataset dataset, AnnotationMode mode, double correct_prob = 1.0,
                  std::uint64_t seed = 0);

    std::string complete(const std::string& prompt, const SamplingConfig& sampling) override;

    long calls() const { return calls_.load(); }

private:
    const Problem* find_problem(const std::string& prompt) const;
    bool decide_correct(const Problem& p, const SamplingConfig& sampling) const;
    std::string wrong_answer_line(const Problem& p) const;

    Dataset dataset_;
    AnnotationMode mode_;
    double correct_prob_;
    std::uint64_t seed_;
    std::atomic<long> calls_{0};
};

} // namespace distill
