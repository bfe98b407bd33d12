#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "distill/annotator.hpp"
#include "distill/builders.hpp"
#include "distill/data.hpp"
#include "distill/inference.hpp"
#include "distill/synthetic.hpp"
#include "distill/teacher_http.hpp"
#include "distill/training.hpp"

namespace distill {

// Declarative run configuration; one JSON file drives every stage. Every
// underspecified default (temperatures, retry counts, step bounds) lives
// here and is echoed into stage manifests.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    struct DatasetSection {
        std::string name = "dataset";
        Regime regime = Regime::answers_only;
    } dataset;

    struct PrepareSection {
        // One of: a synthetic generation recipe or raw corpus paths.
        std::optional<SyntheticSpec> synthetic;
        int synthetic_train = 0;
        int synthetic_validation = 0;
        int synthetic_test = 0;

        std::string raw_kind; // "canonical" | "gsm8k" | "asdiv_svamp"
        std::string raw_train, raw_test, raw_all;
        double split_train = 0.8, split_validation = 0.1, split_test = 0.1;
        double validation_fraction = 0.1; // carved from train when test is given
    } prepare;

    struct TeacherSection {
        std::string kind = "oracle"; // "oracle" | "http"
        double correct_prob = 1.0;
        HttpTeacherConfig http;
    } teacher;

    struct AnnotateSection {
        AnnotationMode mode = AnnotationMode::socratic;
        std::string template_path; // empty: built-in minimal template
        int max_retries = 3;
        int parallelism = 1;
        std::string cache_dir; // empty: no cache
        double base_temperature = 0.0;
        double retry_temperature = 0.7;
        int max_tokens = 512;
        std::vector<std::string> splits = {"train", "validation"};
    } annotate;

    struct TrainEntry {
        TrainConfig config = TrainConfig::unified;
        std::string backend = "oracle"; // "oracle" | "tinygpt" | "uniform"
        Hyperparams hyperparams;
        bool qg_guidance = false;
        GuidanceKind guidance_kind = GuidanceKind::equations;
    };
    std::vector<TrainEntry> train_entries;

    struct InferSection {
        InferMode mode = InferMode::iterative;
        std::string backend = "oracle";
        int max_steps = 8;
        bool guidance = false;
        std::optional<int> corrupt_step; // oracle backend fault injection
        SamplingConfig sampling;
        std::string split = "test";
    } infer;

    struct EvalSection {
        bool qg_metrics = false;
    } eval;

    static RunConfig load(const std::string& path);
    std::string canonical_json() const;
    std::string config_hash() const;
};

// Stage entry points; each writes its artifacts plus a manifest carrying the
// config hash under the run's output directory.
void cmd_prepare(const RunConfig& cfg);
void cmd_annotate(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_infer(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);

// Merges every eval report under the output directory into one comparison
// table; returns the text rendering (also written next to the reports).
std::string cmd_report(const RunConfig& cfg);

// Paths used by the stages, exposed for tests.
struct RunPaths {
    std::string data_dir, models_dir, traces_dir, eval_dir;
    std::string split_file(const std::string& split) const;
    std::string annotated_file(const std::string& split) const;
    static RunPaths under(const std::string& out_dir);
};

} // namespace distill
