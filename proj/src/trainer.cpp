#include "distill/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "distill/backends.hpp"
#include "distill/dataset_io.hpp"
#include "distill/errors.hpp"
#include "distill/rng.hpp"

namespace distill {

using nlohmann::json;

std::string RunManifest::to_json() const {
    json j;
    j["config"] = config;
    j["hyperparams"] = {{"iterations", hyperparams.iterations},
                        {"learning_rate", hyperparams.learning_rate},
                        {"batch_size", hyperparams.batch_size},
                        {"seed", hyperparams.seed},
                        {"max_seq_len", hyperparams.max_seq_len},
                        {"eval_every", hyperparams.eval_every}};
    j["dataset_fingerprint"] = dataset_fingerprint;
    j["val_fingerprint"] = val_fingerprint;
    j["iterations"] = iterations;
    j["examples_built"] = examples_built;
    j["examples_dropped"] = examples_dropped;
    j["problems_skipped"] = problems_skipped;
    json evals_json = json::array();
    for (const auto& e : evals) {
        evals_json.push_back({{"iteration", e.iteration}, {"val_loss", e.val_loss}});
    }
    j["evals"] = evals_json;
    j["checkpoint_path"] = checkpoint_path;
    return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
    const json j = json::parse(text);
    RunManifest m;
    m.config = j.at("config").get<std::string>();
    const auto& h = j.at("hyperparams");
    m.hyperparams.iterations = h.at("iterations").get<int>();
    m.hyperparams.learning_rate = h.at("learning_rate").get<double>();
    m.hyperparams.batch_size = h.at("batch_size").get<int>();
    m.hyperparams.seed = h.at("seed").get<std::uint64_t>();
    m.hyperparams.max_seq_len = h.at("max_seq_len").get<int>();
    m.hyperparams.eval_every = h.at("eval_every").get<int>();
    m.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    m.val_fingerprint = j.value("val_fingerprint", "");
    m.iterations = j.at("iterations").get<int>();
    m.examples_built = j.value("examples_built", 0);
    m.examples_dropped = j.value("examples_dropped", 0);
    m.problems_skipped = j.value("problems_skipped", 0);
    for (const auto& e : j.value("evals", json::array())) {
        m.evals.push_back({e.at("iteration").get<int>(), e.at("val_loss").get<double>()});
    }
    m.checkpoint_path = j.value("checkpoint_path", "");
    return m;
}

void Hyperparams::validate() const {
    if (iterations <= 0 || learning_rate <= 0 || batch_size <= 0 || max_seq_len <= 0 || eval_every <= 0) {
        throw ConfigError("hyperparams must all be positive");
    }
}

ModelHandle StudentBackend::fine_tune(const std::vector<TrainingExample>& corpus, const Hyperparams& h) {
    ModelHandle m = init(corpus, h);
    advance(m, corpus, h, h.iterations);
    return m;
}

double mean_loss(const StudentBackend& backend, const ModelHandle& m,
                 const std::vector<TrainingExample>& examples) {
    if (examples.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& e : examples) sum += backend.loss(m, e);
    return sum / static_cast<double>(examples.size());
}

void dump_examples(const std::vector<TrainingExample>& examples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write examples: " + path);
    for (const auto& e : examples) {
        json j;
        j["context"] = e.context;
        j["target"] = e.target;
        j["meta"] = {{"problem_id", e.meta.problem_id},
                     {"step_index", e.meta.step_index},
                     {"config", e.meta.config}};
        out << j.dump() << "\n";
    }
}

std::vector<TrainingExample> load_examples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read examples: " + path);
    std::vector<TrainingExample> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        TrainingExample e;
        e.context = j.at("context").get<std::string>();
        e.target = j.at("target").get<std::string>();
        const auto& m = j.at("meta");
        e.meta.problem_id = m.value("problem_id", "");
        e.meta.step_index = m.value("step_index", 0);
        e.meta.config = m.value("config", "");
        out.push_back(std::move(e));
    }
    return out;
}

std::optional<SocraticChain> socratic_chain_for(const AnnotatedDataset& data, const Problem& p) {
    const Annotation* ann = data.annotation_for(p.id);
    if (ann && ann->socratic) return ann->socratic;
    return OracleBackend::gold_chain(p);
}

std::optional<ReasoningChain> cot_chain_for(const AnnotatedDataset& data, const Problem& p) {
    const Annotation* ann = data.annotation_for(p.id);
    if (ann && ann->cot) return ann->cot;
    const AnswerKind kind = p.gold_answer.kind();
    if (p.gold_steps && !p.gold_steps->empty()) {
        return make_reasoning_chain(*p.gold_steps, kind);
    }
    if (p.gold_facts && !p.gold_facts->empty()) {
        return make_reasoning_chain(*p.gold_facts, kind); // facts used as CoT
    }
    return std::nullopt;
}

BuiltExamples build_examples(TrainConfig config, const AnnotatedDataset& data,
                             const TrainRunOptions& opts) {
    BuiltExamples out;
    for (const auto& p : data.base.problems) {
        switch (config) {
            case TrainConfig::answer_only: {
                auto built = build_answer_only(p);
                out.examples.insert(out.examples.end(), built.begin(), built.end());
                break;
            }
            case TrainConfig::cot: {
                auto chain = cot_chain_for(data, p);
                if (!chain) {
                    out.skipped_ids.push_back(p.id);
                    break;
                }
                auto built = build_cot(p, *chain);
                out.examples.insert(out.examples.end(), built.begin(), built.end());
                break;
            }
            case TrainConfig::unified:
            case TrainConfig::iterative_qa:
            case TrainConfig::no_subq:
            case TrainConfig::qg:
            case TrainConfig::guidance: {
                auto chain = socratic_chain_for(data, p);
                if (!chain) {
                    out.skipped_ids.push_back(p.id);
                    break;
                }
                if (config == TrainConfig::unified) {
                    auto built = build_unified(p, *chain);
                    out.examples.insert(out.examples.end(), built.begin(), built.end());
                } else if (config == TrainConfig::iterative_qa) {
                    auto built = build_iterative_qa(p, *chain);
                    out.examples.insert(out.examples.end(), built.begin(), built.end());
                } else if (config == TrainConfig::no_subq) {
                    auto built = build_no_subq_ablation(p, *chain);
                    out.examples.insert(out.examples.end(), built.begin(), built.end());
                } else if (config == TrainConfig::qg) {
                    std::optional<std::string> guidance;
                    if (opts.qg_guidance) {
                        guidance = build_guidance(p, *chain, opts.guidance_kind).target;
                    }
                    auto built = build_qg(p, *chain, guidance);
                    out.examples.insert(out.examples.end(), built.begin(), built.end());
                } else {
                    out.examples.push_back(build_guidance(p, *chain, opts.guidance_kind));
                }
                break;
            }
        }
    }
    if (out.examples.empty()) {
        std::string ids;
        for (std::size_t i = 0; i < out.skipped_ids.size() && i < 10; ++i) {
            ids += (i > 0 ? ", " : "") + out.skipped_ids[i];
        }
        throw ConfigError("no problem provides the annotation required by config '" +
                          to_string(config) + "'; offending ids: " + ids);
    }
    return out;
}

TrainResult train(TrainConfig config, const AnnotatedDataset& train_data,
                  const AnnotatedDataset& val_data, StudentBackend& backend, const Hyperparams& h,
                  const TrainRunOptions& opts) {
    h.validate();

    BuiltExamples built = build_examples(config, train_data, opts);
    Rng rng(h.seed);
    rng.shuffle(built.examples);

    RunManifest manifest;
    manifest.config = to_string(config);
    manifest.hyperparams = h;
    manifest.dataset_fingerprint = dataset_fingerprint(train_data.base);
    manifest.val_fingerprint = dataset_fingerprint(val_data.base);
    manifest.problems_skipped = static_cast<int>(built.skipped_ids.size());

    std::vector<TrainingExample> examples;
    for (auto& e : built.examples) {
        if (static_cast<int>(e.context.size() + e.target.size()) > h.max_seq_len) {
            ++manifest.examples_dropped;
            continue;
        }
        examples.push_back(std::move(e));
    }
    if (examples.empty()) {
        throw ConfigError("every example of config '" + to_string(config) +
                          "' exceeds max_seq_len=" + std::to_string(h.max_seq_len));
    }
    manifest.examples_built = static_cast<int>(examples.size());

    std::vector<TrainingExample> val_examples;
    if (!val_data.base.problems.empty()) {
        BuiltExamples val_built = build_examples(config, val_data, opts);
        for (auto& e : val_built.examples) {
            if (static_cast<int>(e.context.size() + e.target.size()) > h.max_seq_len) continue;
            val_examples.push_back(std::move(e));
        }
    }

    ModelHandle current = backend.init(examples, h);
    ModelHandle best = current;
    double best_loss = std::numeric_limits<double>::infinity();
    if (!val_examples.empty()) {
        best_loss = mean_loss(backend, current, val_examples);
        manifest.evals.push_back({0, best_loss});
        best = backend.snapshot(current);
    }

    int done = 0;
    while (done < h.iterations) {
        const int chunk = std::min(h.eval_every, h.iterations - done);
        backend.advance(current, examples, h, chunk);
        done += chunk;
        if (!val_examples.empty()) {
            const double val = mean_loss(backend, current, val_examples);
            manifest.evals.push_back({done, val});
            if (val < best_loss) {
                best_loss = val;
                best = backend.snapshot(current);
            }
        }
    }
    manifest.iterations = done;

    TrainResult result;
    result.model = val_examples.empty() ? current : best;
    result.manifest = manifest;
    return result;
}

} // namespace distill
