#include "distill/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "distill/backends.hpp"
#include "distill/dataset_io.hpp"
#include "distill/errors.hpp"
#include "distill/metrics.hpp"
#include "distill/rng.hpp"
#include "distill/teacher_mock.hpp"
#include "distill/tiny_gpt.hpp"
#include "distill/trainer.hpp"

namespace distill {

namespace fs = std::filesystem;
using nlohmann::json;

// --- RunConfig --------------------------------------------------------------

namespace {

Hyperparams hyperparams_from_json(const json& j) {
    Hyperparams h;
    h.iterations = j.value("iterations", h.iterations);
    h.learning_rate = j.value("learning_rate", h.learning_rate);
    h.batch_size = j.value("batch_size", h.batch_size);
    h.seed = j.value("seed", h.seed);
    h.max_seq_len = j.value("max_seq_len", h.max_seq_len);
    h.eval_every = j.value("eval_every", h.eval_every);
    return h;
}

json hyperparams_to_json(const Hyperparams& h) {
    return {{"iterations", h.iterations},   {"learning_rate", h.learning_rate},
            {"batch_size", h.batch_size},   {"seed", h.seed},
            {"max_seq_len", h.max_seq_len}, {"eval_every", h.eval_every}};
}

} // namespace

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("run config " + path + ": " + e.what());
    }

    RunConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);

    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        cfg.dataset.name = d.value("name", cfg.dataset.name);
        if (d.contains("regime")) {
            auto r = regime_from_string(d["regime"].get<std::string>());
            if (!r) throw ConfigError("unknown regime: " + d["regime"].get<std::string>());
            cfg.dataset.regime = *r;
        }
    }

    if (j.contains("prepare")) {
        const auto& p = j["prepare"];
        if (p.contains("synthetic")) {
            const auto& s = p["synthetic"];
            SyntheticSpec spec;
            spec.min_steps = s.value("min_steps", spec.min_steps);
            spec.max_steps = s.value("max_steps", spec.max_steps);
            spec.seed = cfg.seed;
            spec.id_prefix = s.value("id_prefix", std::string("syn"));
            cfg.prepare.synthetic_train = s.value("train", 50);
            cfg.prepare.synthetic_validation = s.value("validation", 10);
            cfg.prepare.synthetic_test = s.value("test", 10);
            spec.count = cfg.prepare.synthetic_train + cfg.prepare.synthetic_validation +
                         cfg.prepare.synthetic_test;
            cfg.prepare.synthetic = spec;
        }
        cfg.prepare.raw_kind = p.value("raw_kind", cfg.prepare.raw_kind);
        cfg.prepare.raw_train = p.value("raw_train", cfg.prepare.raw_train);
        cfg.prepare.raw_test = p.value("raw_test", cfg.prepare.raw_test);
        cfg.prepare.raw_all = p.value("raw_all", cfg.prepare.raw_all);
        cfg.prepare.split_train = p.value("split_train", cfg.prepare.split_train);
        cfg.prepare.split_validation = p.value("split_validation", cfg.prepare.split_validation);
        cfg.prepare.split_test = p.value("split_test", cfg.prepare.split_test);
        cfg.prepare.validation_fraction = p.value("validation_fraction", cfg.prepare.validation_fraction);
    }

    if (j.contains("teacher")) {
        const auto& t = j["teacher"];
        cfg.teacher.kind = t.value("kind", cfg.teacher.kind);
        cfg.teacher.correct_prob = t.value("correct_prob", cfg.teacher.correct_prob);
        cfg.teacher.http.base_url = t.value("base_url", cfg.teacher.http.base_url);
        cfg.teacher.http.model = t.value("model", cfg.teacher.http.model);
        cfg.teacher.http.path = t.value("path", cfg.teacher.http.path);
        cfg.teacher.http.auth_env = t.value("auth_env", cfg.teacher.http.auth_env);
    }

    if (j.contains("annotate")) {
        const auto& a = j["annotate"];
        if (a.contains("mode")) {
            auto m = annotation_mode_from_string(a["mode"].get<std::string>());
            if (!m) throw ConfigError("unknown annotation mode: " + a["mode"].get<std::string>());
            cfg.annotate.mode = *m;
        }
        cfg.annotate.template_path = a.value("template", cfg.annotate.template_path);
        cfg.annotate.max_retries = a.value("max_retries", cfg.annotate.max_retries);
        cfg.annotate.parallelism = a.value("parallelism", cfg.annotate.parallelism);
        cfg.annotate.cache_dir = a.value("cache_dir", cfg.annotate.cache_dir);
        cfg.annotate.base_temperature = a.value("base_temperature", cfg.annotate.base_temperature);
        cfg.annotate.retry_temperature = a.value("retry_temperature", cfg.annotate.retry_temperature);
        cfg.annotate.max_tokens = a.value("max_tokens", cfg.annotate.max_tokens);
        if (a.contains("splits")) {
            cfg.annotate.splits = a["splits"].get<std::vector<std::string>>();
        }
    }

    for (const auto& t : j.value("train", json::array())) {
        RunConfig::TrainEntry entry;
        auto c = train_config_from_string(t.at("config").get<std::string>());
        if (!c) throw ConfigError("unknown train config: " + t.at("config").get<std::string>());
        entry.config = *c;
        entry.backend = t.value("backend", entry.backend);
        if (t.contains("hyperparams")) entry.hyperparams = hyperparams_from_json(t["hyperparams"]);
        if (entry.hyperparams.seed == 0) entry.hyperparams.seed = cfg.seed;
        entry.qg_guidance = t.value("qg_guidance", entry.qg_guidance);
        if (t.value("guidance_kind", std::string("equations")) == "step_count") {
            entry.guidance_kind = GuidanceKind::step_count;
        }
        cfg.train_entries.push_back(entry);
    }

    if (j.contains("infer")) {
        const auto& i = j["infer"];
        if (i.contains("mode")) {
            auto m = infer_mode_from_string(i["mode"].get<std::string>());
            if (!m) throw ConfigError("unknown infer mode: " + i["mode"].get<std::string>());
            cfg.infer.mode = *m;
        }
        cfg.infer.backend = i.value("backend", cfg.infer.backend);
        cfg.infer.max_steps = i.value("max_steps", cfg.infer.max_steps);
        cfg.infer.guidance = i.value("guidance", cfg.infer.guidance);
        if (i.contains("corrupt_step") && !i["corrupt_step"].is_null()) {
            cfg.infer.corrupt_step = i["corrupt_step"].get<int>();
        }
        cfg.infer.split = i.value("split", cfg.infer.split);
        if (i.contains("sampling")) {
            const auto& s = i["sampling"];
            cfg.infer.sampling.temperature = s.value("temperature", 0.0);
            cfg.infer.sampling.max_tokens = s.value("max_tokens", 256);
            if (s.contains("seed")) cfg.infer.sampling.seed = s["seed"].get<std::uint64_t>();
        }
    }
    if (!cfg.infer.sampling.seed) cfg.infer.sampling.seed = cfg.seed;

    if (j.contains("eval")) {
        cfg.eval.qg_metrics = j["eval"].value("qg_metrics", cfg.eval.qg_metrics);
    }
    return cfg;
}

std::string RunConfig::canonical_json() const {
    json j;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["dataset"] = {{"name", dataset.name}, {"regime", to_string(dataset.regime)}};
    json p;
    if (prepare.synthetic) {
        p["synthetic"] = {{"train", prepare.synthetic_train},
                          {"validation", prepare.synthetic_validation},
                          {"test", prepare.synthetic_test},
                          {"min_steps", prepare.synthetic->min_steps},
                          {"max_steps", prepare.synthetic->max_steps},
                          {"id_prefix", prepare.synthetic->id_prefix}};
    }
    p["raw_kind"] = prepare.raw_kind;
    p["raw_train"] = prepare.raw_train;
    p["raw_test"] = prepare.raw_test;
    p["raw_all"] = prepare.raw_all;
    j["prepare"] = p;
    j["teacher"] = {{"kind", teacher.kind},
                    {"correct_prob", teacher.correct_prob},
                    {"base_url", teacher.http.base_url},
                    {"model", teacher.http.model}};
    j["annotate"] = {{"mode", to_string(annotate.mode)},
                     {"template", annotate.template_path},
                     {"max_retries", annotate.max_retries},
                     {"parallelism", annotate.parallelism},
                     {"cache_dir", annotate.cache_dir},
                     {"base_temperature", annotate.base_temperature},
                     {"retry_temperature", annotate.retry_temperature},
                     {"splits", annotate.splits}};
    json trains = json::array();
    for (const auto& t : train_entries) {
        trains.push_back({{"config", to_string(t.config)},
                          {"backend", t.backend},
                          {"hyperparams", hyperparams_to_json(t.hyperparams)},
                          {"qg_guidance", t.qg_guidance}});
    }
    j["train"] = trains;
    j["infer"] = {{"mode", to_string(infer.mode)},
                  {"backend", infer.backend},
                  {"max_steps", infer.max_steps},
                  {"guidance", infer.guidance},
                  {"corrupt_step", infer.corrupt_step ? json(*infer.corrupt_step) : json(nullptr)},
                  {"split", infer.split}};
    j["eval"] = {{"qg_metrics", eval.qg_metrics}};
    return j.dump();
}

std::string RunConfig::config_hash() const {
    std::ostringstream os;
    os << std::hex << fnv1a64(canonical_json());
    return os.str();
}

// --- paths and manifests ------------------------------------------------------

RunPaths RunPaths::under(const std::string& out_dir) {
    RunPaths p;
    p.data_dir = (fs::path(out_dir) / "data").string();
    p.models_dir = (fs::path(out_dir) / "models").string();
    p.traces_dir = (fs::path(out_dir) / "traces").string();
    p.eval_dir = (fs::path(out_dir) / "eval").string();
    return p;
}

std::string RunPaths::split_file(const std::string& split) const {
    return (fs::path(data_dir) / (split + ".jsonl")).string();
}

std::string RunPaths::annotated_file(const std::string& split) const {
    return (fs::path(data_dir) / ("annotated_" + split + ".jsonl")).string();
}

namespace {

void write_manifest(const std::string& path, json body, const RunConfig& cfg) {
    body["config_hash"] = cfg.config_hash();
    body["seed"] = cfg.seed;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest: " + path);
    out << body.dump(2) << "\n";
}

json read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StalenessError("missing manifest: " + path + " (run the earlier stage first)");
    json j;
    in >> j;
    return j;
}

void require_fresh(const json& manifest, const RunConfig& cfg, const std::string& what) {
    if (manifest.value("config_hash", "") != cfg.config_hash()) {
        throw StalenessError(what + " was produced by a different configuration; rerun the earlier stages");
    }
}

std::unique_ptr<StudentBackend> make_backend(const std::string& kind, const Dataset& problems,
                                             const std::optional<int>& corrupt_step) {
    if (kind == "oracle") return std::make_unique<OracleBackend>(problems, corrupt_step);
    if (kind == "tinygpt") return std::make_unique<TinyGptBackend>();
    if (kind == "uniform") return std::make_unique<UniformBackend>();
    throw ConfigError("unknown student backend: " + kind);
}

std::unique_ptr<TeacherClient> make_teacher(const RunConfig& cfg, const Dataset& problems) {
    if (cfg.teacher.kind == "oracle") {
        return std::make_unique<OracleTeacher>(problems, cfg.annotate.mode, cfg.teacher.correct_prob,
                                               cfg.seed);
    }
    if (cfg.teacher.kind == "http") {
        return std::make_unique<HttpTeacherClient>(cfg.teacher.http);
    }
    throw ConfigError("unknown teacher kind: " + cfg.teacher.kind);
}

PromptTemplate annotation_template(const RunConfig& cfg) {
    if (!cfg.annotate.template_path.empty()) {
        return PromptTemplate::load(cfg.annotate.template_path);
    }
    PromptTemplate t;
    t.header = "Decompose each problem into subquestions, one operation per step.";
    t.exemplars = {"Q: Two pens cost 4 coins. What does one pen cost?\n\n"
                   "SQ1: What is the price of one pen?\n"
                   "A1: One pen costs 4/2 = <<4/2=2>> 2 coins. The answer is 2."};
    return t;
}

std::string checkpoint_path(const RunPaths& paths, TrainConfig config) {
    return (fs::path(paths.models_dir) / (to_string(config) + ".ckpt")).string();
}

std::string train_manifest_path(const RunPaths& paths, TrainConfig config) {
    return (fs::path(paths.models_dir) / (to_string(config) + "_manifest.json")).string();
}

} // namespace

// --- stages -------------------------------------------------------------------

void cmd_prepare(const RunConfig& cfg) {
    const RunPaths paths = RunPaths::under(cfg.out_dir);
    fs::create_directories(paths.data_dir);

    Dataset train, validation, test;
    if (cfg.prepare.synthetic) {
        const Dataset all = generate_synthetic(*cfg.prepare.synthetic);
        const int n_train = cfg.prepare.synthetic_train;
        const int n_val = cfg.prepare.synthetic_validation;
        auto slice = [&all](int begin, int end, Split split) {
            Dataset d;
            d.name = all.name;
            d.regime = all.regime;
            d.split = split;
            for (int i = begin; i < end && i < static_cast<int>(all.size()); ++i) {
                d.problems.push_back(all.problems[i]);
            }
            return d;
        };
        train = slice(0, n_train, Split::train);
        validation = slice(n_train, n_train + n_val, Split::validation);
        test = slice(n_train + n_val, static_cast<int>(all.size()), Split::test);
    } else if (cfg.prepare.raw_kind == "canonical" && !cfg.prepare.raw_all.empty()) {
        // StrategyQA-style: one file, sequential 80/10/10, no shuffling.
        const Dataset all = load_dataset(cfg.prepare.raw_all, cfg.dataset.regime);
        auto [tr, va, te] = split_sequential(all, cfg.prepare.split_train, cfg.prepare.split_validation,
                                             cfg.prepare.split_test);
        train = std::move(tr);
        validation = std::move(va);
        test = std::move(te);
    } else if ((cfg.prepare.raw_kind == "gsm8k" || cfg.prepare.raw_kind == "asdiv_svamp") &&
               !cfg.prepare.raw_train.empty() && !cfg.prepare.raw_test.empty()) {
        // Given train/test pairing; validation carved sequentially from the
        // tail of train.
        Dataset full_train = load_dataset(cfg.prepare.raw_train, cfg.dataset.regime);
        test = load_dataset(cfg.prepare.raw_test, cfg.dataset.regime);
        test.split = Split::test;
        const double vf = cfg.prepare.validation_fraction;
        if (vf > 0.0 && full_train.size() > 1) {
            const std::size_t n_val = static_cast<std::size_t>(vf * static_cast<double>(full_train.size()));
            const std::size_t n_train = full_train.size() - n_val;
            Dataset tr, va;
            tr.name = full_train.name;
            tr.regime = full_train.regime;
            va.name = full_train.name;
            va.regime = full_train.regime;
            va.split = Split::validation;
            for (std::size_t i = 0; i < full_train.size(); ++i) {
                (i < n_train ? tr : va).problems.push_back(full_train.problems[i]);
            }
            train = std::move(tr);
            validation = std::move(va);
        } else {
            train = std::move(full_train);
        }
    } else {
        throw ConfigError("prepare: configure either a synthetic recipe or raw corpus paths");
    }

    save_dataset(train, paths.split_file("train"));
    save_dataset(validation, paths.split_file("validation"));
    save_dataset(test, paths.split_file("test"));

    json m;
    m["counts"] = {{"train", train.size()}, {"validation", validation.size()}, {"test", test.size()}};
    m["fingerprints"] = {{"train", dataset_fingerprint(train)},
                         {"validation", dataset_fingerprint(validation)},
                         {"test", dataset_fingerprint(test)}};
    m["regime"] = to_string(cfg.dataset.regime);
    write_manifest((fs::path(paths.data_dir) / "prepare_manifest.json").string(), m, cfg);
}

void cmd_annotate(const RunConfig& cfg) {
    const RunPaths paths = RunPaths::under(cfg.out_dir);
    require_fresh(read_manifest((fs::path(paths.data_dir) / "prepare_manifest.json").string()), cfg,
                  "prepared data");

    const PromptTemplate tmpl = annotation_template(cfg);
    AnnotationCache cache(cfg.annotate.cache_dir);
    AnnotatorOptions opt;
    opt.max_retries = cfg.annotate.max_retries;
    opt.base_temperature = cfg.annotate.base_temperature;
    opt.retry_temperature = cfg.annotate.retry_temperature;
    opt.max_tokens = cfg.annotate.max_tokens;
    opt.seed = cfg.seed;
    opt.cache = cache.enabled() ? &cache : nullptr;

    json stats_json;
    const Regime regime = cfg.dataset.regime;
    for (const auto& split : cfg.annotate.splits) {
        const Dataset d = load_dataset(paths.split_file(split), regime);
        if (d.problems.empty()) {
            save_annotated_dataset(AnnotatedDataset{d, {}, {}}, paths.annotated_file(split));
            stats_json[split] = {{"total", 0}, {"accepted", 0}, {"teacher_calls", 0}};
            continue;
        }
        auto teacher = make_teacher(cfg, d);
        AnnotateStats stats;
        const AnnotatedDataset annotated =
            annotate_dataset(d, cfg.annotate.mode, *teacher, tmpl, opt, &stats, cfg.annotate.parallelism);
        save_annotated_dataset(annotated, paths.annotated_file(split));

        json hist;
        for (const auto& [attempts, count] : stats.attempts_histogram) {
            hist[std::to_string(attempts)] = count;
        }
        stats_json[split] = {{"total", stats.total},
                             {"accepted", stats.accepted},
                             {"acceptance_rate", stats.acceptance_rate()},
                             {"attempts_histogram", hist},
                             {"teacher_calls", stats.teacher_calls}};
    }
    json m;
    m["mode"] = to_string(cfg.annotate.mode);
    m["stats"] = stats_json;
    write_manifest((fs::path(paths.data_dir) / "annotate_manifest.json").string(), m, cfg);
}

void cmd_train(const RunConfig& cfg) {
    const RunPaths paths = RunPaths::under(cfg.out_dir);
    require_fresh(read_manifest((fs::path(paths.data_dir) / "annotate_manifest.json").string()), cfg,
                  "annotated data");
    fs::create_directories(paths.models_dir);

    const AnnotatedDataset train_data =
        load_annotated_dataset(paths.annotated_file("train"), cfg.dataset.regime);
    AnnotatedDataset val_data;
    if (fs::exists(paths.annotated_file("validation"))) {
        val_data = load_annotated_dataset(paths.annotated_file("validation"), cfg.dataset.regime);
    }

    if (cfg.train_entries.empty()) throw ConfigError("train: no train entries configured");
    for (const auto& entry : cfg.train_entries) {
        auto backend = make_backend(entry.backend, train_data.base, std::nullopt);
        TrainRunOptions opts;
        opts.qg_guidance = entry.qg_guidance;
        opts.guidance_kind = entry.guidance_kind;
        TrainResult result = train(entry.config, train_data, val_data, *backend, entry.hyperparams, opts);

        const std::string ckpt = checkpoint_path(paths, entry.config);
        backend->save(result.model, ckpt);
        result.manifest.checkpoint_path = ckpt;

        json m = json::parse(result.manifest.to_json());
        m["backend"] = entry.backend;
        write_manifest(train_manifest_path(paths, entry.config), m, cfg);
    }
}

namespace {

ModelHandle load_checkpoint(const RunConfig& cfg, const RunPaths& paths, StudentBackend& backend,
                            TrainConfig config) {
    const json manifest = read_manifest(train_manifest_path(paths, config));
    require_fresh(manifest, cfg, "checkpoint for '" + to_string(config) + "'");
    return backend.load(manifest.value("checkpoint_path", checkpoint_path(paths, config)));
}

} // namespace

void cmd_infer(const RunConfig& cfg) {
    const RunPaths paths = RunPaths::under(cfg.out_dir);
    fs::create_directories(paths.traces_dir);

    const Dataset gold = load_dataset(paths.split_file(cfg.infer.split), cfg.dataset.regime);
    auto backend = make_backend(cfg.infer.backend, gold, cfg.infer.corrupt_step);

    SamplingConfig sampling = cfg.infer.sampling;
    std::vector<InferenceTrace> traces;
    traces.reserve(gold.size());

    if (cfg.infer.mode == InferMode::iterative) {
        ModelHandle qg = load_checkpoint(cfg, paths, *backend, TrainConfig::qg);
        ModelHandle qa = load_checkpoint(cfg, paths, *backend, TrainConfig::iterative_qa);
        std::optional<ModelHandle> guide;
        if (cfg.infer.guidance) {
            guide = load_checkpoint(cfg, paths, *backend, TrainConfig::guidance);
        }
        for (const auto& p : gold.problems) {
            traces.push_back(infer_iterative(p, qg, qa, *backend, sampling,
                                             guide ? &*guide : nullptr, cfg.infer.max_steps));
        }
    } else {
        const TrainConfig source = cfg.infer.mode == InferMode::unified     ? TrainConfig::unified
                                   : cfg.infer.mode == InferMode::cot       ? TrainConfig::cot
                                                                            : TrainConfig::answer_only;
        ModelHandle m = load_checkpoint(cfg, paths, *backend, source);
        for (const auto& p : gold.problems) {
            if (cfg.infer.mode == InferMode::unified) {
                traces.push_back(infer_unified(p, m, *backend, sampling));
            } else if (cfg.infer.mode == InferMode::cot) {
                traces.push_back(infer_cot(p, m, *backend, sampling));
            } else {
                traces.push_back(infer_answer_only(p, m, *backend, sampling));
            }
        }
    }

    const std::string trace_file =
        (fs::path(paths.traces_dir) / (to_string(cfg.infer.mode) + ".jsonl")).string();
    write_traces(traces, trace_file);

    json m;
    m["mode"] = to_string(cfg.infer.mode);
    m["split"] = cfg.infer.split;
    m["n_traces"] = traces.size();
    m["trace_file"] = trace_file;
    write_manifest((fs::path(paths.traces_dir) / "infer_manifest.json").string(), m, cfg);
}

void cmd_eval(const RunConfig& cfg) {
    const RunPaths paths = RunPaths::under(cfg.out_dir);
    fs::create_directories(paths.eval_dir);

    const json infer_manifest = read_manifest((fs::path(paths.traces_dir) / "infer_manifest.json").string());
    require_fresh(infer_manifest, cfg, "traces");

    // Stage isolation: only the trace file and the gold split are read.
    const Dataset gold = load_dataset(paths.split_file(cfg.infer.split), cfg.dataset.regime);
    const auto traces = read_traces(infer_manifest.at("trace_file").get<std::string>());

    EvalReport report = score_accuracy(traces, gold);
    report.dataset = cfg.dataset.name;

    if (cfg.eval.qg_metrics) {
        std::vector<std::string> cand, ref;
        std::vector<std::vector<std::string>> cand_lists, ref_lists;
        for (const auto& t : traces) {
            const Problem* p = gold.find(t.problem_id);
            if (p == nullptr || !p->gold_subquestions) continue;
            std::string c, r;
            for (std::size_t i = 0; i < t.generated_questions.size(); ++i) {
                if (i > 0) c += " ";
                c += t.generated_questions[i];
            }
            for (std::size_t i = 0; i < p->gold_subquestions->size(); ++i) {
                if (i > 0) r += " ";
                r += (*p->gold_subquestions)[i];
            }
            cand.push_back(c);
            ref.push_back(r);
            cand_lists.push_back(t.generated_questions);
            ref_lists.push_back(*p->gold_subquestions);
        }
        if (!cand.empty()) {
            QgMetrics qg;
            qg.bleu = score_bleu(cand, ref);
            qg.q_count_match = score_q_count_match(cand_lists, ref_lists);
            TokenOverlapScorer scorer;
            qg.embed_f1 = score_embed_f1(cand, ref, scorer);
            report.qg_metrics = qg;
        }
    }

    const std::string report_path =
        (fs::path(paths.eval_dir) / ("report_" + report.mode + ".json")).string();
    {
        std::ofstream out(report_path);
        if (!out) throw ConfigError("cannot write eval report: " + report_path);
        out << report.to_json() << "\n";
    }
    {
        std::ofstream out((fs::path(paths.eval_dir) / ("table_" + report.mode + ".txt")).string());
        out << render_table({report}, TableFormat::text);
    }
    {
        std::ofstream out((fs::path(paths.eval_dir) / ("table_" + report.mode + ".csv")).string());
        out << render_table({report}, TableFormat::csv);
    }
    json m;
    m["report"] = report_path;
    m["accuracy"] = report.accuracy;
    write_manifest((fs::path(paths.eval_dir) / "eval_manifest.json").string(), m, cfg);
}

std::string cmd_report(const RunConfig& cfg) {
    const RunPaths paths = RunPaths::under(cfg.out_dir);
    std::vector<EvalReport> reports;
    if (fs::exists(paths.eval_dir)) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(paths.eval_dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".json") {
                files.push_back(entry.path().string());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::ifstream in(f);
            std::ostringstream body;
            body << in.rdbuf();
            reports.push_back(EvalReport::from_json(body.str()));
        }
    }
    if (reports.empty()) throw ConfigError("report: no eval reports under " + paths.eval_dir);
    const std::string table = render_table(reports, TableFormat::text);
    std::ofstream out((fs::path(paths.eval_dir) / "summary.txt").string());
    out << table;
    std::ofstream csv((fs::path(paths.eval_dir) / "summary.csv").string());
    csv << render_table(reports, TableFormat::csv);
    return table;
}

} // namespace distill
