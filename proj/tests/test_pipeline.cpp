#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "distill/calc.hpp"
#include "distill/dataset_io.hpp"
#include "distill/errors.hpp"
#include "distill/extract.hpp"
#include "distill/metrics.hpp"
#include "distill/pipeline.hpp"
#include "distill/synthetic.hpp"
#include "distill/teacher_http.hpp"
#include "support.hpp"

using namespace distill;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

std::string write_config(const TempDir& tmp, const std::string& out_dir, std::uint64_t seed,
                         const std::string& extra_infer = "") {
    const std::string config = R"({
  "seed": )" + std::to_string(seed) +
                               R"(,
  "out_dir": ")" + out_dir +
                               R"(",
  "dataset": {"name": "synthetic", "regime": "step_by_step"},
  "prepare": {"synthetic": {"train": 20, "validation": 4, "test": 12, "min_steps": 2, "max_steps": 3}},
  "teacher": {"kind": "oracle", "correct_prob": 1.0},
  "annotate": {"mode": "socratic", "max_retries": 3, "cache_dir": ")" +
                               out_dir + R"(/cache"},
  "train": [
    {"config": "qg", "backend": "oracle", "hyperparams": {"iterations": 1, "eval_every": 1, "max_seq_len": 4096}},
    {"config": "iterative_qa", "backend": "oracle", "hyperparams": {"iterations": 1, "eval_every": 1, "max_seq_len": 4096}}
  ],
  "infer": {"mode": "iterative", "backend": "oracle", "max_steps": 8)" +
                               extra_infer + R"(},
  "eval": {"qg_metrics": true}
})";
    static int counter = 0;
    const std::string path = tmp.file("config" + std::to_string(counter++) + ".json");
    write_file(path, config);
    return path;
}

} // namespace

TEST_CASE("synthetic problems carry verifiable chains and consistent answers") {
    SyntheticSpec spec;
    spec.count = 100;
    spec.min_steps = 1;
    spec.max_steps = 4;
    spec.seed = 13;
    const Dataset d = generate_synthetic(spec);
    REQUIRE(d.size() == 100);

    for (const auto& p : d.problems) {
        REQUIRE(p.gold_steps);
        REQUIRE(p.gold_subquestions);
        CHECK(p.gold_steps->size() == p.gold_subquestions->size());
        CHECK(!p.text.empty());

        // Every calc annotation checks out, and the final step carries the
        // gold answer.
        std::string joined;
        for (const auto& s : *p.gold_steps) joined += s + " ";
        const CalcReport report = verify_calc_annotations(joined);
        CHECK(report.total == static_cast<int>(p.gold_steps->size()));
        CHECK(report.valid == report.total);

        auto final = extract_final_answer(p.gold_steps->back(), AnswerKind::numeric);
        REQUIRE(final);
        CHECK(answers_equal(*final, p.gold_answer));
    }

    // Same seed, same corpus; different seed, different corpus.
    const Dataset again = generate_synthetic(spec);
    REQUIRE(again.size() == d.size());
    CHECK(again.problems[0].text == d.problems[0].text);
    SyntheticSpec other = spec;
    other.seed = 14;
    CHECK(generate_synthetic(other).problems[0].text != d.problems[0].text);
}

TEST_CASE("run config round-trips and hashes stably") {
    TempDir tmp;
    const std::string path = write_config(tmp, tmp.file("out"), 7);
    const RunConfig cfg = RunConfig::load(path);
    CHECK(cfg.seed == 7);
    CHECK(cfg.dataset.regime == Regime::step_by_step);
    CHECK(cfg.annotate.mode == AnnotationMode::socratic);
    REQUIRE(cfg.train_entries.size() == 2);
    CHECK(cfg.train_entries[0].config == TrainConfig::qg);
    CHECK(cfg.infer.mode == InferMode::iterative);

    const RunConfig cfg2 = RunConfig::load(path);
    CHECK(cfg.config_hash() == cfg2.config_hash());

    const std::string other_path = write_config(tmp, tmp.file("out"), 8);
    CHECK(RunConfig::load(other_path).config_hash() != cfg.config_hash());
}

TEST_CASE("full pipeline on synthetic data: perfect oracle reaches accuracy 1.0") {
    TempDir tmp;
    const std::string out_dir = tmp.file("run");
    const RunConfig cfg = RunConfig::load(write_config(tmp, out_dir, 3));

    cmd_prepare(cfg);
    const RunPaths paths = RunPaths::under(out_dir);
    const Dataset train = load_dataset(paths.split_file("train"), Regime::step_by_step);
    const Dataset test = load_dataset(paths.split_file("test"), Regime::step_by_step);
    CHECK(train.size() == 20);
    CHECK(test.size() == 12);

    cmd_annotate(cfg);
    const AnnotatedDataset annotated =
        load_annotated_dataset(paths.annotated_file("train"), Regime::step_by_step);
    CHECK(annotated.annotations.size() == 20); // perfect teacher annotates everything

    cmd_train(cfg);
    cmd_infer(cfg);
    cmd_eval(cfg);

    const std::string report_json = read_file((fs::path(paths.eval_dir) / "report_iterative.json").string());
    const auto report = EvalReport::from_json(report_json);
    CHECK(report.accuracy == doctest::Approx(1.0));
    CHECK(report.n_problems == 12);
    REQUIRE(report.qg_metrics);
    CHECK(report.qg_metrics->bleu == doctest::Approx(100.0));
    CHECK(report.qg_metrics->q_count_match == doctest::Approx(1.0));

    const std::string table = cmd_report(cfg);
    CHECK(table.find("synthetic") != std::string::npos);
    CHECK(table.find("100.00") != std::string::npos);
}

TEST_CASE("annotation cache makes a rerun touch the teacher zero times") {
    TempDir tmp;
    const std::string out_dir = tmp.file("run");
    const RunConfig cfg = RunConfig::load(write_config(tmp, out_dir, 5));
    cmd_prepare(cfg);

    cmd_annotate(cfg);
    const RunPaths paths = RunPaths::under(out_dir);
    const auto manifest1 =
        nlohmann::json::parse(read_file((fs::path(paths.data_dir) / "annotate_manifest.json").string()));
    CHECK(manifest1["stats"]["train"]["teacher_calls"].get<long>() > 0);

    cmd_annotate(cfg); // same cache directory
    const auto manifest2 =
        nlohmann::json::parse(read_file((fs::path(paths.data_dir) / "annotate_manifest.json").string()));
    CHECK(manifest2["stats"]["train"]["teacher_calls"].get<long>() == 0);
    CHECK(manifest2["stats"]["train"]["accepted"] == manifest1["stats"]["train"]["accepted"]);
}

TEST_CASE("stage isolation and staleness errors") {
    TempDir tmp;
    const std::string out_dir = tmp.file("run");
    const RunConfig cfg = RunConfig::load(write_config(tmp, out_dir, 9));

    // Inference without checkpoints: staleness.
    cmd_prepare(cfg);
    CHECK_THROWS_AS(cmd_infer(cfg), StalenessError);

    cmd_annotate(cfg);
    cmd_train(cfg);
    cmd_infer(cfg);
    cmd_eval(cfg);

    // A config with a different seed must refuse the existing artifacts.
    const RunConfig other = RunConfig::load(write_config(tmp, out_dir, 10));
    CHECK_THROWS_AS(cmd_annotate(other), StalenessError);
    CHECK_THROWS_AS(cmd_train(other), StalenessError);
    CHECK_THROWS_AS(cmd_eval(other), StalenessError);
}

TEST_CASE("two identical mock-backend runs produce byte-identical traces and reports") {
    TempDir tmp;
    const std::string out_a = tmp.file("a");
    const std::string out_b = tmp.file("b");
    const RunConfig cfg_a = RunConfig::load(write_config(tmp, out_a, 21));
    const RunConfig cfg_b = RunConfig::load(write_config(tmp, out_b, 21));

    for (const auto* cfg : {&cfg_a, &cfg_b}) {
        cmd_prepare(*cfg);
        cmd_annotate(*cfg);
        cmd_train(*cfg);
        cmd_infer(*cfg);
        cmd_eval(*cfg);
    }
    const RunPaths pa = RunPaths::under(out_a);
    const RunPaths pb = RunPaths::under(out_b);
    CHECK(read_file((fs::path(pa.traces_dir) / "iterative.jsonl").string()) ==
          read_file((fs::path(pb.traces_dir) / "iterative.jsonl").string()));
    CHECK(read_file((fs::path(pa.eval_dir) / "report_iterative.json").string()) ==
          read_file((fs::path(pb.eval_dir) / "report_iterative.json").string()));
}

TEST_CASE("canonical raw corpora split sequentially through prepare") {
    TempDir tmp;
    // 20 boolean problems with facts, StrategyQA-shaped.
    Dataset raw;
    raw.name = "strategy";
    raw.regime = Regime::supporting_facts;
    for (int i = 0; i < 20; ++i) {
        Problem p;
        p.id = "q" + std::to_string(i);
        p.text = "Question " + std::to_string(i) + "?";
        p.gold_answer = Answer::boolean(i % 2 == 0);
        p.gold_facts = {{"Fact for " + std::to_string(i) + "."}};
        p.gold_subquestions = {{"Sub for " + std::to_string(i) + "?"}};
        raw.problems.push_back(p);
    }
    const std::string raw_path = tmp.file("strategy.jsonl");
    save_dataset(raw, raw_path);

    const std::string out_dir = tmp.file("out");
    const std::string config = R"({
  "seed": 1,
  "out_dir": ")" + out_dir + R"(",
  "dataset": {"name": "strategy", "regime": "supporting_facts"},
  "prepare": {"raw_kind": "canonical", "raw_all": ")" + raw_path + R"("},
  "teacher": {"kind": "oracle"},
  "annotate": {"mode": "facts_from_questions", "splits": ["train"]},
  "train": [{"config": "cot", "backend": "oracle", "hyperparams": {"iterations": 1, "eval_every": 1, "max_seq_len": 4096}}],
  "infer": {"mode": "cot", "backend": "oracle"},
  "eval": {}
})";
    const std::string cfg_path = tmp.file("strategy_config.json");
    write_file(cfg_path, config);
    const RunConfig cfg = RunConfig::load(cfg_path);

    cmd_prepare(cfg);
    const RunPaths paths = RunPaths::under(out_dir);
    const Dataset train = load_dataset(paths.split_file("train"), Regime::supporting_facts);
    const Dataset val = load_dataset(paths.split_file("validation"), Regime::supporting_facts);
    const Dataset test = load_dataset(paths.split_file("test"), Regime::supporting_facts);
    CHECK(train.size() == 16);
    CHECK(val.size() == 2);
    CHECK(test.size() == 2);
    CHECK(train.problems[0].id == "q0"); // order preserved, no shuffling
    CHECK(test.problems[1].id == "q19");

    // The boolean regime flows through annotate -> train -> infer -> eval.
    cmd_annotate(cfg);
    cmd_train(cfg);
    cmd_infer(cfg);
    cmd_eval(cfg);
    const auto report = EvalReport::from_json(
        read_file((fs::path(paths.eval_dir) / "report_cot.json").string()));
    CHECK(report.accuracy == doctest::Approx(1.0));
}

TEST_CASE("http teacher speaks the completion protocol against a local server") {
    httplib::Server server;
    std::string seen_auth;
    std::string seen_model;
    std::string seen_prompt;
    server.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        const auto body = nlohmann::json::parse(req.body);
        seen_model = body.value("model", "");
        seen_prompt = body.value("prompt", "");
        nlohmann::json out;
        out["choices"] = {{{"text", "The answer is 3."}}};
        res.set_content(out.dump(), "application/json");
    });
    server.Post("/flaky", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    server.Post("/reject", [](const httplib::Request&, httplib::Response& res) { res.status = 401; });

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&server]() { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("DISTILL_TEST_TOKEN", "sekrit", 1);
    HttpTeacherConfig http;
    http.base_url = "http://127.0.0.1:" + std::to_string(port);
    http.model = "teacher-xl";
    http.auth_env = "DISTILL_TEST_TOKEN";

    HttpTeacherClient client(http);
    SamplingConfig sampling;
    sampling.max_tokens = 64;
    const std::string completion = client.complete("Q: two plus one?", sampling);
    CHECK(completion == "The answer is 3.");
    CHECK(seen_auth == "Bearer sekrit");
    CHECK(seen_model == "teacher-xl");
    CHECK(seen_prompt == "Q: two plus one?");

    HttpTeacherConfig flaky = http;
    flaky.path = "/flaky";
    HttpTeacherClient flaky_client(flaky);
    CHECK_THROWS_AS(flaky_client.complete("x", sampling), TransportError);

    HttpTeacherConfig reject = http;
    reject.path = "/reject";
    HttpTeacherClient reject_client(reject);
    CHECK_THROWS_AS(reject_client.complete("x", sampling), AnnotationError);

    HttpTeacherConfig dead = http;
    dead.base_url = "http://127.0.0.1:1";
    dead.timeout_seconds = 1;
    HttpTeacherClient dead_client(dead);
    CHECK_THROWS_AS(dead_client.complete("x", sampling), TransportError);

    server.stop();
    server_thread.join();
}
