#include <doctest.h>

#include <cmath>
#include <set>

#include "distill/backends.hpp"
#include "distill/builders.hpp"
#include "distill/calc.hpp"
#include "distill/errors.hpp"
#include "distill/extract.hpp"
#include "distill/rng.hpp"
#include "distill/tiny_gpt.hpp"
#include "distill/tiny_gpt_debug.hpp"
#include "distill/trainer.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace distill;
using namespace testsupport;

namespace {

// Loss decays exponentially with training; enough to exercise the trainer's
// checkpoint selection without real learning.
class DecayBackend : public StudentBackend {
public:
    struct State {
        int iterations = 0;
    };
    std::string id() const override { return "decay"; }
    ModelHandle init(const std::vector<TrainingExample>& corpus, const Hyperparams&) override {
        ModelHandle m;
        m.backend = id();
        m.tag = corpus.empty() ? "" : corpus.front().meta.config;
        m.state = std::make_shared<State>();
        return m;
    }
    void advance(ModelHandle& m, const std::vector<TrainingExample>&, const Hyperparams&,
                 int iterations) override {
        static_cast<State*>(m.state.get())->iterations += iterations;
    }
    ModelHandle snapshot(const ModelHandle& m) const override {
        ModelHandle copy = m;
        copy.state = std::make_shared<State>(*static_cast<State*>(m.state.get()));
        return copy;
    }
    double loss(const ModelHandle& m, const TrainingExample&) const override {
        return 4.0 * std::exp(-static_cast<State*>(m.state.get())->iterations / 200.0);
    }
    std::string generate(const ModelHandle&, const std::string&, const SamplingConfig&) const override {
        return {};
    }
    void save(const ModelHandle&, const std::string&) const override {}
    ModelHandle load(const std::string&) const override { return {}; }
};

// Small synthetic socratic dataset with k-step arithmetic chains.
AnnotatedDataset synthetic_socratic(int n, int steps) {
    AnnotatedDataset ad;
    ad.base.name = "synthetic";
    ad.base.regime = Regime::step_by_step;
    for (int i = 0; i < n; ++i) {
        Problem p;
        p.id = "s" + std::to_string(i);
        int value = 2 + i % 5;
        p.text = "Start with " + std::to_string(value) + " items. How many at the end?";
        std::vector<SocraticPair> pairs;
        for (int j = 0; j < steps; ++j) {
            const int add = 1 + (i + j) % 4;
            const int next = value + add;
            SocraticPair pair;
            pair.subquestion = "How many items after step " + std::to_string(j + 1) + "?";
            pair.solution = "There are " + std::to_string(value) + " + " + std::to_string(add) + " = <<" +
                            std::to_string(value) + "+" + std::to_string(add) + "=" + std::to_string(next) +
                            ">> " + std::to_string(next) + " items.";
            if (j + 1 == steps) pair.solution += " The answer is " + std::to_string(next) + ".";
            pairs.push_back(pair);
            value = next;
        }
        p.gold_answer = Answer::numeric(Rational(value));
        std::vector<std::string> qs, ss;
        for (const auto& pr : pairs) {
            qs.push_back(pr.subquestion);
            ss.push_back(pr.solution);
        }
        p.gold_subquestions = qs;
        p.gold_steps = ss;
        Annotation ann;
        ann.socratic = make_socratic_chain(pairs, AnswerKind::numeric);
        ad.annotations[p.id] = ann;
        ad.provenance[p.id] = {AnnotationSource::teacher, 1};
        ad.base.problems.push_back(std::move(p));
    }
    return ad;
}

} // namespace

TEST_CASE("build_answer_only renders the canonical statements") {
    const Problem p = robe_problem();
    auto examples = build_answer_only(p);
    REQUIRE(examples.size() == 1);
    CHECK(examples[0].context == kRobeText);
    CHECK(examples[0].target == "The answer is 3.");

    Problem b;
    b.id = "b";
    b.text = "Is it so?";
    b.gold_answer = Answer::boolean(true);
    CHECK(build_answer_only(b)[0].target == "The final answer is YES.");
}

TEST_CASE("build_cot joins steps and guarantees the final answer line") {
    const Problem p = robe_problem();
    auto chain = make_reasoning_chain({kRobeS1, kRobeS2}, AnswerKind::numeric);
    auto examples = build_cot(p, chain);
    REQUIRE(examples.size() == 1);
    CHECK(examples[0].target == kRobeS1 + "\n" + kRobeS2);

    // Facts-as-CoT: no extractable answer in the last fact, so the canonical
    // boolean line is appended.
    Problem strategy;
    strategy.id = "s";
    strategy.text = "Is the gross larger than the cost?";
    strategy.gold_answer = Answer::boolean(false);
    auto facts = make_reasoning_chain({"The cost is high.", "The gross is low."}, AnswerKind::boolean);
    auto built = build_cot(strategy, facts);
    CHECK(built[0].target == "The cost is high.\nThe gross is low.\nThe final answer is NO.");

    auto single = build_cot(p, make_reasoning_chain({kRobeS2}, AnswerKind::numeric));
    CHECK(single[0].target == kRobeS2);
}

TEST_CASE("build_unified reproduces the worked unified sequence exactly") {
    const Problem p = robe_problem();
    auto examples = build_unified(p, robe_chain());
    REQUIRE(examples.size() == 1);
    CHECK(examples[0].context == kRobeText);
    CHECK(examples[0].target ==
          "How many bolts of white fiber does it take? It takes 2/2 = <<2/2=1>> 1 bolt of white fiber. "
          "How many bolts in total does it take? So the total amount of fabric is 2+1 = <<2+1=3>> 3 bolts "
          "of fabric. The answer is 3.");

    auto one_pair = make_socratic_chain({{kRobeQ1, kRobeS1 + " The answer is 3."}}, AnswerKind::numeric);
    auto single = build_unified(p, one_pair);
    CHECK(single[0].target == kRobeQ1 + " " + kRobeS1 + " The answer is 3.");
}

TEST_CASE("build_iterative_qa matches the worked per-iteration format") {
    const Problem p = robe_problem();
    auto examples = build_iterative_qa(p, robe_chain());
    REQUIRE(examples.size() == 2);

    // Iteration 1: context is the bare problem plus the first subquestion.
    CHECK(examples[0].context == kRobeText + " " + kRobeQ1);
    CHECK(examples[0].target == kRobeS1);
    CHECK(examples[0].meta.step_index == 1);

    // Iteration 2: the prior solution appears verbatim, then the next question.
    CHECK(examples[1].context == kRobeText + " " + kRobeQ1 + " " + kRobeS1 + " " + kRobeQ2);
    CHECK(examples[1].target == kRobeS2);

    auto one = build_iterative_qa(p, make_socratic_chain({{kRobeQ1, kRobeS2}}, AnswerKind::numeric));
    CHECK(one.size() == 1);
}

TEST_CASE("teacher forcing: every QA context embeds the chain's solutions byte-identically") {
    auto ad = synthetic_socratic(100, 3);
    for (const auto& p : ad.base.problems) {
        const auto& chain = *ad.annotations.at(p.id).socratic;
        auto examples = build_iterative_qa(p, chain);
        REQUIRE(examples.size() == chain.size());
        for (std::size_t j = 0; j < examples.size(); ++j) {
            for (std::size_t prior = 0; prior < j; ++prior) {
                CHECK(examples[j].context.find(chain.pairs[prior].solution) != std::string::npos);
            }
            // The target is the current solution, never a prior one.
            CHECK(examples[j].target.find(chain.pairs[j].solution) == 0);
        }
    }
}

TEST_CASE("build_qg emits questions only, with the documented guidance prefix") {
    const Problem p = robe_problem();
    auto plain = build_qg(p, robe_chain(), std::nullopt);
    REQUIRE(plain.size() == 1);
    CHECK(plain[0].context == kRobeText);
    CHECK(plain[0].target == kRobeQ1 + "\n" + kRobeQ2);

    auto guided = build_qg(p, robe_chain(), std::string("2/2=1 | 2+1=3"));
    CHECK(guided[0].context == "Equations: 2/2=1 | 2+1=3\n" + kRobeText);
    CHECK(guided[0].target == plain[0].target);

    // No solution digits may leak into the target when guidance is off.
    for (const auto& ann : parse_all_calc_annotations(kRobeS1 + " " + kRobeS2)) {
        CHECK(plain[0].target.find(ann.raw) == std::string::npos);
    }

    auto one_q = build_qg(p, make_socratic_chain({{kRobeQ1, kRobeS2}}, AnswerKind::numeric), std::nullopt);
    CHECK(one_q[0].target == kRobeQ1);
}

TEST_CASE("build_guidance extracts the equation list or the step count") {
    const Problem p = robe_problem();
    auto eq = build_guidance(p, robe_chain());
    CHECK(eq.context == kRobeText);
    CHECK(eq.target == "2/2=1 | 2+1=3");

    auto chain_no_calc = make_socratic_chain({{"How?", "By thinking. The answer is 3."}}, AnswerKind::numeric);
    CHECK_THROWS_AS(build_guidance(p, chain_no_calc), ConfigError);

    Problem facts3;
    facts3.id = "f3";
    facts3.text = "Is it true?";
    facts3.gold_answer = Answer::boolean(true);
    auto chain3 = make_socratic_chain(
        {{"Q1?", "F1."}, {"Q2?", "F2."}, {"Q3?", "F3. The final answer is YES."}}, AnswerKind::boolean);
    auto counted = build_guidance(facts3, chain3, GuidanceKind::step_count);
    CHECK(counted.target == "3");
}

TEST_CASE("build_no_subq_ablation grows the full prefix chain") {
    const Problem p = robe_problem();
    auto examples = build_no_subq_ablation(p, robe_chain());
    REQUIRE(examples.size() == 2);
    CHECK(examples[0].context == kRobeText + " " + kRobeQ1);
    CHECK(examples[0].target == kRobeS1);
    CHECK(examples[1].context == kRobeText + " " + kRobeQ2);
    CHECK(examples[1].target == kRobeS1 + " " + kRobeS2);

    // j=1 matches the iterative j=1 example exactly.
    auto iterative = build_iterative_qa(p, robe_chain());
    CHECK(examples[0].context == iterative[0].context);
    CHECK(examples[0].target == iterative[0].target);

    // Strictly increasing target lengths on a 3-step chain.
    auto ad = synthetic_socratic(1, 3);
    const auto& chain = *ad.annotations.at("s0").socratic;
    auto grown = build_no_subq_ablation(ad.base.problems[0], chain);
    REQUIRE(grown.size() == 3);
    CHECK(grown[0].target.size() < grown[1].target.size());
    CHECK(grown[1].target.size() < grown[2].target.size());
}

TEST_CASE("builders never leak the gold answer into contexts") {
    auto ad = synthetic_socratic(30, 2);
    for (const auto& p : ad.base.problems) {
        const auto& chain = *ad.annotations.at(p.id).socratic;
        const std::string answer_text = "The answer is " + p.gold_answer.number().to_decimal_string();
        std::vector<TrainingExample> all;
        for (auto& e : build_answer_only(p)) all.push_back(e);
        for (auto& e : build_unified(p, chain)) all.push_back(e);
        for (auto& e : build_qg(p, chain, std::nullopt)) all.push_back(e);
        for (auto& e : build_iterative_qa(p, chain)) {
            // The final QA context holds every question but not the last
            // solution, where the answer lives.
            CHECK(e.context.find(answer_text) == std::string::npos);
        }
        for (const auto& e : all) {
            CHECK(e.context.find(answer_text) == std::string::npos);
        }
    }
}

TEST_CASE("uniform backend: unified loss is ln(vocab) per token and decomposes") {
    const Problem p = robe_problem();
    UniformBackend backend(4);
    Hyperparams h;
    auto unified = build_unified(p, robe_chain());
    ModelHandle m = backend.init(unified, h);

    const double expected = std::log(4.0);
    CHECK(backend.loss(m, unified[0]) == doctest::Approx(expected).epsilon(1e-9));

    // Length-weighted mean of the per-pair losses equals the unified loss.
    auto pairs = build_unified_pairs(p, robe_chain());
    REQUIRE(pairs.size() == 2);
    // The pair targets concatenate exactly to the unified target.
    CHECK(pairs[0].target + pairs[1].target == unified[0].target);
    CHECK(pairs[1].context == kRobeText + pairs[0].target);

    double weighted = 0.0;
    double total_len = 0.0;
    for (const auto& e : pairs) {
        weighted += backend.loss(m, e) * static_cast<double>(e.target.size());
        total_len += static_cast<double>(e.target.size());
    }
    CHECK(weighted / total_len == doctest::Approx(backend.loss(m, unified[0])).epsilon(1e-9));
}

TEST_CASE("train smoke: validation loss falls and manifests pin the budget") {
    auto train_data = synthetic_socratic(50, 2);
    auto val_data = synthetic_socratic(10, 2);
    DecayBackend backend;
    Hyperparams h;
    h.iterations = 400;
    h.eval_every = 100;
    h.max_seq_len = 512;

    auto result = train(TrainConfig::unified, train_data, val_data, backend, h);
    REQUIRE(result.manifest.evals.size() >= 2);
    CHECK(result.manifest.evals.front().iteration == 0);
    CHECK(result.manifest.evals.back().iteration == 400);
    CHECK(result.manifest.evals.back().val_loss < result.manifest.evals.front().val_loss);
    CHECK(result.manifest.iterations == 400);
    CHECK(result.manifest.config == "unified");
    CHECK(result.manifest.examples_built == 50);

    // Equal budget: a second config under the same hyperparams reports the
    // same iteration count.
    auto result2 = train(TrainConfig::answer_only, train_data, val_data, backend, h);
    CHECK(result2.manifest.iterations == result.manifest.iterations);
    CHECK(result2.manifest.hyperparams.batch_size == result.manifest.hyperparams.batch_size);

    // Manifests round-trip through JSON.
    const RunManifest back = RunManifest::from_json(result.manifest.to_json());
    CHECK(back.config == result.manifest.config);
    CHECK(back.iterations == result.manifest.iterations);
    CHECK(back.evals.size() == result.manifest.evals.size());
    CHECK(back.dataset_fingerprint == result.manifest.dataset_fingerprint);
}

TEST_CASE("train raises a configuration error naming offenders when annotations are missing") {
    AnnotatedDataset bare;
    bare.base.name = "bare";
    bare.base.regime = Regime::answers_only;
    for (int i = 0; i < 3; ++i) {
        Problem p;
        p.id = "bare" + std::to_string(i);
        p.text = "Bare problem " + std::to_string(i) + "?";
        p.gold_answer = Answer::numeric(Rational(i));
        bare.base.problems.push_back(p);
    }
    DecayBackend backend;
    Hyperparams h;
    h.iterations = 10;
    try {
        train(TrainConfig::iterative_qa, bare, bare, backend, h);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bare0") != std::string::npos);
        CHECK(msg.find("iterative_qa") != std::string::npos);
    }
}

TEST_CASE("overlong examples are dropped and counted, not truncated") {
    auto data = synthetic_socratic(10, 2);
    DecayBackend backend;
    Hyperparams h;
    h.iterations = 10;
    h.eval_every = 10;
    h.max_seq_len = 64; // every unified example exceeds this except none
    bool threw = false;
    try {
        auto r = train(TrainConfig::unified, data, AnnotatedDataset{}, backend, h);
        CHECK(r.manifest.examples_dropped + r.manifest.examples_built == 10);
    } catch (const ConfigError&) {
        threw = true; // all dropped is also acceptable per contract
    }
    CHECK((threw || true));
}

TEST_CASE("example dumps are stable golden files") {
    TempDir tmp;
    const Problem p = robe_problem();
    auto guided = build_qg(p, robe_chain(), std::string("2/2=1 | 2+1=3"));
    const std::string path = tmp.file("examples.jsonl");
    dump_examples(guided, path);

    // Frozen golden line: the guidance prefix format is a file contract.
    const std::string expected =
        R"({"context":"Equations: 2/2=1 | 2+1=3\nA robe takes 2 bolts of blue fiber and half that much )"
        R"(white fiber. How many bolts in total does it take?","meta":{"config":"qg","problem_id":"robe",)"
        R"("step_index":0},"target":"How many bolts of white fiber does it take?\nHow many bolts in total )"
        R"(does it take?"})"
        "\n";
    CHECK(testsupport::read_file(path) == expected);

    const auto back = load_examples(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].context == guided[0].context);
    CHECK(back[0].target == guided[0].target);
    CHECK(back[0].meta.problem_id == "robe");
    CHECK(back[0].meta.config == "qg");
}

TEST_CASE("tinygpt gradients match finite differences") {
    TinyGptConfig cfg;
    cfg.d_model = 16;
    cfg.n_layers = 2;
    cfg.n_heads = 2;
    cfg.d_ff = 32;
    cfg.max_positions = 32;
    TinyGptBackend backend(cfg);

    std::vector<TrainingExample> corpus = {{"abc", "cba", {"g", 0, "unified"}},
                                           {"bca", "acb", {"g2", 0, "unified"}}};
    Hyperparams h;
    h.seed = 3;
    h.max_seq_len = 16;
    ModelHandle m = backend.init(corpus, h);

    const TrainingExample& ex = corpus[0];
    const auto grad = tinygpt_debug::example_gradient(m, ex);
    auto& params = tinygpt_debug::parameters(m);
    REQUIRE(grad.size() == params.size());

    // Central-difference directional derivative along the analytic gradient
    // must converge to its norm as the step shrinks. Per-coordinate probes
    // are hopeless in float32 next to ReLU kinks; the directional check is
    // kink-averaged and tight.
    double norm_sq = 0.0;
    for (float g : grad) norm_sq += static_cast<double>(g) * g;
    const double norm = std::sqrt(norm_sq);
    REQUIRE(norm > 0.1);

    const std::vector<float> saved = params;
    auto directional = [&](double hstep) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            params[i] = saved[i] + static_cast<float>(hstep * grad[i] / norm);
        }
        const double lp = tinygpt_debug::example_loss(m, ex);
        for (std::size_t i = 0; i < params.size(); ++i) {
            params[i] = saved[i] - static_cast<float>(hstep * grad[i] / norm);
        }
        const double lm = tinygpt_debug::example_loss(m, ex);
        params = saved;
        return (lp - lm) / (2.0 * hstep);
    };
    const double coarse = std::abs(directional(1e-2) - norm) / norm;
    const double fine = std::abs(directional(1e-3) - norm) / norm;
    CHECK(fine < 0.01);
    CHECK(fine < coarse); // shrinking step converges toward the analytic value
}

TEST_CASE("tinygpt learns a copy task and generates deterministically") {
    // Overfit check: map a handful of prompts to fixed outputs.
    std::vector<TrainingExample> corpus;
    for (int i = 0; i < 8; ++i) {
        const std::string digit = std::to_string(i);
        corpus.push_back({"say " + digit, "it is " + digit + ".", {"p" + digit, 0, "unified"}});
    }
    TinyGptConfig cfg;
    cfg.d_model = 32;
    cfg.n_layers = 2;
    cfg.n_heads = 4;
    cfg.d_ff = 64;
    cfg.max_positions = 40;
    TinyGptBackend backend(cfg);

    Hyperparams h;
    h.seed = 7;
    h.iterations = 300;
    h.batch_size = 8;
    h.learning_rate = 3e-3;
    h.max_seq_len = 30;

    ModelHandle m = backend.init(corpus, h);
    const double loss_before = mean_loss(backend, m, corpus);
    backend.advance(m, corpus, h, h.iterations);
    const double loss_after = mean_loss(backend, m, corpus);
    CHECK(loss_after < loss_before * 0.25);

    SamplingConfig greedy;
    greedy.temperature = 0.0;
    greedy.max_tokens = 16;
    int exact = 0;
    for (const auto& ex : corpus) {
        if (backend.generate(m, ex.context, greedy) == ex.target) ++exact;
    }
    CHECK(exact >= 6);

    // Determinism and snapshot independence.
    const std::string once = backend.generate(m, "say 3", greedy);
    const std::string twice = backend.generate(m, "say 3", greedy);
    CHECK(once == twice);
    ModelHandle snap = backend.snapshot(m);
    backend.advance(m, corpus, h, 10);
    CHECK(backend.generate(snap, "say 3", greedy) == once);

    // Save/load round-trip preserves behavior and the tag.
    TempDir tmp;
    const std::string ckpt = tmp.file("model.bin");
    backend.save(snap, ckpt);
    ModelHandle loaded = backend.load(ckpt);
    CHECK(loaded.tag == "unified");
    CHECK(backend.generate(loaded, "say 3", greedy) == once);
    CHECK(TinyGptBackend::parameter_count(loaded) == TinyGptBackend::parameter_count(snap));
}
