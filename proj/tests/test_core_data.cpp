#include <doctest.h>

#include <cstdlib>
#include <string>

#include "distill/data.hpp"
#include "distill/dataset_io.hpp"
#include "distill/errors.hpp"
#include "distill/rng.hpp"
#include "support.hpp"

using namespace distill;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

Dataset make_numeric_dataset(int n, Regime regime = Regime::step_by_step) {
    Dataset d;
    d.name = "fixture";
    d.regime = regime;
    for (int i = 0; i < n; ++i) {
        Problem p;
        p.id = "p" + std::to_string(i);
        p.text = "Problem number " + std::to_string(i) + "?";
        p.gold_answer = Answer::numeric(Rational(i));
        if (regime == Regime::step_by_step) {
            p.gold_steps = {{"First step for " + std::to_string(i) + ".",
                             "The answer is " + std::to_string(i) + "."}};
        } else if (regime == Regime::supporting_facts) {
            p.gold_facts = {{"Fact about " + std::to_string(i) + "."}};
        }
        d.problems.push_back(std::move(p));
    }
    return d;
}

} // namespace

TEST_CASE("loading two GSM8K-style records preserves order and steps") {
    TempDir tmp;
    const std::string path = tmp.file("two.jsonl");
    write_file(path,
               R"({"id": "a", "question": "Q one?", "answer": "3", "steps": ["s1", "The answer is 3."]})"
               "\n"
               R"({"id": "b", "question": "Q two?", "answer": "7", "steps": ["t1", "The answer is 7."]})"
               "\n");
    const Dataset d = load_dataset(path, Regime::step_by_step);
    REQUIRE(d.size() == 2);
    CHECK(d.problems[0].id == "a");
    CHECK(d.problems[1].id == "b");
    REQUIRE(d.problems[0].gold_steps);
    CHECK(d.problems[0].gold_steps->size() == 2);
    CHECK(d.problems[1].gold_answer.number() == Rational(7));
}

TEST_CASE("regime violations and schema violations carry line numbers") {
    TempDir tmp;
    const std::string path = tmp.file("bad.jsonl");
    write_file(path,
               R"({"id": "a", "question": "Q?", "answer": "true", "facts": ["f"]})"
               "\n"
               R"({"id": "b", "question": "Q?", "answer": "false"})"
               "\n");
    CHECK_THROWS_AS(load_dataset(path, Regime::supporting_facts), RegimeError);
    try {
        load_dataset(path, Regime::supporting_facts);
    } catch (const RegimeError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    const std::string broken = tmp.file("broken.jsonl");
    write_file(broken, "{\"id\": \"a\"\n");
    CHECK_THROWS_AS(load_dataset(broken, Regime::answers_only), ParseError);

    const std::string dup = tmp.file("dup.jsonl");
    write_file(dup,
               R"({"id": "a", "question": "Q?", "answer": "1"})"
               "\n"
               R"({"id": "a", "question": "Q?", "answer": "2"})"
               "\n");
    CHECK_THROWS_AS(load_dataset(dup, Regime::answers_only), ParseError);
}

TEST_CASE("boolean answers normalize from YES/NO/True/False") {
    TempDir tmp;
    const std::string path = tmp.file("bools.jsonl");
    write_file(path,
               R"({"id": "a", "question": "Q?", "answer": "YES"})"
               "\n"
               R"({"id": "b", "question": "Q?", "answer": "no"})"
               "\n"
               R"({"id": "c", "question": "Q?", "answer": "True"})"
               "\n"
               R"({"id": "d", "question": "Q?", "answer": "FALSE"})"
               "\n");
    const Dataset d = load_dataset(path, Regime::answers_only);
    REQUIRE(d.size() == 4);
    CHECK(d.problems[0].gold_answer.truth());
    CHECK_FALSE(d.problems[1].gold_answer.truth());
    CHECK(d.problems[2].gold_answer.truth());
    CHECK_FALSE(d.problems[3].gold_answer.truth());
}

TEST_CASE("dataset save/load round-trips structurally") {
    TempDir tmp;
    Rng rng(5);
    for (Regime regime : {Regime::step_by_step, Regime::supporting_facts, Regime::answers_only}) {
        const Dataset d = make_numeric_dataset(3 + static_cast<int>(rng.next_below(5)), regime);
        const std::string path = tmp.file("roundtrip.jsonl");
        save_dataset(d, path);
        const Dataset back = load_dataset(path, regime);
        REQUIRE(back.size() == d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            CHECK(back.problems[i].id == d.problems[i].id);
            CHECK(back.problems[i].text == d.problems[i].text);
            CHECK(answers_equal(back.problems[i].gold_answer, d.problems[i].gold_answer));
            CHECK(back.problems[i].gold_steps == d.problems[i].gold_steps);
            CHECK(back.problems[i].gold_facts == d.problems[i].gold_facts);
        }
    }
}

TEST_CASE("annotated dataset round-trips chains and provenance") {
    TempDir tmp;
    AnnotatedDataset ad;
    ad.base = make_numeric_dataset(3);
    Annotation ann;
    ann.cot = make_reasoning_chain({"Step one.", "The answer is 1."}, AnswerKind::numeric);
    ann.socratic = make_socratic_chain({{"How many", "It is 1. The answer is 1."}}, AnswerKind::numeric);
    ad.annotations["p1"] = ann;
    ad.provenance["p1"] = {AnnotationSource::teacher, 2};

    const std::string path = tmp.file("annotated.jsonl");
    save_annotated_dataset(ad, path);
    const AnnotatedDataset back = load_annotated_dataset(path, Regime::step_by_step);
    REQUIRE(back.base.size() == 3);
    REQUIRE(back.annotation_for("p1"));
    const Annotation& got = *back.annotation_for("p1");
    REQUIRE(got.cot);
    CHECK(got.cot->steps == ann.cot->steps);
    REQUIRE(got.socratic);
    REQUIRE(got.socratic->size() == 1);
    CHECK(got.socratic->pairs[0].subquestion == "How many?"); // normalized
    CHECK(got.socratic->pairs[0].solution == ann.socratic->pairs[0].solution);
    REQUIRE(got.socratic->final_answer());
    CHECK(got.socratic->final_answer()->number() == Rational(1));
    CHECK(back.provenance.at("p1").source == AnnotationSource::teacher);
    CHECK(back.provenance.at("p1").attempts == 2);
    CHECK(!back.annotation_for("p0"));
}

TEST_CASE("split_sequential partitions contiguously without shuffling") {
    const Dataset d10 = make_numeric_dataset(10, Regime::answers_only);
    auto [train, val, test] = split_sequential(d10, 0.8, 0.1, 0.1);
    CHECK(train.size() == 8);
    CHECK(val.size() == 1);
    CHECK(test.size() == 1);
    for (int i = 0; i < 8; ++i) CHECK(train.problems[i].id == "p" + std::to_string(i));
    CHECK(val.problems[0].id == "p8");
    CHECK(test.problems[0].id == "p9");

    // Concatenation in order equals the input list.
    std::vector<std::string> ids;
    for (const auto& part : {train, val, test}) {
        for (const auto& p : part.problems) ids.push_back(p.id);
    }
    REQUIRE(ids.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(ids[i] == d10.problems[i].id);
}

TEST_CASE("split_sequential degenerate and StrategyQA-scale sizes") {
    const Dataset d1 = make_numeric_dataset(1, Regime::answers_only);
    auto [t1, v1, s1] = split_sequential(d1, 0.8, 0.1, 0.1);
    CHECK(t1.size() == 1);
    CHECK(v1.size() == 0);
    CHECK(s1.size() == 0);

    const Dataset d2290 = make_numeric_dataset(2290, Regime::answers_only);
    auto [t, v, s] = split_sequential(d2290, 0.8, 0.1, 0.1);
    CHECK(t.size() == 1832);
    CHECK(v.size() == 229);
    CHECK(s.size() == 229);

    Dataset empty;
    CHECK_THROWS_AS(split_sequential(empty, 0.8, 0.1, 0.1), ConfigError);
    CHECK_THROWS_AS(split_sequential(d1, 0.5, 0.5, 0.5), ConfigError);
}

TEST_CASE("split property: concatenation equals input for random sizes") {
    Rng rng(31);
    for (int iter = 0; iter < 30; ++iter) {
        const int n = 1 + static_cast<int>(rng.next_below(500));
        const Dataset d = make_numeric_dataset(n, Regime::answers_only);
        auto [train, val, test] = split_sequential(d, 0.8, 0.1, 0.1);
        CHECK(train.size() + val.size() + test.size() == static_cast<std::size_t>(n));
        std::size_t k = 0;
        for (const auto* part : {&train, &val, &test}) {
            for (const auto& p : part->problems) {
                CHECK(p.id == d.problems[k].id);
                ++k;
            }
        }
    }
}

// Full-corpus count check; runs only when a local GSM8K train file is supplied.
TEST_CASE("gsm8k train corpus has 7473 problems when available") {
    const char* path = std::getenv("GSM8K_TRAIN_JSONL");
    if (path == nullptr) return;
    const Dataset d = load_dataset(path, Regime::step_by_step);
    CHECK(d.size() == 7473);
}
