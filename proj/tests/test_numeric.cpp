#include <doctest.h>

#include <string>
#include <vector>

#include "distill/answer.hpp"
#include "distill/calc.hpp"
#include "distill/extract.hpp"
#include "distill/rational.hpp"
#include "distill/rng.hpp"

using namespace distill;

namespace {

// Terminating-decimal rational with up to 3 fractional digits, |value| < 1000.
Rational random_decimal(Rng& rng, bool nonzero = false) {
    while (true) {
        const int k = static_cast<int>(rng.next_below(4)); // 0..3 decimal places
        std::int64_t pow10 = 1;
        for (int i = 0; i < k; ++i) pow10 *= 10;
        std::int64_t num = static_cast<std::int64_t>(rng.next_below(999 * pow10 * 2 + 1)) - 999 * pow10;
        if (nonzero && num == 0) continue;
        return Rational(num, pow10);
    }
}

char random_op(Rng& rng) {
    constexpr char ops[] = {'+', '-', '*', '/'};
    return ops[rng.next_below(4)];
}

} // namespace

TEST_CASE("rational arithmetic stays exact and normalized") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK((Rational(1, 3) + Rational(1, 6)) == Rational(1, 2));
    CHECK((Rational(3) * Rational(4)) == Rational(12));
    CHECK((Rational(1) / Rational(3)).to_decimal_string() == "0.333333");
    CHECK(Rational(-3, 6).num() == -1);
    CHECK(Rational(-3, 6).den() == 2);
    CHECK(Rational(1200500, 1000).to_decimal_string() == "1200.5");
    CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("decimal parsing round-trips") {
    CHECK(*Rational::parse_decimal("3") == Rational(3));
    CHECK(*Rational::parse_decimal("3.0") == Rational(3));
    CHECK(*Rational::parse_decimal("-1.25") == Rational(-5, 4));
    CHECK(*Rational::parse_decimal("0.5") == Rational(1, 2));
    CHECK(!Rational::parse_decimal(""));
    CHECK(!Rational::parse_decimal("1.2.3"));
    CHECK(!Rational::parse_decimal("abc"));

    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const Rational r = random_decimal(rng);
        auto back = Rational::parse_decimal(r.to_decimal_string());
        REQUIRE(back);
        CHECK(*back == r);
    }
}

TEST_CASE("answers_equal compares within tolerance") {
    CHECK(answers_equal(Answer::numeric(Rational(3)), Answer::numeric(Rational(3))));
    CHECK(answers_equal(Answer::numeric(Rational(3)), *Answer::parse("3.0")));
    CHECK_FALSE(answers_equal(Answer::boolean(true), Answer::boolean(false)));
    CHECK_FALSE(answers_equal(Answer::boolean(true), Answer::numeric(Rational(1))));

    // |1/3 - 0.3333333| = 1/30000000, about 3.3e-8, inside 1e-6.
    CHECK(answers_equal(Answer::numeric(*Rational::parse_decimal("0.3333333")),
                        Answer::numeric(Rational(1, 3))));
    // Just outside the tolerance.
    CHECK_FALSE(answers_equal(Answer::numeric(Rational(3)),
                              Answer::numeric(Rational(3) + Rational(2, 1000000))));
}

TEST_CASE("answers_equal behaves as an equivalence relation at half-tolerance spacing") {
    const Rational tol(1, 1000000);
    const Rational half = tol / Rational(2);
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Rational a = random_decimal(rng);
        const Rational d1 = half * Rational(static_cast<std::int64_t>(rng.next_below(1000)), 1000);
        const Rational d2 = half * Rational(static_cast<std::int64_t>(rng.next_below(1000)), 1000);
        const Answer x = Answer::numeric(a);
        const Answer y = Answer::numeric(a + d1);
        const Answer z = Answer::numeric(a + d1 + d2);
        CHECK(answers_equal(x, x));                              // reflexive
        CHECK(answers_equal(x, y) == answers_equal(y, x));       // symmetric
        CHECK(answers_equal(x, y));
        CHECK(answers_equal(y, z));
        CHECK(answers_equal(x, z));                              // transitive at this spacing
    }
}

TEST_CASE("calculator annotations from the GSM8K robe solution verify") {
    const std::string text =
        "It takes 2/2 = <<2/2=1>> 1 bolt of white fiber. "
        "So the total amount of fabric is 2+1 = <<2+1=3>> 3 bolts of fabric. The answer is 3.";
    const CalcReport r = verify_calc_annotations(text);
    CHECK(r.total == 2);
    CHECK(r.valid == 2);
    CHECK(r.failures.empty());
}

TEST_CASE("calculator verification identities and failures") {
    CHECK(verify_calc_annotations("<<2/2=1>>").valid == 1);
    CHECK(verify_calc_annotations("<<0+0=0>>").valid == 1);

    const CalcReport bad = verify_calc_annotations("<<3*4=11>>");
    CHECK(bad.total == 1);
    CHECK(bad.valid == 0);
    REQUIRE(bad.failures.size() == 1);
    CHECK(bad.failures[0].reason == "expected 12");

    const CalcReport malformed = verify_calc_annotations("x <<3+4>> y <<1+1=2>>");
    CHECK(malformed.total == 2);
    CHECK(malformed.valid == 1);
    REQUIRE(malformed.failures.size() == 1);
    CHECK(malformed.failures[0].reason == "malformed annotation");

    const CalcReport unbalanced = verify_calc_annotations("<<1+1=2");
    CHECK(unbalanced.total == 1);
    CHECK(unbalanced.valid == 0);

    const CalcReport div0 = verify_calc_annotations("<<3/0=0>>");
    CHECK(div0.valid == 0);
    REQUIRE(div0.failures.size() == 1);
    CHECK(div0.failures[0].reason == "division by zero");
}

TEST_CASE("calculator expressions respect precedence") {
    std::string err;
    CHECK(*eval_calc_expression("2+6/2") == Rational(5));
    CHECK(*eval_calc_expression("2*3+4*5") == Rational(26));
    CHECK(*eval_calc_expression("10-2-3") == Rational(5));
    CHECK(*eval_calc_expression("12/4/3") == Rational(1));
    CHECK(*eval_calc_expression(" 2 + 1 ") == Rational(3));
    CHECK(!eval_calc_expression("2+", &err));
    CHECK(!eval_calc_expression("", &err));
}

TEST_CASE("fuzzed annotations verify valid; corrupted right sides fail") {
    Rng rng(1234);
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
        const Rational a = random_decimal(rng);
        const Rational b = random_decimal(rng, /*nonzero=*/true);
        const char op = random_op(rng);
        Rational exact;
        switch (op) {
            case '+': exact = a + b; break;
            case '-': exact = a - b; break;
            case '*': exact = a * b; break;
            default: exact = a / b; break;
        }
        const std::string rhs = exact.to_exact_decimal_string();
        const std::string ann = "<<" + a.to_decimal_string() + op + b.to_decimal_string() + "=" + rhs + ">>";
        const CalcReport ok = verify_calc_annotations(ann);
        CHECK(ok.valid == 1);

        // Any corruption beyond the tolerance must be caught.
        const Rational delta(3, 100000); // 3e-5
        const Rational corrupted = exact + (rng.next_below(2) == 0 ? delta : -delta);
        const std::string bad_ann =
            "<<" + a.to_decimal_string() + op + b.to_decimal_string() + "=" +
            corrupted.to_exact_decimal_string() + ">>";
        const CalcReport bad = verify_calc_annotations(bad_ann);
        CHECK(bad.valid == 0);
        ++checked;
    }
    CHECK(checked == 2000);
}

TEST_CASE("final answer extraction follows the marker-first cascade") {
    // Rule 1: explicit marker.
    auto a = extract_final_answer(
        "So the total amount of fabric is 2+1 = <<2+1=3>> 3 bolts of fabric. The answer is 3.",
        AnswerKind::numeric);
    REQUIRE(a);
    CHECK(a->number() == Rational(3));

    auto yes = extract_final_answer("The final answer is YES.", AnswerKind::boolean);
    REQUIRE(yes);
    CHECK(yes->truth());

    CHECK(!extract_final_answer("", AnswerKind::numeric));
    CHECK(!extract_final_answer("", AnswerKind::boolean));

    // Rule 2: the rightmost calc annotation when no marker exists.
    auto calc = extract_final_answer("first <<1+1=2>> then <<2*3=6>> done", AnswerKind::numeric);
    REQUIRE(calc);
    CHECK(calc->number() == Rational(6));

    // Rule 3: the last standalone number.
    auto loose = extract_final_answer("He pays $1,200.50 total", AnswerKind::numeric);
    REQUIRE(loose);
    CHECK(loose->number() == Rational(120050, 100));

    // Case-insensitivity and the later marker winning.
    auto late = extract_final_answer("the answer is 4. Wait. THE ANSWER IS 7.", AnswerKind::numeric);
    REQUIRE(late);
    CHECK(late->number() == Rational(7));

    // Booleans never fall through to number rules.
    CHECK(!extract_final_answer("It is 42.", AnswerKind::boolean));

    auto no = extract_final_answer("No facts here. the final answer is no", AnswerKind::boolean);
    REQUIRE(no);
    CHECK_FALSE(no->truth());
}

TEST_CASE("extraction edge cases") {
    auto comma_list = extract_final_answer("choose 3,4", AnswerKind::numeric);
    REQUIRE(comma_list);
    CHECK(comma_list->number() == Rational(4)); // "3,4" is a list, not 34

    auto ordinal = extract_final_answer("He came 2nd with 15 points", AnswerKind::numeric);
    REQUIRE(ordinal);
    CHECK(ordinal->number() == Rational(15)); // ordinals are not standalone numbers

    auto neg = extract_final_answer("The temperature was -4", AnswerKind::numeric);
    REQUIRE(neg);
    CHECK(neg->number() == Rational(-4));

    auto sub = extract_final_answer("We compute 9-4", AnswerKind::numeric);
    REQUIRE(sub);
    CHECK(sub->number() == Rational(4)); // minus binds as operator after a digit

    auto dollars = extract_final_answer("The answer is $1,200.50.", AnswerKind::numeric);
    REQUIRE(dollars);
    CHECK(dollars->number() == Rational(120050, 100));
}

TEST_CASE("extraction is total and idempotent over rendered statements") {
    Rng rng(99);
    for (int i = 0; i < 300; ++i) {
        // Total: arbitrary bytes never throw.
        std::string junk;
        const std::size_t len = rng.next_below(64);
        for (std::size_t j = 0; j < len; ++j) {
            junk.push_back(static_cast<char>(rng.next_below(256)));
        }
        CHECK_NOTHROW(extract_final_answer(junk, AnswerKind::numeric));
        CHECK_NOTHROW(extract_final_answer(junk, AnswerKind::boolean));

        // Idempotent: extracting from a rendered statement returns the value.
        const Answer numeric = Answer::numeric(random_decimal(rng));
        auto round = extract_final_answer(render_answer_statement(numeric), AnswerKind::numeric);
        REQUIRE(round);
        CHECK(answers_equal(*round, numeric));

        const Answer flag = Answer::boolean(rng.next_below(2) == 0);
        auto round_b = extract_final_answer(render_answer_statement(flag), AnswerKind::boolean);
        REQUIRE(round_b);
        CHECK(answers_equal(*round_b, flag));
    }
}
