#include <doctest.h>

#include "cotlens/belief.hpp"
#include "cotlens/synth.hpp"
#include "test_support.hpp"

using namespace cotlens;
using namespace cotlens::synth;

TEST_CASE("logliks_for_entropy hits the requested entropy with the requested argmax") {
    for (double h : {0.05, 0.3, 0.62, 0.9, 0.999}) {
        for (int n : {2, 5}) {
            const int argmax = n - 1;
            const VectorXd lls = logliks_for_entropy(h, n, argmax, -1.5);
            const VectorXd probs = belief::answer_distribution(lls);
            CHECK(belief::normalized_entropy(probs) == doctest::Approx(h).epsilon(1e-9));
            CHECK(belief::argmax_lowest(probs) == argmax);
            CHECK(belief::log_sum_exp(lls) == doctest::Approx(-1.5).epsilon(1e-9));
        }
    }
}

TEST_CASE("generation is deterministic for a fixed seed") {
    SynthParams p;
    p.n_questions = 30;
    p.n_samples = 2;
    p.consistency = SynthParams::Consistency::OneMinusEntropy;
    const auto a = generate_population(p, 99);
    const auto b = generate_population(p, 99);

    REQUIRE(a.questions.size() == b.questions.size());
    for (std::size_t i = 0; i < a.questions.size(); ++i) CHECK(a.questions[i] == b.questions[i]);
    CHECK(a.tables->to_json() == b.tables->to_json());
    REQUIRE(a.truths.size() == b.truths.size());
    for (std::size_t i = 0; i < a.truths.size(); ++i) {
        CHECK(a.truths[i].entropy == b.truths[i].entropy);
        CHECK(a.truths[i].samples[0].relevance == b.truths[i].samples[0].relevance);
    }

    const auto c = generate_population(p, 100);
    CHECK(c.truths[0].entropy != a.truths[0].entropy);
}

TEST_CASE("invalid effect sizes are rejected") {
    SynthParams p;
    p.relevance = {1.2, 0.0, 0.0};  // outside [0,1]
    CHECK_THROWS_AS(generate_population(p, 1), std::invalid_argument);

    SynthParams p2;
    p2.relevance = {0.9, 0.5, 0.0};  // 0.9 + 0.5*h leaves [0,1] at h near 1
    p2.entropy_max = 0.95;
    CHECK_THROWS_AS(generate_population(p2, 1), std::invalid_argument);

    SynthParams p3;
    p3.entropy_min = 0.9;
    p3.entropy_max = 0.1;
    CHECK_THROWS_AS(generate_population(p3, 1), std::invalid_argument);
}

TEST_CASE("planted_report limit cases") {
    SynthParams p;
    p.relevance = {0.5, -0.3, 1e-9};  // noise -> 0 gives |r| -> 1
    p.relevance_neg = {0.3, 0.0, 0.05};
    const auto rows = planted_report(p);
    const auto find = [&](const std::string& name) {
        for (const auto& r : rows)
            if (r.factor == name) return r;
        FAIL("missing planted row");
        return PlantedExpectation{};
    };
    CHECK(find("relevance").expected_r == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(find("relevance_neg").expected_r == 0.0);

    // Closed-form for a linear effect with noise.
    SynthParams p2;
    p2.entropy_min = 0.0 + 1e-9;
    p2.entropy_max = 1.0 - 1e-9;
    p2.relevance = {0.5, -0.25, 0.1};
    const double sigma_h = std::sqrt(1.0 / 12.0);
    const double num = -0.25 * sigma_h;
    const double expect = num / std::sqrt(num * num + 0.1 * 0.1);
    CHECK(find("relevance").factor == "relevance");
    const auto rows2 = planted_report(p2);
    for (const auto& r : rows2)
        if (r.factor == "relevance") CHECK(r.expected_r == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("golden quirks produce the scripted irregularities") {
    SynthParams p;
    p.n_questions = 12;
    p.n_samples = 2;
    p.n_judges = 4;
    p.golden_quirks = true;
    p.consistency = SynthParams::Consistency::OneMinusEntropy;
    const auto out = generate_population(p, 7);

    REQUIRE(out.questions.size() == 12);
    CHECK(out.questions[0].num_choices() == 5);
    CHECK(out.questions[7].num_choices() == 2);
    CHECK(out.questions[7].facts.has_value());
    CHECK(out.judge_ids.size() == 4);
    // q8 sample 1: all judges unparseable -> a_inter absent in truth.
    CHECK_FALSE(out.truths[8].samples[1].a_inter.has_value());
    // No degenerate samples in the golden set: every sample yields a record.
    for (const auto& t : out.truths)
        for (const auto& s : t.samples) CHECK_FALSE(s.degenerate);
}

TEST_CASE("degenerate quirks mark empty and conclusion-only rationales") {
    SynthParams p;
    p.n_questions = 6;
    p.n_samples = 2;
    p.degenerate_quirks = true;
    const auto out = generate_population(p, 7);
    CHECK(out.truths[0].samples[1].degenerate);  // empty generation
    CHECK(out.truths[1].samples[0].degenerate);  // conclusion-only
    CHECK_FALSE(out.truths[0].samples[0].degenerate);
}

TEST_CASE("debias planting emits executor tables with mismatching beliefs") {
    SynthParams p;
    p.n_questions = 40;
    p.plant_debias = true;
    p.sufficiency_rate = 1.0;
    const auto out = generate_population(p, 21);
    REQUIRE(out.executor_tables != nullptr);
    for (const auto& t : out.truths) {
        CHECK(t.executor_argmax != t.samples[0].a_inter.value());
        CHECK(t.executor_follows == (t.executor_entropy > 2.0 / 3.0));
        CHECK(t.samples[0].sufficient);
    }
}
