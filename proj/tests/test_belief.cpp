#include <doctest.h>

#include <random>

#include "cotlens/belief.hpp"
#include "cotlens/mock_backends.hpp"
#include "test_support.hpp"

using namespace cotlens;
using namespace cotlens::belief;

TEST_CASE("answer_distribution matches the analytic softmax") {
    VectorXd x(2);
    x << -1.0, -2.0;
    const VectorXd p = answer_distribution(x);
    CHECK(p[0] == doctest::Approx(0.73106).epsilon(1e-5));
    CHECK(p[1] == doctest::Approx(0.26894).epsilon(1e-5));
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("answer_distribution symmetry and shift invariance") {
    VectorXd c = VectorXd::Constant(3, -1.7);
    const VectorXd p = answer_distribution(c);
    for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    VectorXd x(4);
    x << -0.3, -1.1, -2.7, -0.9;
    const VectorXd a = answer_distribution(x);
    const VectorXd b = answer_distribution(x.array() + 5.0);
    for (int i = 0; i < 4; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("answer_distribution rejects bad input") {
    VectorXd one(1);
    one << -1.0;
    CHECK_THROWS_AS(answer_distribution(one), std::invalid_argument);
    VectorXd bad(2);
    bad << -1.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(answer_distribution(bad), std::invalid_argument);
}

TEST_CASE("normalized_entropy endpoints and analytic case") {
    CHECK(normalized_entropy(VectorXd::Constant(5, 0.2)) == 1.0);

    VectorXd onehot = VectorXd::Zero(4);
    onehot[2] = 1.0;
    CHECK(normalized_entropy(onehot) == 0.0);

    VectorXd half(5);
    half << 0.5, 0.5, 0.0, 0.0, 0.0;
    CHECK(normalized_entropy(half) ==
          doctest::Approx(std::log(2.0) / std::log(5.0)).epsilon(1e-6));

    VectorXd single(1);
    single << 1.0;
    CHECK_THROWS_AS(normalized_entropy(single), std::invalid_argument);
}

TEST_CASE("empirical_difficulty direct cases and log-softmax identity") {
    VectorXd x2(2);
    x2 << -1.0, -2.0;
    CHECK(empirical_difficulty(x2, 0) == doctest::Approx(-1.0));

    VectorXd x3(3);
    x3 << -1.0, -2.0, -3.0;
    CHECK(empirical_difficulty(x3, 2) == doctest::Approx(2.0));

    // Same value when computed from log of softmax probabilities.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-6.0, 0.0);
    for (int rep = 0; rep < 200; ++rep) {
        VectorXd x(5);
        for (int i = 0; i < 5; ++i) x[i] = u(rng);
        const int gold = static_cast<int>(rng() % 5);
        const VectorXd logp = answer_distribution(x).array().log();
        CHECK(empirical_difficulty(x, gold) ==
              doctest::Approx(empirical_difficulty(logp, gold)).epsilon(1e-12));
    }
}

TEST_CASE("log_sum_exp identities and stability") {
    VectorXd two(2);
    two << -1.0, -1.0;
    CHECK(log_sum_exp(two) == doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-6));

    VectorXd one(1);
    one << -3.25;
    CHECK(log_sum_exp(one) == -3.25);

    VectorXd wide(2);
    wide << 0.0, -1000.0;
    CHECK(log_sum_exp(wide) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isfinite(log_sum_exp(wide)));
}

TEST_CASE("difficulty sign law on random continuous vectors") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-8.0, 0.0);
    for (int rep = 0; rep < 500; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 5);
        VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = u(rng);
        const int gold = static_cast<int>(rng() % n);
        const double diff = empirical_difficulty(x, gold);
        const bool predicted_gold = argmax_lowest(answer_distribution(x)) == gold;
        CHECK((diff < 0.0) == predicted_gold);
    }
}

TEST_CASE("direct prompt renders facts before the question exactly once") {
    Question q;
    q.id = "q1";
    q.text = "What floats?";
    q.choices = {{"a", "stone"}, {"b", "cork"}};
    q.gold_index = 1;

    const std::string base = direct_prompt(q);
    CHECK(base.find("Question: What floats?") != std::string::npos);
    CHECK(base.find("Answer choices: (a) stone (b) cork") != std::string::npos);
    CHECK(base.rfind("Answer:") == base.size() - 7);
    CHECK(base.find("Facts:") == std::string::npos);

    q.facts = std::vector<std::string>{"Cork is lighter than water."};
    const std::string with_facts = direct_prompt(q);
    const auto fact_pos = with_facts.find("Cork is lighter than water.");
    REQUIRE(fact_pos != std::string::npos);
    CHECK(fact_pos < with_facts.find("Question:"));
    CHECK(with_facts.find("Cork is lighter than water.", fact_pos + 1) == std::string::npos);
}

TEST_CASE("build_belief_profile composes the pipeline on a mock table") {
    Question q;
    q.id = "q1";
    q.text = "Pick one.";
    q.choices = {{"a", "red"}, {"b", "green"}, {"c", "blue"}, {"d", "cyan"}, {"e", "plum"}};
    q.gold_index = 0;

    auto tables = std::make_shared<MockTables>();
    const std::string prompt = direct_prompt(q);
    const std::vector<double> lls = {-1.0, -2.0, -3.0, -4.0, -5.0};
    for (int i = 0; i < 5; ++i) {
        tables->score[MockTables::key(prompt, choice_completion(q.choices[i]))] = {lls[i] - 0.5,
                                                                                   lls[i] + 0.5};
    }
    MockScoringBackend backend("mock-score", tables);

    const BeliefProfile profile = build_belief_profile(q, backend);
    // Frozen from the analytic softmax+entropy oracle.
    CHECK(profile.entropy == doctest::Approx(0.6213180518178848).epsilon(1e-9));
    CHECK(profile.direct_pred_index == 0);
    CHECK(profile.difficulty == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(profile.lse == doctest::Approx(testsupport::oracle_lse(lls)).epsilon(1e-12));

    // Uniform log-likelihoods: maximum entropy, zero difficulty.
    auto tables2 = std::make_shared<MockTables>();
    for (int i = 0; i < 5; ++i)
        tables2->score[MockTables::key(prompt, choice_completion(q.choices[i]))] = {-2.0};
    MockScoringBackend backend2("mock-score", tables2);
    const BeliefProfile uniform = build_belief_profile(q, backend2);
    CHECK(uniform.entropy == 1.0);
    CHECK(uniform.difficulty == 0.0);

    // Derived fields recomputed from the stored log-likelihoods must match.
    const BeliefProfile redo = profile_from_logliks(q, profile.avg_logliks);
    CHECK(redo.entropy == profile.entropy);
    CHECK(redo.difficulty == profile.difficulty);
    CHECK(redo.lse == profile.lse);
    CHECK(redo.direct_pred_index == profile.direct_pred_index);
}
