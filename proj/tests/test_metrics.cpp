#include <doctest.h>

#include <random>

#include "cotlens/belief.hpp"
#include "cotlens/metrics.hpp"
#include "cotlens/mock_backends.hpp"
#include "test_support.hpp"

using namespace cotlens;
using namespace cotlens::metrics;

namespace {

Question three_choice() {
    Question q;
    q.id = "q1";
    q.text = "Pick.";
    q.choices = {{"a", "river"}, {"b", "forest"}, {"c", "desert"}};
    q.gold_index = 1;
    return q;
}

// Mock NLI whose entail value is looked up per (premise, hypothesis).
std::shared_ptr<MockTables> nli_table(
    const std::vector<std::tuple<std::string, std::string, double>>& rows) {
    auto tables = std::make_shared<MockTables>();
    for (const auto& [prem, hyp, e] : rows)
        tables->nli[MockTables::key(prem, hyp)] = {e, (1 - e) * 0.5, (1 - e) * 0.5};
    return tables;
}

VectorXd vec(std::initializer_list<double> v) { return to_vector(std::vector<double>(v)); }

}  // namespace

TEST_CASE("relevance is the mean step entailment of the explain hypothesis") {
    const Question q = three_choice();
    const std::vector<std::string> steps = {"s one.", "s two."};
    const std::string hyp = hypothesis_explains("forest");
    MockNliBackend nli("nli", nli_table({{"s one.", hyp, 0.8}, {"s two.", hyp, 0.6}}));
    CHECK(relevance(steps, q.choices[1], nli) == doctest::Approx(0.7).epsilon(1e-12));

    MockNliBackend zeros("nli", nli_table({{"s one.", hyp, 0.0}, {"s two.", hyp, 0.0}}));
    CHECK(relevance(steps, q.choices[1], zeros) == doctest::Approx(0.0));

    const std::vector<std::string> three = {"t1.", "t2.", "t3."};
    MockNliBackend mixed("nli",
                         nli_table({{"t1.", hyp, 0.9}, {"t2.", hyp, 0.0}, {"t3.", hyp, 0.6}}));
    CHECK(relevance(three, q.choices[1], mixed) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("relevance_neg averages over alternatives and steps") {
    const Question q = three_choice();  // M=3, a_inter=b -> alternatives a, c
    const std::vector<std::string> steps = {"u.", "v."};
    const std::string ha = hypothesis_explains("river");
    const std::string hc = hypothesis_explains("desert");

    MockNliBackend flat("nli", nli_table({{"u.", ha, 0.5},
                                          {"v.", ha, 0.5},
                                          {"u.", hc, 0.5},
                                          {"v.", hc, 0.5}}));
    CHECK(relevance_neg(steps, q, 1, flat) == doctest::Approx(0.5).epsilon(1e-12));

    MockNliBackend matrix("nli", nli_table({{"u.", ha, 0.2},
                                            {"v.", ha, 0.4},
                                            {"u.", hc, 0.6},
                                            {"v.", hc, 0.8}}));
    CHECK(relevance_neg(steps, q, 1, matrix) == doctest::Approx(0.5).epsilon(1e-12));

    // M=2 reduces to the single-alternative mean.
    Question q2;
    q2.id = "q2";
    q2.text = "t";
    q2.choices = {{"a", "yes"}, {"b", "no"}};
    q2.gold_index = 0;
    const std::string hn = hypothesis_explains("no");
    MockNliBackend single("nli", nli_table({{"u.", hn, 0.3}, {"v.", hn, 0.7}}));
    CHECK(relevance_neg(steps, q2, 0, single) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("explicitness and its boolean threshold form") {
    const Question q = three_choice();
    const std::vector<std::string> steps = {"p.", "q."};
    const std::string hyp = hypothesis_concludes("forest");
    MockNliBackend nli("nli", nli_table({{"p.", hyp, 1.0}, {"q.", hyp, 0.0}}));
    CHECK(explicitness(steps, q.choices[1], nli) == doctest::Approx(0.5).epsilon(1e-12));

    CHECK(any_above_threshold(vec({0.1, 0.7})));
    CHECK_FALSE(any_above_threshold(vec({0.1, 0.45})));
    CHECK(any_above_threshold(vec({0.5})));  // boundary inclusive
}

TEST_CASE("explicitness_neg rejection hypotheses") {
    Question q2;
    q2.id = "q2";
    q2.text = "t";
    q2.choices = {{"a", "yes"}, {"b", "no"}};
    q2.gold_index = 0;
    const std::vector<std::string> one = {"w."};
    const std::string hyp = hypothesis_rejects("no");
    MockNliBackend nli("nli", nli_table({{"w.", hyp, 0.9}}));
    CHECK(explicitness_neg(one, q2, 0, nli) == doctest::Approx(0.9).epsilon(1e-12));

    MockNliBackend zero("nli", nli_table({{"w.", hyp, 0.0}}));
    CHECK(explicitness_neg(one, q2, 0, zero) == doctest::Approx(0.0));
}

TEST_CASE("informativeness is the PMI log ratio") {
    CHECK(informativeness(vec({0.3, 0.7}), vec({0.9, 0.1}), 0) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-9));
    CHECK(informativeness(vec({0.4, 0.6}), vec({0.4, 0.6}), 1) == doctest::Approx(0.0));
    CHECK(informativeness(vec({0.4, 0.6}), vec({0.1, 0.9}), 0) ==
          doctest::Approx(std::log(0.25)).epsilon(1e-9));
}

TEST_CASE("informativeness sign law") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int rep = 0; rep < 500; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 4);
        VectorXd d(n), c(n);
        for (int i = 0; i < n; ++i) {
            d[i] = u(rng);
            c[i] = u(rng);
        }
        d /= d.sum();
        c /= c.sum();
        const int a = static_cast<int>(rng() % n);
        const double info = informativeness(d, c, a);
        if (c[a] > d[a]) CHECK(info > 0.0);
        if (c[a] < d[a]) CHECK(info < 0.0);
    }
}

TEST_CASE("sufficiency compares argmaxes with lowest-index ties") {
    CHECK(sufficiency(vec({0.1, 0.8, 0.1}), vec({0.2, 0.7, 0.1})) == 1);
    CHECK(sufficiency(vec({0.8, 0.1, 0.1}), vec({0.1, 0.1, 0.8})) == 0);
    // Both tie on indices 0/1; lowest index wins on each side.
    CHECK(sufficiency(vec({0.5, 0.5}), vec({0.5, 0.5})) == 1);
}

TEST_CASE("stage outcomes cover the decomposition cases") {
    const VectorXd direct = vec({0.6, 0.3, 0.1});
    SUBCASE("all aligned") {
        const auto out = stage_outcomes(direct, vec({0.7, 0.2, 0.1}), 0, 0);
        CHECK(out.consistency_inter == 1);
        CHECK(out.performance_inter == 1);
        CHECK(out.performance_e2e == 1);
    }
    SUBCASE("a_inter is gold but the CoT prediction strays") {
        const auto out = stage_outcomes(direct, vec({0.1, 0.8, 0.1}), 0, 0);
        CHECK(out.performance_inter == 0);
        CHECK(out.performance_e2e == 0);
    }
    SUBCASE("CoT corrects the initial belief") {
        const auto out = stage_outcomes(direct, vec({0.1, 0.8, 0.1}), 1, 1);
        CHECK(out.consistency_inter == 0);
        CHECK(out.performance_inter == 1);
        CHECK(out.performance_e2e == 1);
    }
}

TEST_CASE("decomposition identity holds on random distributions") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 4);
        VectorXd d(n), c(n);
        for (int i = 0; i < n; ++i) {
            d[i] = u(rng);
            c[i] = u(rng);
        }
        const int a = static_cast<int>(rng() % n);
        const int gold = static_cast<int>(rng() % n);
        const auto out = stage_outcomes(d, c, a, gold);
        if (out.performance_inter == 1 && a == gold) CHECK(out.performance_e2e == 1);
        if (out.performance_inter == 1 && a != gold) CHECK(out.performance_e2e == 0);
    }
}

TEST_CASE("relevance monotonicity: raising one step's entailment raises the mean") {
    const Question q = three_choice();
    const std::vector<std::string> steps = {"m one.", "m two.", "m three."};
    const std::string hyp = hypothesis_explains("forest");
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> e = {u(rng), u(rng), u(rng)};
        MockNliBackend base("nli", nli_table({{"m one.", hyp, e[0]},
                                              {"m two.", hyp, e[1]},
                                              {"m three.", hyp, e[2]}}));
        const double before = relevance(steps, q.choices[1], base);

        const std::size_t bump = rng() % 3;
        std::vector<double> e2 = e;
        e2[bump] = std::min(1.0, e2[bump] + u(rng) * (1.0 - e2[bump]));
        MockNliBackend raised("nli", nli_table({{"m one.", hyp, e2[0]},
                                                {"m two.", hyp, e2[1]},
                                                {"m three.", hyp, e2[2]}}));
        const double after = relevance(steps, q.choices[1], raised);
        CHECK(after >= before - 1e-12);
    }
}

TEST_CASE("compute_metric_record fills judge-dependent fields only with a_inter") {
    const Question q = three_choice();
    Rationale r;
    r.raw_text = "The forest has trees. Therefore, the answer is (b).";
    r.steps = {"The forest has trees.", "Therefore, the answer is (b)."};
    r.body = "The forest has trees.";
    r.conclusion = "Therefore, the answer is (b).";
    r.token_count = 11;

    auto tables = std::make_shared<MockTables>();
    for (int j = 0; j < 3; ++j) {
        const std::string hyp_e = hypothesis_explains(q.choices[j].text);
        const std::string hyp_c = hypothesis_concludes(q.choices[j].text);
        const std::string hyp_r = hypothesis_rejects(q.choices[j].text);
        tables->nli[MockTables::key(r.body, hyp_e)] = {0.6, 0.3, 0.1};
        tables->nli[MockTables::key(r.body, hyp_c)] = {0.7, 0.2, 0.1};
        tables->nli[MockTables::key(r.body, hyp_r)] = {0.2, 0.6, 0.2};
    }
    MockNliBackend nli("nli", tables);

    const VectorXd direct = vec({0.5, 0.3, 0.2});
    const VectorXd cot = vec({0.2, 0.6, 0.2});
    const VectorXd only = vec({0.1, 0.7, 0.2});

    const MetricRecord with = compute_metric_record(q, r, 0, direct, cot, only, 1, nli);
    CHECK(with.a_inter_index == 1);
    CHECK(with.length == 11);
    CHECK(with.relevance == doctest::Approx(0.6));
    CHECK(with.explicitness == doctest::Approx(0.7));
    CHECK(*with.explicitness_any == 1);
    CHECK(*with.explicitness_neg_any == 0);
    CHECK(with.informativeness == doctest::Approx(std::log(0.6 / 0.3)).epsilon(1e-9));
    CHECK(with.sufficiency == 1);
    CHECK(*with.consistency_inter == 0);
    CHECK(*with.performance_inter == 1);
    CHECK(with.performance_e2e == 1);

    const MetricRecord without =
        compute_metric_record(q, r, 0, direct, cot, only, std::nullopt, nli);
    CHECK_FALSE(without.a_inter_index.has_value());
    CHECK_FALSE(without.relevance.has_value());
    CHECK_FALSE(without.informativeness.has_value());
    CHECK_FALSE(without.consistency_inter.has_value());
    CHECK(without.sufficiency == 1);        // computable without a_inter
    CHECK(without.performance_e2e == 1);    // gold comparison still applies
    CHECK(without.length == 11);
}

TEST_CASE("bounded metrics stay in range under random NLI outputs") {
    const Question q = three_choice();
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<std::string> steps = {"r one.", "r two."};
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<std::tuple<std::string, std::string, double>> rows;
        for (const auto& s : steps)
            for (int j = 0; j < 3; ++j) {
                rows.emplace_back(s, hypothesis_explains(q.choices[j].text), u(rng));
                rows.emplace_back(s, hypothesis_rejects(q.choices[j].text), u(rng));
                rows.emplace_back(s, hypothesis_concludes(q.choices[j].text), u(rng));
            }
        MockNliBackend nli("nli", nli_table(rows));
        for (double v : {relevance(steps, q.choices[1], nli), relevance_neg(steps, q, 1, nli),
                         explicitness(steps, q.choices[1], nli), explicitness_neg(steps, q, 1, nli)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}
