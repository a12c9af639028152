#include <doctest.h>

#include <sstream>

#include "cotlens/dataset.hpp"
#include "test_support.hpp"

using namespace cotlens;
using namespace cotlens::dataset;

namespace {

std::string well_formed_line(const std::string& id, const std::string& gold) {
    nlohmann::json j{{"id", id},
                     {"question", "Where do puddles form?"},
                     {"choices",
                      nlohmann::json::array({{{"label", "a"}, {"text", "roof"}},
                                             {{"label", "b"}, {"text", "street"}},
                                             {{"label", "c"}, {"text", "cloud"}}})},
                     {"answer_label", gold}};
    return j.dump();
}

}  // namespace

TEST_CASE("well-formed records parse and validate cleanly") {
    std::stringstream in(well_formed_line("q1", "b") + "\n" + well_formed_line("q2", "a") + "\n" +
                         well_formed_line("q3", "c") + "\n");
    const auto records = parse_dataset(in);
    REQUIRE(records.size() == 3);
    CHECK(records[0].gold_index == 1);

    const auto report = validate_dataset(records);
    CHECK(report.n_pass == 3);
    CHECK(report.n_fail == 0);
    CHECK(report.ok());
}

TEST_CASE("gold index out of range is rejected") {
    auto records = std::vector<Question>{};
    Question q;
    q.id = "q1";
    q.text = "t";
    q.choices = {{"a", "x"}, {"b", "y"}};
    q.gold_index = 2;  // == n
    records.push_back(q);
    const auto report = validate_dataset(records);
    REQUIRE(report.n_fail == 1);
    CHECK(report.entries[0].reasons[0] == "gold index out of range");
}

TEST_CASE("unknown answer label fails as out-of-range gold") {
    std::stringstream in(well_formed_line("q1", "z"));
    const auto records = parse_dataset(in);
    CHECK(records[0].gold_index == -1);
    const auto report = validate_dataset(records);
    CHECK_FALSE(report.ok());
}

TEST_CASE("duplicate ids flag the second record") {
    std::stringstream in(well_formed_line("q1", "a") + "\n" + well_formed_line("q1", "b") + "\n");
    const auto report = validate_dataset(parse_dataset(in));
    CHECK(report.n_pass == 1);
    REQUIRE(report.n_fail == 1);
    CHECK(report.entries[1].position == 1);
    CHECK(report.entries[1].reasons[0] == "duplicate id");
}

TEST_CASE("fewer than two choices and empty facts are rejected") {
    Question q;
    q.id = "q1";
    q.text = "t";
    q.choices = {{"a", "only"}};
    q.gold_index = 0;
    q.facts = std::vector<std::string>{};
    const auto report = validate_dataset({q});
    REQUIRE(report.n_fail == 1);
    const auto& reasons = report.entries[0].reasons;
    CHECK(std::find(reasons.begin(), reasons.end(), "fewer than 2 choices") != reasons.end());
    CHECK(std::find(reasons.begin(), reasons.end(), "facts present but empty") != reasons.end());
}

TEST_CASE("labels are normalized to lowercase and uniqueness is enforced") {
    nlohmann::json j{{"id", "q9"},
                     {"question", "Pick."},
                     {"choices",
                      nlohmann::json::array({{{"label", "A"}, {"text", "x"}},
                                             {{"label", "a"}, {"text", "y"}}})},
                     {"answer_label", "A"}};
    const Question q = parse_question(j);
    CHECK(q.choices[0].label == "a");
    CHECK(q.gold_index == 0);  // first match wins
    const auto report = validate_dataset({q});
    CHECK_FALSE(report.ok());  // duplicate label after normalization
}

TEST_CASE("dataset file round-trip preserves every field") {
    testsupport::TempDir dir("dataset");
    std::vector<Question> qs;
    Question q;
    q.id = "strat-7";
    q.text = "Is cork buoyant?";
    q.choices = {{"a", "yes"}, {"b", "no"}};
    q.gold_index = 0;
    q.facts = std::vector<std::string>{"Cork floats on water.", "Density of cork is 0.24 g/cm3."};
    qs.push_back(q);
    Question q2;
    q2.id = "cqa-12";
    q2.text = "Where, exactly, do \"commas\" go?";
    q2.choices = {{"a", "here"}, {"b", "there"}, {"c", "nowhere"}};
    q2.gold_index = 2;
    qs.push_back(q2);

    const auto file = dir.path() / "data.jsonl";
    save_dataset(qs, file);
    const auto back = load_dataset(file);
    REQUIRE(back.size() == qs.size());
    CHECK(back[0] == qs[0]);
    CHECK(back[1] == qs[1]);
}
