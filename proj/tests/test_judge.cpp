#include <doctest.h>

#include <algorithm>
#include <random>

#include "cotlens/judge.hpp"
#include "cotlens/mock_backends.hpp"
#include "test_support.hpp"

using namespace cotlens;
using namespace cotlens::judge;

namespace {

Question make_question() {
    Question q;
    q.id = "q1";
    q.text = "Which tool?";
    q.choices = {{"a", "hammer"}, {"b", "saw"}, {"c", "drill"}};
    q.gold_index = 0;
    return q;
}

Rationale make_rationale_stub() {
    Rationale r;
    r.raw_text = "Cutting needs teeth. Therefore, the answer is (b).";
    return r;
}

GenParams judge_params() {
    GenParams p;
    p.mode = GenParams::Mode::Greedy;
    p.max_tokens = 64;
    p.n_samples = 1;
    return p;
}

// A judge with a fixed reply for every prompt.
class FixedJudge : public GenerationBackend {
  public:
    FixedJudge(std::string id, std::string reply, bool fail = false)
        : id_(std::move(id)), reply_(std::move(reply)), fail_(fail) {}
    std::string identity() const override { return id_; }
    GenerationResult generate(const std::string&, const GenParams&) override {
        if (fail_) throw BackendError(id_ + ": down");
        return {{reply_}, {false}};
    }

  private:
    std::string id_;
    std::string reply_;
    bool fail_;
};

std::optional<std::string> run_votes(const std::vector<std::string>& replies,
                                     std::vector<bool> fails = {}) {
    const Question q = make_question();
    const Rationale r = make_rationale_stub();
    std::vector<std::unique_ptr<FixedJudge>> owners;
    std::vector<GenerationBackend*> judges;
    for (std::size_t i = 0; i < replies.size(); ++i) {
        const bool fail = i < fails.size() && fails[i];
        owners.push_back(
            std::make_unique<FixedJudge>("judge-" + std::to_string(i), replies[i], fail));
        judges.push_back(owners.back().get());
    }
    return extract_a_inter(q, r, judges, judge_params()).a_inter_label;
}

}  // namespace

TEST_CASE("judge prompt carries the instructed pieces") {
    const Question q = make_question();
    const Rationale r = make_rationale_stub();
    const std::string prompt = build_judge_prompt(q, r);
    CHECK(prompt.find("You must choose only ONE answer") != std::string::npos);
    CHECK(prompt.find("Directly output in the format of \"Therefore, the answer is ...\".") !=
          std::string::npos);
    CHECK(prompt.find("Answer choices: (a) hammer (b) saw (c) drill") != std::string::npos);
    const auto pos = prompt.find("Rationale: " + r.raw_text);
    REQUIRE(pos != std::string::npos);
    CHECK(prompt.find("Rationale:", pos + 1) == std::string::npos);  // inserted exactly once
    CHECK(prompt == build_judge_prompt(q, r));
}

TEST_CASE("parse_judge_answer reads the instructed format") {
    const std::vector<std::string> labels = {"a", "b", "c"};
    CHECK(parse_judge_answer("Therefore, the answer is (b).", labels) == "b");
    CHECK(parse_judge_answer("the answer is B", labels) == "b");
    CHECK(parse_judge_answer("the answer is c, clearly.", labels) == "c");
    CHECK_FALSE(parse_judge_answer("I cannot decide.", labels).has_value());
    CHECK_FALSE(parse_judge_answer("the answer is (z).", labels).has_value());
    CHECK_FALSE(parse_judge_answer("the answer is", labels).has_value());
    // The last occurrence wins.
    CHECK(parse_judge_answer("Maybe the answer is (a). No: the answer is (c).", labels) == "c");
}

TEST_CASE("parser soundness: any returned label is a question label") {
    const std::vector<std::string> labels = {"a", "b"};
    std::mt19937_64 rng(71);
    const std::vector<std::string> fragments = {"the answer is ", "(", ")", "a", "b", "z",
                                                "Therefore, ",    ".", " ", "answer"};
    for (int rep = 0; rep < 500; ++rep) {
        std::string text;
        const int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) text += fragments[rng() % fragments.size()];
        const auto parsed = parse_judge_answer(text, labels);
        if (parsed) CHECK(std::find(labels.begin(), labels.end(), *parsed) != labels.end());
    }
}

TEST_CASE("majority vote drops failures and breaks ties by priority") {
    const auto vote = [](const std::string& label) {
        return "Therefore, the answer is (" + label + ").";
    };
    CHECK(run_votes({vote("a"), vote("a"), vote("b"), vote("c")}) == "a");  // strict majority
    CHECK(run_votes({vote("a"), vote("b"), vote("a"), vote("b")}) == "a");  // 2-2 tie: first judge
    CHECK(run_votes({vote("b"), vote("a"), vote("b"), vote("a")}) == "b");
    CHECK(run_votes({vote("a"), "I cannot decide.", vote("b"), vote("b")}) == "b");
    CHECK_FALSE(run_votes({"no idea", "hmm", "still nothing"}).has_value());
}

TEST_CASE("all judges failing transport raises a record-level error") {
    CHECK_THROWS_AS(
        run_votes({"Therefore, the answer is (a).", "Therefore, the answer is (b)."}, {true, true}),
        BackendError);
    // A single surviving judge still yields a result.
    CHECK(run_votes({"Therefore, the answer is (a).", "Therefore, the answer is (b)."},
                    {true, false}) == "b");
}

TEST_CASE("vote permutation stability") {
    const auto vote = [](const std::string& label) {
        return "Therefore, the answer is (" + label + ").";
    };
    std::mt19937_64 rng(83);
    const std::vector<std::string> labels = {"a", "b", "c"};
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<std::string> replies;
        std::map<std::string, int> tally;
        for (int i = 0; i < 4; ++i) {
            const std::string& l = labels[rng() % 3];
            replies.push_back(vote(l));
            ++tally[l];
        }
        const auto winner = run_votes(replies);
        REQUIRE(winner.has_value());

        const int top = std::max_element(tally.begin(), tally.end(), [](auto& x, auto& y) {
                            return x.second < y.second;
                        })->second;
        const bool unique_top =
            std::count_if(tally.begin(), tally.end(), [&](auto& kv) { return kv.second == top; }) ==
            1;
        std::vector<std::string> shuffled = replies;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto winner2 = run_votes(shuffled);
        if (unique_top) {
            // Permuting judges never changes a unique-majority winner.
            CHECK(winner == winner2);
        } else {
            // Ties resolve by priority; the winner must still be a tied label.
            CHECK(tally[*winner2] == top);
        }
    }
}
