#include "cotlens/judge.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "cotlens/logging.hpp"

namespace cotlens::judge {

namespace {

std::string lower_copy(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

constexpr std::string_view kAnswerPhrase = "the answer is";

bool is_token_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string build_judge_prompt(const Question& q, const Rationale& rationale) {
    std::string prompt;
    prompt += "Question: " + q.text + "\n";
    prompt += "Answer choices: " + format_answer_choices(q) + "\n";
    prompt += "Rationale: " + rationale.raw_text + "\n\n";
    prompt +=
        "Select the most appropriate answer that can be concluded from the given rationale. "
        "You must choose only ONE answer. Directly output in the format of \"Therefore, the "
        "answer is ...\".";
    return prompt;
}

std::optional<std::string> parse_judge_answer(std::string_view text,
                                              std::span<const std::string> labels) {
    const std::string lowered = lower_copy(text);
    const std::size_t pos = lowered.rfind(kAnswerPhrase);
    if (pos == std::string::npos) return std::nullopt;

    std::size_t i = pos + kAnswerPhrase.size();
    while (i < lowered.size() && std::isspace(static_cast<unsigned char>(lowered[i]))) ++i;
    if (i >= lowered.size()) return std::nullopt;

    std::string token;
    if (lowered[i] == '(') {
        const std::size_t close = lowered.find(')', i);
        if (close == std::string::npos) return std::nullopt;
        token = lowered.substr(i + 1, close - i - 1);
    } else {
        std::size_t j = i;
        while (j < lowered.size() && is_token_char(lowered[j])) ++j;
        token = lowered.substr(i, j - i);
    }
    while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) token.pop_back();
    while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front())))
        token.erase(token.begin());
    if (token.empty()) return std::nullopt;

    for (const auto& label : labels)
        if (token == label) return label;
    return std::nullopt;
}

JudgeOutcome extract_a_inter(const Question& q, const Rationale& rationale,
                             std::span<GenerationBackend* const> judges,
                             const GenParams& judge_params) {
    if (judges.empty()) throw std::invalid_argument("extract_a_inter: no judges configured");
    const std::string prompt = build_judge_prompt(q, rationale);
    const std::vector<std::string> labels = q.labels();

    JudgeOutcome outcome;
    int transport_failures = 0;
    for (GenerationBackend* j : judges) {
        JudgeVote vote;
        vote.judge_id = j->identity();
        try {
            const GenerationResult res = j->generate(prompt, judge_params);
            if (res.texts.empty()) throw BackendError("judge returned no text");
            vote.label = parse_judge_answer(res.texts.front(), labels);
        } catch (const BackendError& e) {
            vote.transport_ok = false;
            ++transport_failures;
            log_warn("judge " + vote.judge_id + " failed for question " + q.id + ": " + e.what());
        }
        outcome.votes.push_back(std::move(vote));
    }
    if (transport_failures == static_cast<int>(judges.size()))
        throw BackendError("all judges failed transport for question " + q.id);

    std::map<std::string, int> tally;
    for (const auto& v : outcome.votes)
        if (v.label) ++tally[*v.label];
    if (tally.empty()) return outcome;  // zero parseable votes

    int best = 0;
    for (const auto& [label, count] : tally) best = std::max(best, count);
    // First-listed judge among the tied labels wins.
    for (const auto& v : outcome.votes) {
        if (v.label && tally[*v.label] == best) {
            outcome.a_inter_label = *v.label;
            break;
        }
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == *outcome.a_inter_label) outcome.a_inter_index = static_cast<int>(i);
    return outcome;
}

}  // namespace cotlens::judge
