#include "cotlens/cot.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "cotlens/belief.hpp"

namespace cotlens::cot {

namespace {

// Zero-shot CoT template; generation continues after "we need to".
constexpr const char* kCotInstruction =
    "You will be given a question at the end, for which you are to select the most appropriate "
    "answer by indicating the associated letter. Please first output step-by-step reasoning about "
    "how to solve the question. Then, in the last sentence, output which answer is correct in the "
    "format of \"Therefore, the answer is ...\".";

constexpr const char* kCotLeadIn = "Let’s think step by step. To solve the question, we need to";

constexpr std::array<std::string_view, 6> kAbbreviations = {"e.g.", "i.e.", "etc.",
                                                            "mr.",  "dr.",  "vs."};

constexpr std::string_view kConclusionPattern = "the answer is";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string lower_copy(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](char c) { return lower(c); });
    return out;
}

std::string_view trim_view(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

struct Span {
    std::size_t begin;
    std::size_t end;  // one past the terminator
};

// True when the token ending at the terminator position is a known
// abbreviation ("e.g. something" must not split).
bool ends_with_abbreviation(std::string_view text, std::size_t term_pos) {
    std::size_t tok_begin = term_pos;
    while (tok_begin > 0 && !is_space(text[tok_begin - 1])) --tok_begin;
    const std::string token = lower_copy(text.substr(tok_begin, term_pos - tok_begin + 1));
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), token) != kAbbreviations.end();
}

std::vector<Span> segment_spans(std::string_view text) {
    std::vector<Span> spans;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        const bool at_end = i + 1 == text.size();
        if (!at_end && !is_space(text[i + 1])) continue;  // also keeps decimals intact
        if (c == '.') {
            if (!at_end && i > 0 && is_digit(text[i - 1]) && is_digit(text[i + 1])) continue;
            if (ends_with_abbreviation(text, i)) continue;
        }
        // [start, i] is a sentence; record it trimmed.
        std::size_t b = start;
        while (b <= i && is_space(text[b])) ++b;
        if (b <= i) spans.push_back({b, i + 1});
        start = i + 1;
    }
    if (start < text.size()) {
        std::string_view tail = trim_view(text.substr(start));
        if (!tail.empty()) {
            const std::size_t b = start + static_cast<std::size_t>(tail.data() - text.substr(start).data());
            spans.push_back({b, b + tail.size()});
        }
    }
    return spans;
}

bool matches_conclusion(std::string_view sentence) {
    return lower_copy(sentence).find(kConclusionPattern) != std::string::npos;
}

}  // namespace

std::string build_cot_prompt(const Question& q) {
    std::string prompt = kCotInstruction;
    prompt += "\n\n";
    if (q.facts) {
        for (const auto& f : *q.facts) prompt += "Facts: " + f + "\n";
    }
    prompt += "Question: " + q.text + "\n";
    prompt += "Answer choices: " + format_answer_choices(q) + "\n\n";
    prompt += kCotLeadIn;
    return prompt;
}

std::vector<std::string> segment_steps(std::string_view text) {
    std::vector<std::string> steps;
    for (const Span& s : segment_spans(text)) {
        steps.emplace_back(trim_view(text.substr(s.begin, s.end - s.begin)));
    }
    return steps;
}

SplitConclusion strip_conclusion(std::string_view raw_text) {
    SplitConclusion out;
    const auto spans = segment_spans(raw_text);
    if (spans.empty()) {
        out.body = std::string(trim_view(raw_text));
        return out;
    }
    const Span& last = spans.back();
    const std::string_view last_sentence = raw_text.substr(last.begin, last.end - last.begin);
    if (matches_conclusion(last_sentence)) {
        out.conclusion = std::string(trim_view(raw_text.substr(last.begin)));
        out.body = std::string(trim_view(raw_text.substr(0, last.begin)));
    } else {
        out.body = std::string(trim_view(raw_text));
    }
    return out;
}

Rationale make_rationale(std::string raw_text, const GenParams& params, std::string seed_tag,
                         bool truncated, ScoringBackend& scoring) {
    Rationale r;
    r.raw_text = std::move(raw_text);
    r.sample_params = params;
    r.seed_tag = std::move(seed_tag);
    r.truncated = truncated;

    if (trim_view(r.raw_text).empty()) {
        r.degenerate = true;
        return r;
    }
    r.steps = segment_steps(r.raw_text);
    auto split = strip_conclusion(r.raw_text);
    r.body = std::move(split.body);
    r.conclusion = std::move(split.conclusion);
    if (r.body.empty()) r.degenerate = true;  // nothing left once the conclusion is removed

    const auto scored = scoring.score({"", {r.raw_text}});
    if (scored.size() != 1) throw BackendError("token-count scoring returned wrong arity");
    r.token_count = static_cast<long>(scored[0].token_logprobs.size());
    return r;
}

std::vector<Rationale> sample_rationales(const Question& q, GenerationBackend& gen,
                                         ScoringBackend& scoring, const GenParams& params) {
    if (!params.valid()) throw std::invalid_argument("sample_rationales: invalid GenParams");
    const std::string prompt = build_cot_prompt(q);
    const GenerationResult result = gen.generate(prompt, params);
    const int expected = params.expected_samples();
    if (static_cast<int>(result.texts.size()) != expected)
        throw BackendError("generation backend returned " + std::to_string(result.texts.size()) +
                           " texts, expected " + std::to_string(expected));

    std::vector<Rationale> out;
    out.reserve(result.texts.size());
    for (std::size_t i = 0; i < result.texts.size(); ++i) {
        const bool truncated = i < result.truncated.size() && result.truncated[i];
        out.push_back(make_rationale(result.texts[i], params, "s" + std::to_string(i), truncated,
                                     scoring));
    }
    return out;
}

std::string cot_scoring_prompt(const Question& q, std::string_view body) {
    std::string prompt = build_cot_prompt(q);
    prompt += ' ';
    prompt += body;
    prompt += "\nTherefore, the answer is";
    return prompt;
}

std::string rationale_only_prompt(const Question& q, std::string_view body) {
    std::string prompt(body);
    prompt += "\nAnswer choices: " + format_answer_choices(q) + "\n";
    prompt += "Answer:";
    return prompt;
}

namespace {
VectorXd distribution_for_prompt(const Question& q, const std::string& prompt,
                                 ScoringBackend& scoring) {
    ScoreRequest req;
    req.prompt = prompt;
    req.completions.reserve(q.choices.size());
    for (const auto& c : q.choices) req.completions.push_back(belief::choice_completion(c));
    const auto scored = scoring.score(req);
    if (scored.size() != q.choices.size())
        throw BackendError("scoring backend returned wrong number of results");
    VectorXd avg(static_cast<Index>(scored.size()));
    for (std::size_t i = 0; i < scored.size(); ++i) avg[static_cast<Index>(i)] = scored[i].avg_logprob;
    return belief::answer_distribution(avg);
}
}  // namespace

VectorXd cot_answer_distribution(const Question& q, std::string_view body,
                                 ScoringBackend& scoring) {
    if (body.empty()) throw std::invalid_argument("cot_answer_distribution: empty body");
    return distribution_for_prompt(q, cot_scoring_prompt(q, body), scoring);
}

VectorXd rationale_only_distribution(const Question& q, std::string_view body,
                                     ScoringBackend& scoring) {
    if (body.empty()) throw std::invalid_argument("rationale_only_distribution: empty body");
    return distribution_for_prompt(q, rationale_only_prompt(q, body), scoring);
}

}  // namespace cotlens::cot
