#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotlens/backends.hpp"
#include "cotlens/eigen_types.hpp"
#include "cotlens/types.hpp"

namespace cotlens::cot {

// Zero-shot CoT prompt: instruction header, optional facts lines, question,
// option list, and the step-by-step lead-in the model continues from.
std::string build_cot_prompt(const Question& q);

// Deterministic sentence split on ./!/? followed by whitespace or end, with
// an abbreviation exception list and no split inside decimal numbers.
std::vector<std::string> segment_steps(std::string_view text);

struct SplitConclusion {
    std::string body;
    std::optional<std::string> conclusion;
};

// If the final sentence matches the conclusive pattern (case-insensitive
// "the answer is"), it is split off as the conclusion; otherwise the body is
// the whole text. Both parts are trimmed.
SplitConclusion strip_conclusion(std::string_view raw_text);

// Builds a Rationale from one generated text: segmentation, conclusion
// stripping, degenerate marking, and token counting through the scoring
// backend's tokenizer (empty prompt, the raw text as completion).
Rationale make_rationale(std::string raw_text, const GenParams& params, std::string seed_tag,
                         bool truncated, ScoringBackend& scoring);

// Generates params.expected_samples() texts and turns each into a Rationale.
std::vector<Rationale> sample_rationales(const Question& q, GenerationBackend& gen,
                                         ScoringBackend& scoring, const GenParams& params);

// Scoring prompt for P(A | Q, R): the CoT prompt, the conclusion-stripped
// body, then the instructed conclusion cue; completions are the choice texts.
std::string cot_scoring_prompt(const Question& q, std::string_view body);

// Scoring prompt for P(A | R): rationale body, the option list, "Answer:" —
// the question text itself is withheld.
std::string rationale_only_prompt(const Question& q, std::string_view body);

VectorXd cot_answer_distribution(const Question& q, std::string_view body,
                                 ScoringBackend& scoring);
VectorXd rationale_only_distribution(const Question& q, std::string_view body,
                                     ScoringBackend& scoring);

}  // namespace cotlens::cot
