#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cotlens/backends.hpp"
#include "cotlens/types.hpp"

namespace cotlens::judge {

// Prompt asking a judge model which answer the rationale supports; ends with
// the instructed "Therefore, the answer is ..." output format.
std::string build_judge_prompt(const Question& q, const Rationale& rationale);

// Scans for the last "the answer is" (case-insensitive) and reads an optional
// parenthesized label or a bare label token after it. Absent when no known
// label can be extracted.
std::optional<std::string> parse_judge_answer(std::string_view text,
                                              std::span<const std::string> labels);

struct JudgeVote {
    std::string judge_id;
    std::optional<std::string> label;  // absent: parse failure
    bool transport_ok = true;
};

struct JudgeOutcome {
    std::vector<JudgeVote> votes;
    std::optional<std::string> a_inter_label;
    std::optional<int> a_inter_index;
};

// Queries every judge, drops parse failures, and returns the modal label.
// Exact ties go to the label voted by the earliest judge in the configured
// order. Zero parseable votes leave the result absent; all judges failing
// transport raises BackendError (record-level failure).
JudgeOutcome extract_a_inter(const Question& q, const Rationale& rationale,
                             std::span<GenerationBackend* const> judges,
                             const GenParams& judge_params);

}  // namespace cotlens::judge
