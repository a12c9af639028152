#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "cotlens/eigen_types.hpp"

namespace cotlens {

/// One answer option of a multiple-choice question.
struct Choice {
    std::string label;  // normalized to a lowercase single token at ingestion
    std::string text;

    bool operator==(const Choice&) const = default;
};

/// A multiple-choice item. `gold_index` points into `choices`; -1 marks an
/// unresolved gold label (caught by validation).
struct Question {
    std::string id;
    std::string text;
    std::vector<Choice> choices;
    int gold_index = -1;
    std::optional<std::vector<std::string>> facts;

    int num_choices() const { return static_cast<int>(choices.size()); }
    std::vector<std::string> labels() const;

    bool operator==(const Question&) const = default;
};

/// Decoding parameters for a generation backend.
struct GenParams {
    enum class Mode { Greedy, Nucleus };

    Mode mode = Mode::Nucleus;
    double temperature = 0.9;
    double top_p = 0.9;
    int max_tokens = 512;
    int n_samples = 10;

    bool valid() const;
    // Number of texts a conforming backend returns for these params.
    int expected_samples() const { return mode == Mode::Greedy ? 1 : n_samples; }

    bool operator==(const GenParams&) const = default;
};

std::string to_string(GenParams::Mode mode);
GenParams::Mode gen_mode_from_string(const std::string& s);

/// Per-question belief proxies derived from the direct-answer pass.
struct BeliefProfile {
    std::string question_id;
    VectorXd avg_logliks;  // per-choice mean token log-likelihood, nats
    VectorXd probs;        // softmax(avg_logliks)
    double entropy = 0.0;  // normalized to [0,1]
    double difficulty = 0.0;
    double lse = 0.0;
    Index direct_pred_index = 0;
};

/// One sampled chain-of-thought.
struct Rationale {
    std::string raw_text;
    std::vector<std::string> steps;
    std::string body;  // raw_text with the conclusive sentence removed
    std::optional<std::string> conclusion;
    bool degenerate = false;  // empty generation or nothing left after stripping
    bool truncated = false;
    long token_count = 0;
    GenParams sample_params;
    std::string seed_tag;

    bool conclusion_found() const { return conclusion.has_value(); }
    // Steps without the trailing conclusive sentence; attribute metrics run
    // over these, since the instructed conclusion would trivially dominate
    // them.
    std::vector<std::string> body_steps() const {
        if (!conclusion || steps.empty()) return steps;
        return std::vector<std::string>(steps.begin(), steps.end() - 1);
    }
};

/// Attribute and stage-outcome values for one (question, rationale) pair.
/// Fields that need the judged intermediate answer are absent when no judge
/// vote could be parsed.
struct MetricRecord {
    std::string question_id;
    int rationale_index = 0;
    std::optional<int> a_inter_index;
    long length = 0;
    std::optional<double> relevance;
    std::optional<double> relevance_neg;
    std::optional<double> explicitness;
    std::optional<double> explicitness_neg;
    std::optional<int> explicitness_any;      // max step entailment >= 0.5
    std::optional<int> explicitness_neg_any;  // max rejection entailment >= 0.5
    std::optional<double> informativeness;
    int sufficiency = 0;
    std::optional<int> consistency_inter;
    std::optional<int> performance_inter;
    int performance_e2e = 0;
    std::vector<double> cot_probs;
};

// Renders "(a) text (b) text ..." the way every prompt in the pipeline
// presents the options.
std::string format_answer_choices(const Question& q);

// JSON bindings (run records, dataset rows, config snapshots).
void to_json(nlohmann::json& j, const Choice& c);
void from_json(const nlohmann::json& j, Choice& c);
void to_json(nlohmann::json& j, const GenParams& p);
void from_json(const nlohmann::json& j, GenParams& p);
void to_json(nlohmann::json& j, const BeliefProfile& b);
void from_json(const nlohmann::json& j, BeliefProfile& b);
void to_json(nlohmann::json& j, const Rationale& r);
void from_json(const nlohmann::json& j, Rationale& r);
void to_json(nlohmann::json& j, const MetricRecord& m);
void from_json(const nlohmann::json& j, MetricRecord& m);

}  // namespace cotlens
