#pragma once

#include <span>
#include <string>
#include <string_view>

#include "cotlens/backends.hpp"
#include "cotlens/eigen_types.hpp"
#include "cotlens/types.hpp"

namespace cotlens::metrics {

// NLI hypothesis templates, filled with the choice's surface text.
std::string hypothesis_explains(std::string_view answer_text);
std::string hypothesis_concludes(std::string_view answer_text);
std::string hypothesis_rejects(std::string_view answer_text);

// Entailment probability of one hypothesis against every step, in step order.
VectorXd step_entailments(std::span<const std::string> steps, const std::string& hypothesis,
                          NliBackend& nli);

// Mean step-level entailment of "the sentence is talking about {A_inter}".
double relevance(std::span<const std::string> steps, const Choice& a_inter, NliBackend& nli);

// Mean entailment of the explain hypothesis over the (M-1) alternatives and
// all steps.
double relevance_neg(std::span<const std::string> steps, const Question& q, int a_inter_index,
                     NliBackend& nli);

// Mean step-level entailment of "the answer is {A_inter}".
double explicitness(std::span<const std::string> steps, const Choice& a_inter, NliBackend& nli);

// Mean entailment of "the answer is not {alternative}" over alternatives and
// steps.
double explicitness_neg(std::span<const std::string> steps, const Question& q, int a_inter_index,
                        NliBackend& nli);

// Pointwise mutual information log[P(A_inter|Q,R) / P(A_inter|Q)], nats.
double informativeness(ConstRefVec direct_probs, ConstRefVec cot_probs, Index a_inter_index);

// Whether the rationale alone selects the same answer as question+rationale.
int sufficiency(ConstRefVec rationale_only_probs, ConstRefVec cot_probs);

struct StageOutcomes {
    int consistency_inter = 0;  // argmax P(A|Q) == A_inter
    int performance_inter = 0;  // argmax P(A|Q,R) == A_inter
    int performance_e2e = 0;    // argmax P(A|Q,R) == gold
};

StageOutcomes stage_outcomes(ConstRefVec direct_probs, ConstRefVec cot_probs, Index a_inter_index,
                             Index gold_index);

// Boolean forms used for explicitness grouping: at least one step crosses the
// NLI decision boundary.
bool any_above_threshold(ConstRefVec entailments, double threshold = 0.5);

// Computes the full record for one (question, rationale) pair.
// a_inter_index absent leaves the judge-dependent fields unset.
MetricRecord compute_metric_record(const Question& q, const Rationale& rationale,
                                   int rationale_index, ConstRefVec direct_probs,
                                   ConstRefVec cot_probs, ConstRefVec rationale_only_probs,
                                   std::optional<int> a_inter_index, NliBackend& nli);

}  // namespace cotlens::metrics
