#pragma once

#include "cotlens/backends.hpp"
#include "cotlens/eigen_types.hpp"
#include "cotlens/types.hpp"

namespace cotlens::belief {

// Softmax of per-choice mean token log-likelihoods: the direct-answer
// distribution used as the internal-belief proxy. Numerically stable
// (max-subtracted); rejects non-finite input and fewer than two choices.
VectorXd answer_distribution(ConstRefVec avg_logliks);

// Shannon entropy of the distribution divided by log(n), in [0, 1] with the
// 0*log(0) = 0 convention. n >= 2 required.
double normalized_entropy(ConstRefVec probs);

// Best non-gold mean log-likelihood minus the gold one. Positive means the
// model is confidently wrong; identical whether computed from raw
// log-likelihoods or log-softmax probabilities.
double empirical_difficulty(ConstRefVec avg_logliks, Index gold_index);

// log(sum(exp(x))), max-subtracted for stability. Distinguishes "every option
// plausible" from "no option plausible" at equal entropy.
double log_sum_exp(ConstRefVec values);

// Argmax with ties broken toward the lowest index.
Index argmax_lowest(ConstRefVec values);

// Prompt for scoring a choice as a direct answer: optional facts lines, the
// question, the rendered option list, then "Answer:". The scored completion
// for a choice is choice_completion().
std::string direct_prompt(const Question& q);
std::string choice_completion(const Choice& c);

// Scores every choice of the question and assembles the full profile.
BeliefProfile build_belief_profile(const Question& q, ScoringBackend& scoring);

// Derives the distribution-valued fields from avg_logliks; used both by
// build_belief_profile and when replaying stored log-likelihoods.
BeliefProfile profile_from_logliks(const Question& q, ConstRefVec avg_logliks);

}  // namespace cotlens::belief
