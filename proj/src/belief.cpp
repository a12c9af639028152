#include "cotlens/belief.hpp"

#include <cmath>
#include <stdexcept>

namespace cotlens::belief {

VectorXd answer_distribution(ConstRefVec avg_logliks) {
    if (avg_logliks.size() < 2)
        throw std::invalid_argument("answer_distribution: need at least 2 choices");
    if (!avg_logliks.allFinite())
        throw std::invalid_argument("answer_distribution: non-finite log-likelihood");
    const double m = avg_logliks.maxCoeff();
    VectorXd e = (avg_logliks.array() - m).exp();
    return e / e.sum();
}

double normalized_entropy(ConstRefVec probs) {
    const Index n = probs.size();
    if (n < 2) throw std::invalid_argument("normalized_entropy: undefined for n < 2");
    // Exactly uniform is exactly maximum entropy; bypass the log round-trip.
    if (probs.maxCoeff() == probs.minCoeff()) return 1.0;
    long double h = 0.0L;
    for (Index i = 0; i < n; ++i) {
        const double p = probs[i];
        if (p > 0.0) h -= static_cast<long double>(p) * std::log(p);
    }
    const long double c = std::log(static_cast<double>(n));
    double value = static_cast<double>(h / c);
    if (value < 0.0) value = 0.0;
    if (value > 1.0) value = 1.0;
    return value;
}

double empirical_difficulty(ConstRefVec avg_logliks, Index gold_index) {
    const Index n = avg_logliks.size();
    if (n < 2) throw std::invalid_argument("empirical_difficulty: need at least 2 choices");
    if (gold_index < 0 || gold_index >= n)
        throw std::invalid_argument("empirical_difficulty: gold index out of range");
    double best_other = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
        if (i == gold_index) continue;
        best_other = std::max(best_other, avg_logliks[i]);
    }
    return best_other - avg_logliks[gold_index];
}

double log_sum_exp(ConstRefVec values) {
    if (values.size() == 0) throw std::invalid_argument("log_sum_exp: empty vector");
    if (!values.allFinite()) throw std::invalid_argument("log_sum_exp: non-finite input");
    const double m = values.maxCoeff();
    return m + std::log((values.array() - m).exp().sum());
}

Index argmax_lowest(ConstRefVec values) {
    Index best = 0;
    for (Index i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

std::string direct_prompt(const Question& q) {
    std::string prompt;
    if (q.facts) {
        for (const auto& f : *q.facts) prompt += "Facts: " + f + "\n";
    }
    prompt += "Question: " + q.text + "\n";
    prompt += "Answer choices: " + format_answer_choices(q) + "\n";
    prompt += "Answer:";
    return prompt;
}

std::string choice_completion(const Choice& c) { return " " + c.text; }

BeliefProfile profile_from_logliks(const Question& q, ConstRefVec avg_logliks) {
    BeliefProfile profile;
    profile.question_id = q.id;
    profile.avg_logliks = avg_logliks;
    profile.probs = answer_distribution(avg_logliks);
    profile.entropy = normalized_entropy(profile.probs);
    profile.difficulty = empirical_difficulty(avg_logliks, q.gold_index);
    profile.lse = log_sum_exp(avg_logliks);
    profile.direct_pred_index = argmax_lowest(profile.probs);
    return profile;
}

BeliefProfile build_belief_profile(const Question& q, ScoringBackend& scoring) {
    ScoreRequest req;
    req.prompt = direct_prompt(q);
    req.completions.reserve(q.choices.size());
    for (const auto& c : q.choices) req.completions.push_back(choice_completion(c));

    const auto scored = scoring.score(req);
    if (scored.size() != q.choices.size())
        throw BackendError("scoring backend returned " + std::to_string(scored.size()) +
                           " results for " + std::to_string(q.choices.size()) + " choices");
    VectorXd avg(static_cast<Index>(scored.size()));
    for (std::size_t i = 0; i < scored.size(); ++i) avg[static_cast<Index>(i)] = scored[i].avg_logprob;
    return profile_from_logliks(q, avg);
}

}  // namespace cotlens::belief
