#include "cotlens/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "cotlens/belief.hpp"

namespace cotlens::metrics {

std::string hypothesis_explains(std::string_view answer_text) {
    return "the sentence is talking about " + std::string(answer_text);
}

std::string hypothesis_concludes(std::string_view answer_text) {
    return "the answer is " + std::string(answer_text);
}

std::string hypothesis_rejects(std::string_view answer_text) {
    return "the answer is not " + std::string(answer_text);
}

VectorXd step_entailments(std::span<const std::string> steps, const std::string& hypothesis,
                          NliBackend& nli) {
    if (steps.empty()) throw std::invalid_argument("step_entailments: no steps");
    std::vector<NliPair> pairs;
    pairs.reserve(steps.size());
    for (const auto& s : steps) pairs.push_back({s, hypothesis});
    const auto scores = nli.entail(pairs);
    VectorXd out(static_cast<Index>(scores.size()));
    for (std::size_t i = 0; i < scores.size(); ++i) out[static_cast<Index>(i)] = scores[i].entail;
    return out;
}

namespace {

void check_a_inter(const Question& q, int a_inter_index) {
    if (a_inter_index < 0 || a_inter_index >= q.num_choices())
        throw std::invalid_argument("a_inter index out of range");
}

// Mean entailment of hypothesis(alternative) over the (M-1) alternatives and
// all steps; also reports whether any single pair crosses the threshold.
std::pair<double, bool> alternatives_mean(std::span<const std::string> steps, const Question& q,
                                          int a_inter_index, NliBackend& nli,
                                          std::string (*hypothesis)(std::string_view)) {
    check_a_inter(q, a_inter_index);
    if (q.num_choices() < 2) throw std::invalid_argument("need at least 2 choices");
    long double sum = 0.0L;
    double max_seen = 0.0;
    std::size_t count = 0;
    for (int j = 0; j < q.num_choices(); ++j) {
        if (j == a_inter_index) continue;
        const VectorXd e = step_entailments(steps, hypothesis(q.choices[j].text), nli);
        for (Index i = 0; i < e.size(); ++i) {
            sum += e[i];
            max_seen = std::max(max_seen, e[i]);
            ++count;
        }
    }
    return {static_cast<double>(sum / static_cast<long double>(count)), max_seen >= 0.5};
}

}  // namespace

double relevance(std::span<const std::string> steps, const Choice& a_inter, NliBackend& nli) {
    const VectorXd e = step_entailments(steps, hypothesis_explains(a_inter.text), nli);
    return e.mean();
}

double relevance_neg(std::span<const std::string> steps, const Question& q, int a_inter_index,
                     NliBackend& nli) {
    return alternatives_mean(steps, q, a_inter_index, nli, &hypothesis_explains).first;
}

double explicitness(std::span<const std::string> steps, const Choice& a_inter, NliBackend& nli) {
    const VectorXd e = step_entailments(steps, hypothesis_concludes(a_inter.text), nli);
    return e.mean();
}

double explicitness_neg(std::span<const std::string> steps, const Question& q, int a_inter_index,
                        NliBackend& nli) {
    return alternatives_mean(steps, q, a_inter_index, nli, &hypothesis_rejects).first;
}

double informativeness(ConstRefVec direct_probs, ConstRefVec cot_probs, Index a_inter_index) {
    if (a_inter_index < 0 || a_inter_index >= direct_probs.size() ||
        direct_probs.size() != cot_probs.size())
        throw std::invalid_argument("informativeness: bad index or mismatched distributions");
    // Softmax outputs are strictly positive, so the ratio is well defined.
    return std::log(cot_probs[a_inter_index] / direct_probs[a_inter_index]);
}

int sufficiency(ConstRefVec rationale_only_probs, ConstRefVec cot_probs) {
    return belief::argmax_lowest(rationale_only_probs) == belief::argmax_lowest(cot_probs) ? 1 : 0;
}

StageOutcomes stage_outcomes(ConstRefVec direct_probs, ConstRefVec cot_probs, Index a_inter_index,
                             Index gold_index) {
    StageOutcomes out;
    const Index direct_pred = belief::argmax_lowest(direct_probs);
    const Index cot_pred = belief::argmax_lowest(cot_probs);
    out.consistency_inter = direct_pred == a_inter_index ? 1 : 0;
    out.performance_inter = cot_pred == a_inter_index ? 1 : 0;
    out.performance_e2e = cot_pred == gold_index ? 1 : 0;
    return out;
}

bool any_above_threshold(ConstRefVec entailments, double threshold) {
    return entailments.size() > 0 && entailments.maxCoeff() >= threshold;
}

MetricRecord compute_metric_record(const Question& q, const Rationale& rationale,
                                   int rationale_index, ConstRefVec direct_probs,
                                   ConstRefVec cot_probs, ConstRefVec rationale_only_probs,
                                   std::optional<int> a_inter_index, NliBackend& nli) {
    MetricRecord rec;
    rec.question_id = q.id;
    rec.rationale_index = rationale_index;
    rec.length = rationale.token_count;
    rec.cot_probs = to_std(cot_probs);
    rec.sufficiency = sufficiency(rationale_only_probs, cot_probs);
    rec.performance_e2e =
        belief::argmax_lowest(cot_probs) == static_cast<Index>(q.gold_index) ? 1 : 0;

    if (!a_inter_index) return rec;

    const int a = *a_inter_index;
    check_a_inter(q, a);
    rec.a_inter_index = a;

    const auto body_steps = rationale.body_steps();
    const auto steps = std::span<const std::string>(body_steps);
    const VectorXd rel = step_entailments(steps, hypothesis_explains(q.choices[a].text), nli);
    rec.relevance = rel.mean();
    rec.relevance_neg = relevance_neg(steps, q, a, nli);
    const VectorXd expl = step_entailments(steps, hypothesis_concludes(q.choices[a].text), nli);
    rec.explicitness = expl.mean();
    rec.explicitness_any = any_above_threshold(expl) ? 1 : 0;
    const auto neg = alternatives_mean(steps, q, a, nli, &hypothesis_rejects);
    rec.explicitness_neg = neg.first;
    rec.explicitness_neg_any = neg.second ? 1 : 0;
    rec.informativeness = informativeness(direct_probs, cot_probs, a);

    const StageOutcomes outcomes =
        stage_outcomes(direct_probs, cot_probs, a, static_cast<Index>(q.gold_index));
    rec.consistency_inter = outcomes.consistency_inter;
    rec.performance_inter = outcomes.performance_inter;
    rec.performance_e2e = outcomes.performance_e2e;
    return rec;
}

}  // namespace cotlens::metrics
