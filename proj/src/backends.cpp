#include "cotlens/backends.hpp"

#include <cmath>

namespace cotlens {

ScoredCompletion ScoredCompletion::from_tokens(std::vector<double> tokens) {
    if (tokens.empty()) throw BackendError("scored completion has no tokens");
    long double sum = 0.0L;
    for (double t : tokens) {
        if (!std::isfinite(t)) throw BackendError("non-finite token log-probability");
        sum += t;
    }
    ScoredCompletion out;
    out.avg_logprob = static_cast<double>(sum / static_cast<long double>(tokens.size()));
    out.token_logprobs = std::move(tokens);
    return out;
}

EntailmentScores EntailmentScores::normalized(double e, double n, double c) {
    if (!(std::isfinite(e) && std::isfinite(n) && std::isfinite(c)))
        throw BackendError("non-finite entailment scores");
    if (e < 0.0 || n < 0.0 || c < 0.0) throw BackendError("negative entailment scores");
    const double sum = e + n + c;
    if (sum <= 0.0) throw BackendError("all-zero entailment scores");
    return EntailmentScores{e / sum, n / sum, c / sum};
}

EntailmentScores NliBackend::entail_one(const std::string& premise, const std::string& hypothesis) {
    const NliPair pair{premise, hypothesis};
    const auto result = entail(std::span<const NliPair>(&pair, 1));
    if (result.size() != 1) throw BackendError("NLI backend returned wrong arity");
    return result.front();
}

void validate_score_request(const ScoreRequest& req) {
    if (req.completions.empty()) throw BackendError("score request has no completions");
    for (const auto& c : req.completions)
        if (c.empty()) throw BackendError("score request has an empty completion");
}

}  // namespace cotlens
