#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotlens/types.hpp"

namespace cotlens {

/// Raised when a backend cannot produce a usable response (transport failure
/// after retries, malformed payload, missing mock script). Callers fail the
/// affected question or record, never the whole run.
class BackendError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ScoreRequest {
    std::string prompt;
    std::vector<std::string> completions;
};

struct ScoredCompletion {
    std::vector<double> token_logprobs;  // nats
    double avg_logprob = 0.0;

    static ScoredCompletion from_tokens(std::vector<double> tokens);
};

struct EntailmentScores {
    double entail = 0.0;
    double neutral = 0.0;
    double contradict = 0.0;

    // Accepts any non-negative triple and renormalizes; all-zero is rejected.
    static EntailmentScores normalized(double e, double n, double c);
};

struct NliPair {
    std::string premise;
    std::string hypothesis;
};

struct GenerationResult {
    std::vector<std::string> texts;
    std::vector<bool> truncated;  // aligned with texts
};

class ScoringBackend {
  public:
    virtual ~ScoringBackend() = default;
    virtual std::string identity() const = 0;
    // One ScoredCompletion per input completion, order-preserving.
    virtual std::vector<ScoredCompletion> score(const ScoreRequest& req) = 0;
};

class GenerationBackend {
  public:
    virtual ~GenerationBackend() = default;
    virtual std::string identity() const = 0;
    // Returns exactly params.expected_samples() texts.
    virtual GenerationResult generate(const std::string& prompt, const GenParams& params) = 0;
};

class NliBackend {
  public:
    virtual ~NliBackend() = default;
    virtual std::string identity() const = 0;
    // Result order matches input order.
    virtual std::vector<EntailmentScores> entail(std::span<const NliPair> pairs) = 0;

    EntailmentScores entail_one(const std::string& premise, const std::string& hypothesis);
};

void validate_score_request(const ScoreRequest& req);

}  // namespace cotlens
