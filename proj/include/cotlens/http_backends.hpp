#pragma once

#include <chrono>
#include <string>

#include "cotlens/backends.hpp"

namespace cotlens {

/// Transport errors and 5xx responses are retried with exponential backoff;
/// 4xx responses fail immediately. After the last attempt the affected
/// question is failed, not the run.
struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
};

struct HttpEndpoint {
    std::string id;        // backend identity used for cache keys and manifests
    std::string base_url;  // scheme://host[:port][/prefix]
    std::string token;     // sent as "Authorization: Bearer <token>" when set
    RetryPolicy retry;
};

/// POST {base}/score {"prompt","completions":[...]} ->
/// [{"token_logprobs":[...]}, ...]; avg_logprob is recomputed locally from the
/// token values.
class HttpScoringBackend : public ScoringBackend {
  public:
    explicit HttpScoringBackend(HttpEndpoint ep) : ep_(std::move(ep)) {}
    std::string identity() const override { return ep_.id; }
    std::vector<ScoredCompletion> score(const ScoreRequest& req) override;

  private:
    HttpEndpoint ep_;
};

/// POST {base}/generate {"prompt","mode","temperature","top_p","max_tokens","n"}
/// -> {"texts":[...],"truncated":[...]}.
class HttpGenerationBackend : public GenerationBackend {
  public:
    explicit HttpGenerationBackend(HttpEndpoint ep) : ep_(std::move(ep)) {}
    std::string identity() const override { return ep_.id; }
    GenerationResult generate(const std::string& prompt, const GenParams& params) override;

  private:
    HttpEndpoint ep_;
};

/// POST {base}/nli {"pairs":[{"premise","hypothesis"},...]} ->
/// [{"entail","neutral","contradict"}, ...]; triples are renormalized.
class HttpNliBackend : public NliBackend {
  public:
    explicit HttpNliBackend(HttpEndpoint ep) : ep_(std::move(ep)) {}
    std::string identity() const override { return ep_.id; }
    std::vector<EntailmentScores> entail(std::span<const NliPair> pairs) override;

  private:
    HttpEndpoint ep_;
};

}  // namespace cotlens
