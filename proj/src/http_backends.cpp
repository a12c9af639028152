#include "cotlens/http_backends.hpp"

#include <httplib.h>

#include <thread>

#include "cotlens/logging.hpp"

namespace cotlens {

using nlohmann::json;

namespace {

struct SplitUrl {
    std::string host;  // scheme://host[:port], consumable by httplib::Client
    std::string prefix;
};

SplitUrl split_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw BackendError("backend URL must include a scheme: " + base_url);
    const auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

json post_json(const HttpEndpoint& ep, const std::string& path, const json& body) {
    const SplitUrl url = split_base_url(ep.base_url);
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt < ep.retry.attempts; ++attempt) {
        if (attempt > 0) {
            const auto delay = ep.retry.initial_backoff * (1 << (attempt - 1));
            log_warn(ep.id + ": retrying " + path + " after " + last_error + " (attempt " +
                     std::to_string(attempt + 1) + ")");
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(url.host);
        client.set_connection_timeout(std::chrono::seconds(10));
        client.set_read_timeout(std::chrono::seconds(300));
        httplib::Headers headers;
        if (!ep.token.empty()) headers.emplace("Authorization", "Bearer " + ep.token);

        auto res = client.Post(url.prefix + path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status >= 500) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendError(ep.id + ": " + path + " returned status " +
                               std::to_string(res->status));
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw BackendError(ep.id + ": invalid JSON from " + path + ": " + e.what());
        }
    }
    throw BackendError(ep.id + ": " + path + " failed after " + std::to_string(ep.retry.attempts) +
                       " attempts: " + last_error);
}

}  // namespace

std::vector<ScoredCompletion> HttpScoringBackend::score(const ScoreRequest& req) {
    validate_score_request(req);
    const json body{{"prompt", req.prompt}, {"completions", req.completions}};
    const json res = post_json(ep_, "/score", body);
    if (!res.is_array() || res.size() != req.completions.size())
        throw BackendError(ep_.id + ": /score returned mismatched result count");
    std::vector<ScoredCompletion> out;
    out.reserve(res.size());
    for (const auto& item : res)
        out.push_back(ScoredCompletion::from_tokens(item.at("token_logprobs").get<std::vector<double>>()));
    return out;
}

GenerationResult HttpGenerationBackend::generate(const std::string& prompt,
                                                 const GenParams& params) {
    if (!params.valid()) throw BackendError(ep_.id + ": invalid generation params");
    const json body{{"prompt", prompt},
                    {"mode", to_string(params.mode)},
                    {"temperature", params.temperature},
                    {"top_p", params.top_p},
                    {"max_tokens", params.max_tokens},
                    {"n", params.expected_samples()}};
    const json res = post_json(ep_, "/generate", body);
    GenerationResult out;
    res.at("texts").get_to(out.texts);
    if (static_cast<int>(out.texts.size()) != params.expected_samples())
        throw BackendError(ep_.id + ": /generate returned " + std::to_string(out.texts.size()) +
                           " texts, expected " + std::to_string(params.expected_samples()));
    out.truncated.assign(out.texts.size(), false);
    if (res.contains("truncated")) {
        const auto flags = res.at("truncated").get<std::vector<bool>>();
        for (std::size_t i = 0; i < flags.size() && i < out.truncated.size(); ++i)
            out.truncated[i] = flags[i];
    }
    return out;
}

std::vector<EntailmentScores> HttpNliBackend::entail(std::span<const NliPair> pairs) {
    json pair_rows = json::array();
    for (const auto& p : pairs) {
        if (p.premise.empty() || p.hypothesis.empty())
            throw BackendError(ep_.id + ": empty premise or hypothesis");
        pair_rows.push_back({{"premise", p.premise}, {"hypothesis", p.hypothesis}});
    }
    const json res = post_json(ep_, "/nli", json{{"pairs", pair_rows}});
    if (!res.is_array() || res.size() != pairs.size())
        throw BackendError(ep_.id + ": /nli returned mismatched result count");
    std::vector<EntailmentScores> out;
    out.reserve(res.size());
    for (const auto& item : res) {
        out.push_back(EntailmentScores::normalized(item.at("entail").get<double>(),
                                                   item.at("neutral").get<double>(),
                                                   item.at("contradict").get<double>()));
    }
    return out;
}

}  // namespace cotlens
