#include "cotlens/mock_backends.hpp"

#include <fstream>

namespace cotlens {

using nlohmann::json;

std::string MockTables::key(std::string_view a, std::string_view b) {
    std::string k;
    k.reserve(a.size() + b.size() + 1);
    k.append(a);
    k.push_back('\x1f');
    k.append(b);
    return k;
}

namespace {
std::pair<std::string, std::string> split_key(const std::string& k) {
    const auto pos = k.find('\x1f');
    return {k.substr(0, pos), pos == std::string::npos ? std::string() : k.substr(pos + 1)};
}
}  // namespace

json MockTables::to_json() const {
    json j;
    auto& score_rows = j["score"] = json::array();
    for (const auto& [k, v] : score) {
        const auto [prompt, completion] = split_key(k);
        score_rows.push_back({{"prompt", prompt}, {"completion", completion}, {"token_logprobs", v}});
    }
    auto& gen_rows = j["generate"] = json::array();
    for (const auto& [prompt, script] : generate) {
        gen_rows.push_back(
            {{"prompt", prompt}, {"texts", script.texts}, {"truncated", script.truncated}});
    }
    auto& nli_rows = j["nli"] = json::array();
    for (const auto& [k, v] : nli) {
        const auto [premise, hypothesis] = split_key(k);
        nli_rows.push_back({{"premise", premise},
                            {"hypothesis", hypothesis},
                            {"scores", std::vector<double>{v[0], v[1], v[2]}}});
    }
    auto& judge_rows = j["judges"] = json::object();
    for (const auto& [judge_id, table] : judges) {
        auto& rows = judge_rows[judge_id] = json::array();
        for (const auto& [prompt, text] : table)
            rows.push_back({{"prompt", prompt}, {"text", text}});
    }
    return j;
}

MockTables MockTables::from_json(const json& j) {
    MockTables t;
    for (const auto& row : j.value("score", json::array())) {
        t.score[key(row.at("prompt").get<std::string>(), row.at("completion").get<std::string>())] =
            row.at("token_logprobs").get<std::vector<double>>();
    }
    for (const auto& row : j.value("generate", json::array())) {
        GenScript script;
        row.at("texts").get_to(script.texts);
        if (row.contains("truncated")) row.at("truncated").get_to(script.truncated);
        t.generate[row.at("prompt").get<std::string>()] = std::move(script);
    }
    for (const auto& row : j.value("nli", json::array())) {
        const auto scores = row.at("scores").get<std::vector<double>>();
        t.nli[key(row.at("premise").get<std::string>(), row.at("hypothesis").get<std::string>())] = {
            scores.at(0), scores.at(1), scores.at(2)};
    }
    if (j.contains("judges")) {
        for (const auto& [judge_id, rows] : j.at("judges").items()) {
            auto& table = t.judges[judge_id];
            for (const auto& row : rows)
                table[row.at("prompt").get<std::string>()] = row.at("text").get<std::string>();
        }
    }
    return t;
}

void MockTables::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write mock tables: " + file.string());
    out << to_json().dump() << '\n';
}

std::shared_ptr<MockTables> MockTables::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open mock tables: " + file.string());
    json j;
    in >> j;
    return std::make_shared<MockTables>(from_json(j));
}

std::vector<ScoredCompletion> MockScoringBackend::score(const ScoreRequest& req) {
    validate_score_request(req);
    std::vector<ScoredCompletion> out;
    out.reserve(req.completions.size());
    for (const auto& completion : req.completions) {
        const auto it = tables_->score.find(MockTables::key(req.prompt, completion));
        if (it == tables_->score.end())
            throw BackendError(id_ + ": no scripted score for completion \"" + completion + "\"");
        out.push_back(ScoredCompletion::from_tokens(it->second));
    }
    return out;
}

GenerationResult MockGenerationBackend::generate(const std::string& prompt,
                                                 const GenParams& params) {
    if (!params.valid()) throw BackendError(id_ + ": invalid generation params");
    const auto it = tables_->generate.find(prompt);
    if (it == tables_->generate.end()) throw BackendError(id_ + ": no scripted generation");
    const int n = params.expected_samples();
    if (static_cast<int>(it->second.texts.size()) < n)
        throw BackendError(id_ + ": script has fewer texts than requested samples");
    GenerationResult res;
    res.texts.assign(it->second.texts.begin(), it->second.texts.begin() + n);
    res.truncated.assign(n, false);
    for (int i = 0; i < n && i < static_cast<int>(it->second.truncated.size()); ++i)
        res.truncated[static_cast<std::size_t>(i)] = it->second.truncated[static_cast<std::size_t>(i)];
    return res;
}

GenerationResult MockJudgeBackend::generate(const std::string& prompt, const GenParams&) {
    const auto jt = tables_->judges.find(id_);
    if (jt == tables_->judges.end()) throw BackendError(id_ + ": judge has no script table");
    const auto it = jt->second.find(prompt);
    if (it == jt->second.end()) throw BackendError(id_ + ": no scripted judge reply");
    GenerationResult res;
    res.texts.push_back(it->second);
    res.truncated.push_back(false);
    return res;
}

std::vector<EntailmentScores> MockNliBackend::entail(std::span<const NliPair> pairs) {
    std::vector<EntailmentScores> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (p.premise.empty() || p.hypothesis.empty())
            throw BackendError(id_ + ": empty premise or hypothesis");
        const auto it = tables_->nli.find(MockTables::key(p.premise, p.hypothesis));
        if (it == tables_->nli.end())
            throw BackendError(id_ + ": no scripted entailment for premise \"" + p.premise + "\"");
        out.push_back(EntailmentScores::normalized(it->second[0], it->second[1], it->second[2]));
    }
    return out;
}

}  // namespace cotlens
