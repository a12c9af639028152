#include "cotlens/types.hpp"

#include <stdexcept>

namespace cotlens {

using nlohmann::json;

std::vector<std::string> Question::labels() const {
    std::vector<std::string> out;
    out.reserve(choices.size());
    for (const auto& c : choices) out.push_back(c.label);
    return out;
}

bool GenParams::valid() const {
    if (max_tokens <= 0) return false;
    if (mode == Mode::Nucleus) {
        if (!(temperature > 0.0)) return false;
        if (!(top_p > 0.0 && top_p <= 1.0)) return false;
        if (n_samples < 1) return false;
    }
    return true;
}

std::string to_string(GenParams::Mode mode) {
    return mode == GenParams::Mode::Greedy ? "greedy" : "nucleus";
}

GenParams::Mode gen_mode_from_string(const std::string& s) {
    if (s == "greedy") return GenParams::Mode::Greedy;
    if (s == "nucleus") return GenParams::Mode::Nucleus;
    throw std::invalid_argument("unknown generation mode: " + s);
}

std::string format_answer_choices(const Question& q) {
    std::string out;
    for (std::size_t i = 0; i < q.choices.size(); ++i) {
        if (i > 0) out += ' ';
        out += '(' + q.choices[i].label + ") " + q.choices[i].text;
    }
    return out;
}

void to_json(json& j, const Choice& c) { j = json{{"label", c.label}, {"text", c.text}}; }

void from_json(const json& j, Choice& c) {
    j.at("label").get_to(c.label);
    j.at("text").get_to(c.text);
}

void to_json(json& j, const GenParams& p) {
    j = json{{"mode", to_string(p.mode)},
             {"temperature", p.temperature},
             {"top_p", p.top_p},
             {"max_tokens", p.max_tokens},
             {"n_samples", p.n_samples}};
}

void from_json(const json& j, GenParams& p) {
    p.mode = gen_mode_from_string(j.at("mode").get<std::string>());
    j.at("temperature").get_to(p.temperature);
    j.at("top_p").get_to(p.top_p);
    j.at("max_tokens").get_to(p.max_tokens);
    j.at("n_samples").get_to(p.n_samples);
}

void to_json(json& j, const BeliefProfile& b) {
    j = json{{"question_id", b.question_id},
             {"avg_logliks", to_std(b.avg_logliks)},
             {"probs", to_std(b.probs)},
             {"entropy", b.entropy},
             {"difficulty", b.difficulty},
             {"lse", b.lse},
             {"direct_pred_index", static_cast<long>(b.direct_pred_index)}};
}

void from_json(const json& j, BeliefProfile& b) {
    j.at("question_id").get_to(b.question_id);
    b.avg_logliks = to_vector(j.at("avg_logliks").get<std::vector<double>>());
    b.probs = to_vector(j.at("probs").get<std::vector<double>>());
    j.at("entropy").get_to(b.entropy);
    j.at("difficulty").get_to(b.difficulty);
    j.at("lse").get_to(b.lse);
    b.direct_pred_index = j.at("direct_pred_index").get<long>();
}

void to_json(json& j, const Rationale& r) {
    j = json{{"raw_text", r.raw_text},
             {"steps", r.steps},
             {"body", r.body},
             {"conclusion", r.conclusion ? json(*r.conclusion) : json(nullptr)},
             {"conclusion_found", r.conclusion_found()},
             {"degenerate", r.degenerate},
             {"truncated", r.truncated},
             {"token_count", r.token_count},
             {"sample_params", r.sample_params},
             {"seed_tag", r.seed_tag}};
}

void from_json(const json& j, Rationale& r) {
    j.at("raw_text").get_to(r.raw_text);
    j.at("steps").get_to(r.steps);
    j.at("body").get_to(r.body);
    if (!j.at("conclusion").is_null()) r.conclusion = j.at("conclusion").get<std::string>();
    j.at("degenerate").get_to(r.degenerate);
    j.at("truncated").get_to(r.truncated);
    j.at("token_count").get_to(r.token_count);
    j.at("sample_params").get_to(r.sample_params);
    j.at("seed_tag").get_to(r.seed_tag);
}

namespace {
template <class T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <class T>
void get_opt(const json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}
}  // namespace

void to_json(json& j, const MetricRecord& m) {
    j = json{{"question_id", m.question_id},
             {"rationale_index", m.rationale_index},
             {"a_inter_index", opt_json(m.a_inter_index)},
             {"length", m.length},
             {"relevance", opt_json(m.relevance)},
             {"relevance_neg", opt_json(m.relevance_neg)},
             {"explicitness", opt_json(m.explicitness)},
             {"explicitness_neg", opt_json(m.explicitness_neg)},
             {"explicitness_any", opt_json(m.explicitness_any)},
             {"explicitness_neg_any", opt_json(m.explicitness_neg_any)},
             {"informativeness", opt_json(m.informativeness)},
             {"sufficiency", m.sufficiency},
             {"consistency_inter", opt_json(m.consistency_inter)},
             {"performance_inter", opt_json(m.performance_inter)},
             {"performance_e2e", m.performance_e2e},
             {"cot_probs", m.cot_probs}};
}

void from_json(const json& j, MetricRecord& m) {
    j.at("question_id").get_to(m.question_id);
    j.at("rationale_index").get_to(m.rationale_index);
    get_opt(j, "a_inter_index", m.a_inter_index);
    j.at("length").get_to(m.length);
    get_opt(j, "relevance", m.relevance);
    get_opt(j, "relevance_neg", m.relevance_neg);
    get_opt(j, "explicitness", m.explicitness);
    get_opt(j, "explicitness_neg", m.explicitness_neg);
    get_opt(j, "explicitness_any", m.explicitness_any);
    get_opt(j, "explicitness_neg_any", m.explicitness_neg_any);
    get_opt(j, "informativeness", m.informativeness);
    j.at("sufficiency").get_to(m.sufficiency);
    get_opt(j, "consistency_inter", m.consistency_inter);
    get_opt(j, "performance_inter", m.performance_inter);
    j.at("performance_e2e").get_to(m.performance_e2e);
    j.at("cot_probs").get_to(m.cot_probs);
}

}  // namespace cotlens
