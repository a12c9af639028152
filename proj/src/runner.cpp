#include "cotlens/runner.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>

#include "cotlens/belief.hpp"
#include "cotlens/cot.hpp"
#include "cotlens/dataset.hpp"
#include "cotlens/http_backends.hpp"
#include "cotlens/judge.hpp"
#include "cotlens/logging.hpp"
#include "cotlens/metrics.hpp"
#include "cotlens/mock_backends.hpp"
#include "cotlens/parallel.hpp"

namespace cotlens::runner {

using nlohmann::json;
using store::JsonlWriter;
using store::RunDir;

std::filesystem::path Config::resolve(const std::string& p) const {
    std::filesystem::path path(p);
    if (path.is_absolute() || config_dir.empty()) return path;
    return config_dir / path;
}

namespace {

BackendConfig parse_backend(const json& j) {
    BackendConfig b;
    b.id = j.at("id").get<std::string>();
    b.kind = j.value("kind", std::string("http"));
    b.url = j.value("url", std::string());
    b.token = j.value("token", std::string());
    b.tables_file = j.value("tables", std::string());
    return b;
}

void apply_env_url(BackendConfig& b, const char* var) {
    if (const char* v = std::getenv(var); v && *v) {
        b.url = v;
        b.kind = "http";
    }
}

}  // namespace

Config load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open config file: " + file.string());
    json j;
    in >> j;

    Config cfg;
    cfg.snapshot = j;
    cfg.config_dir = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");
    cfg.dataset_path = j.value("dataset", std::string());
    cfg.runs_root = j.value("runs_root", cfg.runs_root);
    cfg.cache_root = j.value("cache_root", cfg.cache_root);
    cfg.cache_enabled = j.value("cache", true);
    cfg.max_in_flight = j.value("max_in_flight", 8);
    if (j.contains("retry")) {
        cfg.retry_attempts = j.at("retry").value("attempts", 3);
        cfg.retry_backoff_ms = j.at("retry").value("backoff_ms", 500);
    }

    const json& backends = j.at("backends");
    cfg.score = parse_backend(backends.at("score"));
    cfg.generate = parse_backend(backends.at("generate"));
    cfg.nli = parse_backend(backends.at("nli"));
    for (const auto& jj : backends.value("judges", json::array()))
        cfg.judges.push_back(parse_backend(jj));
    if (backends.contains("executor_score"))
        cfg.executor_score = parse_backend(backends.at("executor_score"));

    if (j.contains("gen_params")) j.at("gen_params").get_to(cfg.gen_params);
    if (j.contains("judge_params")) j.at("judge_params").get_to(cfg.judge_params);
    else {
        cfg.judge_params.mode = GenParams::Mode::Greedy;
        cfg.judge_params.max_tokens = 64;
        cfg.judge_params.n_samples = 1;
    }
    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        cfg.analysis.k = a.value("k", cfg.analysis.k);
        cfg.analysis.intra_k = a.value("intra_k", cfg.analysis.intra_k);
        cfg.analysis.min_subgroup = a.value("min_subgroup", cfg.analysis.min_subgroup);
        cfg.analysis.hist_bins = a.value("hist_bins", cfg.analysis.hist_bins);
        cfg.analysis.shift_bins = a.value("shift_bins", cfg.analysis.shift_bins);
        if (a.contains("method"))
            cfg.analysis.method = stats::method_from_string(a.at("method").get<std::string>());
    }

    apply_env_url(cfg.score, "BACKEND_SCORE_URL");
    apply_env_url(cfg.generate, "BACKEND_GEN_URL");
    apply_env_url(cfg.nli, "BACKEND_NLI_URL");
    if (const char* tok = std::getenv("BACKEND_TOKEN"); tok && *tok) {
        cfg.score.token = tok;
        cfg.generate.token = tok;
        cfg.nli.token = tok;
        for (auto& jc : cfg.judges) jc.token = tok;
        if (cfg.executor_score) cfg.executor_score->token = tok;
    }
    return cfg;
}

namespace {

struct TablesLoader {
    const Config& cfg;
    std::map<std::string, std::shared_ptr<MockTables>> loaded;

    std::shared_ptr<MockTables> get(const std::string& file) {
        if (file.empty()) throw std::runtime_error("mock backend needs a \"tables\" file");
        const std::string key = cfg.resolve(file).string();
        auto it = loaded.find(key);
        if (it != loaded.end()) return it->second;
        auto tables = MockTables::load(key);
        loaded.emplace(key, tables);
        return tables;
    }
};

HttpEndpoint endpoint_for(const Config& cfg, const BackendConfig& b) {
    HttpEndpoint ep;
    ep.id = b.id;
    ep.base_url = b.url;
    ep.token = b.token;
    ep.retry.attempts = cfg.retry_attempts;
    ep.retry.initial_backoff = std::chrono::milliseconds(cfg.retry_backoff_ms);
    return ep;
}

}  // namespace

BackendSet make_backends(const Config& cfg) {
    BackendSet set;
    if (cfg.cache_enabled)
        set.cache = std::make_unique<store::ResponseCache>(cfg.resolve(cfg.cache_root));
    TablesLoader tables{cfg, {}};

    auto add_scoring = [&](const BackendConfig& b) -> ScoringBackend* {
        if (b.kind == "mock")
            set.scoring_stack.push_back(
                std::make_unique<MockScoringBackend>(b.id, tables.get(b.tables_file)));
        else
            set.scoring_stack.push_back(std::make_unique<HttpScoringBackend>(endpoint_for(cfg, b)));
        ScoringBackend* inner = set.scoring_stack.back().get();
        if (!set.cache) return inner;
        set.scoring_stack.push_back(std::make_unique<store::CachingScoringBackend>(*inner, *set.cache));
        return set.scoring_stack.back().get();
    };
    auto add_generation = [&](const BackendConfig& b, bool judge) -> GenerationBackend* {
        auto& stack = judge ? set.judge_stack : set.gen_stack;
        if (b.kind == "mock") {
            if (judge)
                stack.push_back(std::make_unique<MockJudgeBackend>(b.id, tables.get(b.tables_file)));
            else
                stack.push_back(
                    std::make_unique<MockGenerationBackend>(b.id, tables.get(b.tables_file)));
        } else {
            stack.push_back(std::make_unique<HttpGenerationBackend>(endpoint_for(cfg, b)));
        }
        GenerationBackend* inner = stack.back().get();
        if (!set.cache) return inner;
        stack.push_back(std::make_unique<store::CachingGenerationBackend>(*inner, *set.cache));
        return stack.back().get();
    };

    set.scoring = add_scoring(cfg.score);
    if (cfg.executor_score) set.executor_scoring = add_scoring(*cfg.executor_score);
    set.generation = add_generation(cfg.generate, false);

    if (cfg.nli.kind == "mock")
        set.nli_stack.push_back(std::make_unique<MockNliBackend>(cfg.nli.id, tables.get(cfg.nli.tables_file)));
    else
        set.nli_stack.push_back(std::make_unique<HttpNliBackend>(endpoint_for(cfg, cfg.nli)));
    set.nli = set.nli_stack.back().get();
    if (set.cache) {
        set.nli_stack.push_back(std::make_unique<store::CachingNliBackend>(*set.nli, *set.cache));
        set.nli = set.nli_stack.back().get();
    }

    for (const auto& jc : cfg.judges) set.judges.push_back(add_generation(jc, true));
    return set;
}

int exit_code(const StageResult& r) { return r.degraded() ? 2 : 0; }

void write_run_manifest(const RunDir& run, const Config& cfg,
                        const std::vector<Question>& questions) {
    if (run.read_manifest()) return;  // keep the original snapshot on resume

    std::string dataset_bytes;
    for (const auto& q : questions) dataset_bytes += dataset::serialize_question(q).dump() + "\n";

    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

    json backends{{"score", cfg.score.id},
                  {"generate", cfg.generate.id},
                  {"nli", cfg.nli.id}};
    json judge_ids = json::array();
    for (const auto& jc : cfg.judges) judge_ids.push_back(jc.id);
    backends["judges"] = judge_ids;
    if (cfg.executor_score) backends["executor_score"] = cfg.executor_score->id;

    run.write_manifest(json{{"run_id", run.root.filename().string()},
                            {"created_at", stamp},
                            {"code_version", kCodeVersion},
                            {"dataset_path", cfg.dataset_path},
                            {"dataset_sha256", store::sha256_hex(dataset_bytes)},
                            {"n_questions", questions.size()},
                            {"backends", backends},
                            {"gen_params", cfg.gen_params},
                            {"judge_params", cfg.judge_params},
                            {"config", cfg.snapshot}});
}

namespace {

void record_failure(JsonlWriter& failures, const std::string& stage, const std::string& qid,
                    std::optional<int> sample, const std::string& reason) {
    json row{{"stage", stage}, {"question_id", qid}, {"reason", reason}};
    row["rationale_index"] = sample ? json(*sample) : json(nullptr);
    failures.append(row);
    log_warn(stage + ": question " + qid +
             (sample ? " sample " + std::to_string(*sample) : std::string()) + " failed: " + reason);
}

}  // namespace

StageResult run_belief_pass(const std::vector<Question>& questions, ScoringBackend& scoring,
                            const RunDir& run, int max_in_flight) {
    std::set<std::string> done;
    for (const auto& row : store::read_jsonl(run.beliefs()))
        done.insert(row.at("question_id").get<std::string>());

    std::vector<std::optional<BeliefProfile>> results(questions.size());
    std::vector<std::optional<std::string>> errors(questions.size());
    parallel_for(questions.size(), max_in_flight, [&](std::size_t i) {
        if (done.count(questions[i].id)) return;
        try {
            results[i] = belief::build_belief_profile(questions[i], scoring);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    JsonlWriter writer(run.beliefs());
    JsonlWriter failures(run.failures());
    StageResult res;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (done.count(questions[i].id)) {
            ++res.n_ok;
        } else if (results[i]) {
            writer.append(*results[i]);
            ++res.n_ok;
        } else {
            record_failure(failures, "beliefs", questions[i].id, std::nullopt,
                           errors[i].value_or("unknown error"));
            ++res.n_failed;
        }
    }
    return res;
}

StageResult run_generation_pass(const std::vector<Question>& questions, GenerationBackend& gen,
                                ScoringBackend& scoring, const GenParams& params,
                                const RunDir& run, int max_in_flight) {
    if (!params.valid()) throw std::invalid_argument("run_generation_pass: invalid GenParams");
    std::set<std::pair<std::string, int>> done;
    for (const auto& row : store::read_jsonl(run.rationales()))
        done.insert({row.at("question_id").get<std::string>(), row.at("rationale_index").get<int>()});

    const int expected = params.expected_samples();
    std::vector<std::vector<std::pair<int, Rationale>>> results(questions.size());
    std::vector<std::optional<std::string>> errors(questions.size());
    std::vector<bool> skipped(questions.size(), false);

    parallel_for(questions.size(), max_in_flight, [&](std::size_t i) {
        const Question& q = questions[i];
        bool all_done = true;
        for (int s = 0; s < expected; ++s)
            if (!done.count({q.id, s})) all_done = false;
        if (all_done) {
            skipped[i] = true;
            return;
        }
        try {
            auto rationales = cot::sample_rationales(q, gen, scoring, params);
            for (int s = 0; s < static_cast<int>(rationales.size()); ++s) {
                if (done.count({q.id, s})) continue;  // idempotent by (question, sample)
                results[i].emplace_back(s, std::move(rationales[static_cast<std::size_t>(s)]));
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    JsonlWriter writer(run.rationales());
    JsonlWriter failures(run.failures());
    StageResult res;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (skipped[i]) {
            res.n_ok += static_cast<std::size_t>(expected);
            continue;
        }
        if (errors[i]) {
            record_failure(failures, "cot", questions[i].id, std::nullopt, *errors[i]);
            res.n_failed += static_cast<std::size_t>(expected);
            continue;
        }
        for (auto& [s, rationale] : results[i]) {
            json row;
            to_json(row, rationale);
            row["question_id"] = questions[i].id;
            row["rationale_index"] = s;
            writer.append(row);
            if (rationale.degenerate) {
                record_failure(failures, "cot", questions[i].id, s, "degenerate rationale");
                ++res.n_failed;
            } else {
                ++res.n_ok;
            }
        }
    }
    return res;
}

namespace {

struct RationaleRow {
    std::string question_id;
    int index = 0;
    Rationale rationale;
};

std::vector<RationaleRow> load_rationales(const RunDir& run) {
    std::vector<RationaleRow> rows;
    for (const auto& row : store::read_jsonl(run.rationales())) {
        RationaleRow r;
        r.question_id = row.at("question_id").get<std::string>();
        r.index = row.at("rationale_index").get<int>();
        from_json(row, r.rationale);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

StageResult run_judge_pass(const std::vector<Question>& questions,
                           std::span<GenerationBackend* const> judges,
                           const GenParams& judge_params, const RunDir& run, int max_in_flight) {
    std::map<std::string, const Question*> by_id;
    for (const auto& q : questions) by_id[q.id] = &q;

    std::set<std::pair<std::string, int>> done;
    for (const auto& row : store::read_jsonl(run.judgments()))
        done.insert({row.at("question_id").get<std::string>(), row.at("rationale_index").get<int>()});

    const auto rationales = load_rationales(run);
    std::vector<std::optional<json>> rows(rationales.size());
    std::vector<std::optional<std::string>> errors(rationales.size());

    parallel_for(rationales.size(), max_in_flight, [&](std::size_t i) {
        const auto& rr = rationales[i];
        if (rr.rationale.degenerate || done.count({rr.question_id, rr.index})) return;
        const auto it = by_id.find(rr.question_id);
        if (it == by_id.end()) {
            errors[i] = "question not in dataset";
            return;
        }
        try {
            const auto outcome = judge::extract_a_inter(*it->second, rr.rationale, judges, judge_params);
            json votes = json::array();
            for (const auto& v : outcome.votes) {
                votes.push_back({{"judge", v.judge_id},
                                 {"label", v.label ? json(*v.label) : json(nullptr)},
                                 {"transport_ok", v.transport_ok}});
            }
            rows[i] = json{{"question_id", rr.question_id},
                           {"rationale_index", rr.index},
                           {"votes", votes},
                           {"a_inter_label",
                            outcome.a_inter_label ? json(*outcome.a_inter_label) : json(nullptr)},
                           {"a_inter_index",
                            outcome.a_inter_index ? json(*outcome.a_inter_index) : json(nullptr)}};
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    JsonlWriter writer(run.judgments());
    JsonlWriter failures(run.failures());
    StageResult res;
    for (std::size_t i = 0; i < rationales.size(); ++i) {
        if (rows[i]) {
            writer.append(*rows[i]);
            ++res.n_ok;
        } else if (errors[i]) {
            record_failure(failures, "judge", rationales[i].question_id, rationales[i].index,
                           *errors[i]);
            ++res.n_failed;
        } else if (done.count({rationales[i].question_id, rationales[i].index})) {
            ++res.n_ok;
        }
    }
    return res;
}

StageResult run_metrics_pass(const std::vector<Question>& questions, ScoringBackend& scoring,
                             NliBackend& nli, const RunDir& run, int max_in_flight) {
    std::map<std::string, const Question*> by_id;
    for (const auto& q : questions) by_id[q.id] = &q;

    std::map<std::string, BeliefProfile> beliefs;
    for (const auto& row : store::read_jsonl(run.beliefs())) {
        BeliefProfile b = row.get<BeliefProfile>();
        beliefs[b.question_id] = std::move(b);
    }
    std::map<std::pair<std::string, int>, std::optional<int>> a_inter;
    for (const auto& row : store::read_jsonl(run.judgments())) {
        std::optional<int> idx;
        if (!row.at("a_inter_index").is_null()) idx = row.at("a_inter_index").get<int>();
        a_inter[{row.at("question_id").get<std::string>(), row.at("rationale_index").get<int>()}] =
            idx;
    }
    std::set<std::pair<std::string, int>> done;
    for (const auto& row : store::read_jsonl(run.records()))
        done.insert({row.at("question_id").get<std::string>(), row.at("rationale_index").get<int>()});

    const auto rationales = load_rationales(run);
    std::vector<std::optional<MetricRecord>> records(rationales.size());
    std::vector<std::optional<std::string>> errors(rationales.size());
    std::vector<bool> degenerate(rationales.size(), false);

    parallel_for(rationales.size(), max_in_flight, [&](std::size_t i) {
        const auto& rr = rationales[i];
        if (done.count({rr.question_id, rr.index})) return;
        if (rr.rationale.degenerate) {
            degenerate[i] = true;
            return;
        }
        const auto qit = by_id.find(rr.question_id);
        if (qit == by_id.end()) {
            errors[i] = "question not in dataset";
            return;
        }
        const auto bit = beliefs.find(rr.question_id);
        if (bit == beliefs.end()) {
            errors[i] = "no belief profile (belief pass failed for this question)";
            return;
        }
        const auto jit = a_inter.find({rr.question_id, rr.index});
        if (jit == a_inter.end()) {
            errors[i] = "no judgment row (judge pass failed for this sample)";
            return;
        }
        try {
            const Question& q = *qit->second;
            const VectorXd cot_probs = cot::cot_answer_distribution(q, rr.rationale.body, scoring);
            const VectorXd only_probs =
                cot::rationale_only_distribution(q, rr.rationale.body, scoring);
            records[i] = metrics::compute_metric_record(q, rr.rationale, rr.index,
                                                        bit->second.probs, cot_probs, only_probs,
                                                        jit->second, nli);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    JsonlWriter writer(run.records());
    JsonlWriter failures(run.failures());
    StageResult res;
    for (std::size_t i = 0; i < rationales.size(); ++i) {
        const auto& rr = rationales[i];
        if (records[i]) {
            writer.append(*records[i]);
            ++res.n_ok;
        } else if (errors[i]) {
            record_failure(failures, "metrics", rr.question_id, rr.index, *errors[i]);
            ++res.n_failed;
        } else if (degenerate[i]) {
            ++res.n_failed;  // logged at generation time
        } else if (done.count({rr.question_id, rr.index})) {
            ++res.n_ok;
        }
    }
    return res;
}

StageResult run_cot_pass(const std::vector<Question>& questions, GenerationBackend& gen,
                         ScoringBackend& scoring, NliBackend& nli,
                         std::span<GenerationBackend* const> judges, const GenParams& params,
                         const GenParams& judge_params, const RunDir& run, int max_in_flight) {
    run_generation_pass(questions, gen, scoring, params, run, max_in_flight);
    run_judge_pass(questions, judges, judge_params, run, max_in_flight);
    return run_metrics_pass(questions, scoring, nli, run, max_in_flight);
}

RunData load_run_data(const std::vector<Question>& questions, const RunDir& run) {
    RunData data;
    data.questions = questions;
    for (const auto& row : store::read_jsonl(run.beliefs())) {
        BeliefProfile b = row.get<BeliefProfile>();
        data.beliefs[b.question_id] = std::move(b);
    }
    for (const auto& rr : load_rationales(run))
        data.rationales[{rr.question_id, rr.index}] = rr.rationale;
    for (const auto& row : store::read_jsonl(run.judgments())) {
        std::optional<int> idx;
        if (!row.at("a_inter_index").is_null()) idx = row.at("a_inter_index").get<int>();
        data.a_inter[{row.at("question_id").get<std::string>(),
                      row.at("rationale_index").get<int>()}] = idx;
    }
    for (const auto& row : store::read_jsonl(run.records()))
        data.records.push_back(row.get<MetricRecord>());
    return data;
}

std::vector<std::string> metric_factor_names() {
    return {"length",           "relevance",        "relevance_neg", "explicitness",
            "explicitness_neg", "informativeness",  "sufficiency",   "consistency_inter",
            "performance_inter", "performance_e2e"};
}

stats::FactorTable aggregate_records(const RunData& data) {
    const Index n = static_cast<Index>(data.questions.size());
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

    stats::FactorTable table;
    std::map<std::string, Index> row_of;
    for (Index i = 0; i < n; ++i) {
        table.ids.push_back(data.questions[static_cast<std::size_t>(i)].id);
        row_of[table.ids.back()] = i;
    }

    const std::vector<std::string> belief_cols = {"entropy", "difficulty", "lse", "direct_correct"};
    for (const auto& name : belief_cols) table.columns[name] = VectorXd::Constant(n, kNaN);
    for (const auto& name : metric_factor_names()) table.columns[name] = VectorXd::Constant(n, kNaN);

    for (const auto& [qid, b] : data.beliefs) {
        const auto it = row_of.find(qid);
        if (it == row_of.end()) continue;
        const Index i = it->second;
        table.columns["entropy"][i] = b.entropy;
        table.columns["difficulty"][i] = b.difficulty;
        table.columns["lse"][i] = b.lse;
        const int gold = data.questions[static_cast<std::size_t>(i)].gold_index;
        table.columns["direct_correct"][i] = b.direct_pred_index == gold ? 1.0 : 0.0;
    }

    // Mean over each question's samples, skipping absent fields.
    std::map<std::string, std::map<Index, std::pair<long double, int>>> sums;
    auto add = [&](const std::string& col, Index i, double v) {
        auto& cell = sums[col][i];
        cell.first += v;
        cell.second += 1;
    };
    for (const auto& rec : data.records) {
        const auto it = row_of.find(rec.question_id);
        if (it == row_of.end()) continue;
        const Index i = it->second;
        add("length", i, static_cast<double>(rec.length));
        add("sufficiency", i, rec.sufficiency);
        add("performance_e2e", i, rec.performance_e2e);
        if (rec.relevance) add("relevance", i, *rec.relevance);
        if (rec.relevance_neg) add("relevance_neg", i, *rec.relevance_neg);
        if (rec.explicitness) add("explicitness", i, *rec.explicitness);
        if (rec.explicitness_neg) add("explicitness_neg", i, *rec.explicitness_neg);
        if (rec.informativeness) add("informativeness", i, *rec.informativeness);
        if (rec.consistency_inter) add("consistency_inter", i, *rec.consistency_inter);
        if (rec.performance_inter) add("performance_inter", i, *rec.performance_inter);
    }
    for (const auto& [col, cells] : sums) {
        auto& vec = table.columns[col];
        for (const auto& [i, cell] : cells)
            vec[i] = static_cast<double>(cell.first / static_cast<long double>(cell.second));
    }
    return table;
}

std::vector<DebiasRow> run_debias(const std::vector<Question>& questions,
                                  const RunDir& author_run, ScoringBackend& executor,
                                  int k_levels) {
    if (k_levels < 2) throw std::invalid_argument("run_debias: need at least 2 levels");
    const RunData author = load_run_data(questions, author_run);

    std::map<std::string, std::map<int, const MetricRecord*>> records_by_q;
    for (const auto& rec : author.records) records_by_q[rec.question_id][rec.rationale_index] = &rec;

    std::vector<int> level_n(static_cast<std::size_t>(k_levels), 0);
    std::vector<long double> level_sum(static_cast<std::size_t>(k_levels), 0.0L);

    for (const auto& q : questions) {
        const auto recs_it = records_by_q.find(q.id);
        if (recs_it == records_by_q.end()) continue;

        // First sample (by index) that is sufficient and has a judged A_inter.
        std::optional<int> chosen;
        std::optional<int> a_inter;
        for (const auto& [idx, rec] : recs_it->second) {
            if (rec->sufficiency != 1 || !rec->a_inter_index) continue;
            chosen = idx;
            a_inter = rec->a_inter_index;
            break;
        }
        if (!chosen) continue;

        BeliefProfile ex_profile;
        try {
            ex_profile = belief::build_belief_profile(q, executor);
        } catch (const std::exception& e) {
            log_warn("debias: executor belief failed for " + q.id + ": " + e.what());
            continue;
        }
        if (static_cast<int>(ex_profile.direct_pred_index) == *a_inter) continue;  // no conflict

        const auto rat_it = author.rationales.find({q.id, *chosen});
        if (rat_it == author.rationales.end()) continue;
        double follow = 0.0;
        try {
            const VectorXd probs = cot::cot_answer_distribution(q, rat_it->second.body, executor);
            follow = belief::argmax_lowest(probs) == static_cast<Index>(*a_inter) ? 1.0 : 0.0;
        } catch (const std::exception& e) {
            log_warn("debias: executor scoring failed for " + q.id + ": " + e.what());
            continue;
        }

        // Entropy is normalized, so the levels are fixed bins over [0,1].
        int level = static_cast<int>(ex_profile.entropy * k_levels);
        level = std::clamp(level, 0, k_levels - 1);
        ++level_n[static_cast<std::size_t>(level)];
        level_sum[static_cast<std::size_t>(level)] += follow;
    }

    std::vector<DebiasRow> rows;
    for (int l = 0; l < k_levels; ++l) {
        DebiasRow row;
        row.level = l;
        if (k_levels == 3) row.label = l == 0 ? "Strong" : l == 1 ? "Neutral" : "Weak";
        else row.label = "L" + std::to_string(l);
        row.entropy_lo = static_cast<double>(l) / k_levels;
        row.entropy_hi = static_cast<double>(l + 1) / k_levels;
        row.n = level_n[static_cast<std::size_t>(l)];
        if (row.n > 0)
            row.performance = static_cast<double>(level_sum[static_cast<std::size_t>(l)] /
                                                  static_cast<long double>(row.n));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace cotlens::runner
