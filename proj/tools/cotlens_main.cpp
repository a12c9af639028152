#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "cotlens/dataset.hpp"
#include "cotlens/logging.hpp"
#include "cotlens/runner.hpp"
#include "cotlens/synth.hpp"

using namespace cotlens;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string run_id;
    int k = 0;  // 0: use config
    std::string method;
    std::uint64_t seed = 1;
    bool verbose = false;
};

runner::Config require_config(const GlobalOpts& g) {
    if (g.config_path.empty()) throw CLI::ValidationError("--config is required");
    runner::Config cfg = runner::load_config(g.config_path);
    if (g.k > 0) cfg.analysis.k = g.k;
    if (!g.method.empty()) cfg.analysis.method = stats::method_from_string(g.method);
    return cfg;
}

std::vector<Question> load_validated_dataset(const runner::Config& cfg) {
    if (cfg.dataset_path.empty()) throw std::runtime_error("config has no \"dataset\" entry");
    auto questions = dataset::load_dataset(cfg.resolve(cfg.dataset_path));
    const auto report = dataset::validate_dataset(questions);
    if (!report.ok()) {
        for (const auto& e : report.entries) {
            if (e.ok) continue;
            std::string reasons;
            for (const auto& r : e.reasons) reasons += (reasons.empty() ? "" : "; ") + r;
            std::cerr << "invalid record " << e.id << " (#" << e.position << "): " << reasons
                      << "\n";
        }
        throw std::runtime_error("dataset validation failed; refusing to run");
    }
    return questions;
}

store::RunDir open_run(const runner::Config& cfg, const GlobalOpts& g) {
    if (g.run_id.empty()) throw CLI::ValidationError("--run-id is required for this subcommand");
    return store::RunDir::open(cfg.resolve(cfg.runs_root), g.run_id);
}

int finish_stage(const char* stage, const runner::StageResult& res) {
    std::cout << stage << ": " << res.n_ok << " ok, " << res.n_failed << " failed\n";
    if (res.degraded()) {
        log_warn(std::string(stage) + ": more than 10% failures, run marked degraded");
        return 2;
    }
    return 0;
}

synth::SynthParams params_for_mode(const std::string& mode) {
    synth::SynthParams p;
    if (mode == "golden") {
        p.n_questions = 12;
        p.n_samples = 2;
        p.n_judges = 4;
        p.steps_per_rationale = 3;
        p.golden_quirks = true;
        p.consistency = synth::SynthParams::Consistency::OneMinusEntropy;
        p.relevance = {0.75, -0.4, 0.05};
        p.relevance_neg = {0.15, 0.25, 0.05};
        p.explicitness = {0.65, -0.3, 0.05};
        p.explicitness_neg = {0.1, 0.2, 0.05};
        p.length_base = 18.0;
        p.length_slope = 20.0;
        p.length_noise = 2.0;
        p.performance_inter_rate = 0.85;
        p.sufficiency_rate = 0.8;
    } else if (mode == "consistency") {
        p.n_questions = 10000;
        p.consistency = synth::SynthParams::Consistency::OneMinusEntropy;
        p.relevance = {0.75, -0.4, 0.05};
        p.explicitness = {0.65, -0.3, 0.05};
        p.length_slope = 25.0;
        p.length_noise = 4.0;
    } else if (mode == "null") {
        p.n_questions = 10000;
        p.consistency = synth::SynthParams::Consistency::Null;
        p.cot_info_noise = true;
        p.entropy_min = 0.3;
        p.entropy_max = 0.98;
    } else if (mode == "info") {
        p.n_questions = 10000;
        p.entropy_min = 0.35;
        p.entropy_max = 0.98;
        p.info_corr_terciles = {{0.2, 0.5, 0.8}};
        p.info_noise_sd = 0.25;
    } else if (mode == "debias") {
        p.n_questions = 3000;
        p.plant_debias = true;
        p.sufficiency_rate = 1.0;
    } else {
        throw CLI::ValidationError("unknown synth mode: " + mode);
    }
    return p;
}

json mock_backend_json(const std::string& id, const std::string& tables) {
    return json{{"id", id}, {"kind", "mock"}, {"tables", tables}};
}

int run_synth(const GlobalOpts& g, const std::string& mode, const std::string& out_dir,
              int n_override, int samples_override, int judges_override) {
    synth::SynthParams p = params_for_mode(mode);
    if (n_override > 0) p.n_questions = n_override;
    if (samples_override > 0) p.n_samples = samples_override;
    if (judges_override > 0) p.n_judges = judges_override;

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const auto out = synth::generate_population(p, g.seed);

    dataset::save_dataset(out.questions, dir / "dataset.jsonl");
    out.tables->save(dir / "tables.json");
    if (out.executor_tables) out.executor_tables->save(dir / "executor_tables.json");

    json planted = json::array();
    for (const auto& row : synth::planted_report(p))
        planted.push_back({{"factor", row.factor}, {"expected_r", row.expected_r},
                           {"note", row.note}});
    std::ofstream(dir / "planted.json") << planted.dump(2) << "\n";

    json judges = json::array();
    for (const auto& id : out.judge_ids) judges.push_back(mock_backend_json(id, "tables.json"));
    json config{{"dataset", "dataset.jsonl"},
                {"runs_root", "runs"},
                {"cache_root", "cache"},
                {"cache", true},
                {"max_in_flight", 4},
                {"backends",
                 json{{"score", mock_backend_json("mock-author-score", "tables.json")},
                      {"generate", mock_backend_json("mock-author-gen", "tables.json")},
                      {"nli", mock_backend_json("mock-nli", "tables.json")},
                      {"judges", judges}}},
                {"gen_params", GenParams{GenParams::Mode::Nucleus, 0.9, 0.9, 512, p.n_samples}},
                {"judge_params", GenParams{GenParams::Mode::Greedy, 0.0, 1.0, 64, 1}},
                {"analysis", json{{"k", 100},
                                  {"intra_k", 3},
                                  {"method", "pearson"},
                                  {"min_subgroup", 30},
                                  {"hist_bins", 20},
                                  {"shift_bins", 10}}}};
    if (out.executor_tables)
        config["backends"]["executor_score"] =
            mock_backend_json("mock-executor-score", "executor_tables.json");
    std::ofstream(dir / "config.json") << config.dump(2) << "\n";

    std::cout << "synth: wrote " << out.questions.size() << " questions, mode " << mode << ", to "
              << dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Belief-conditioned chain-of-thought evaluation pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config file")->envname("COTLENS_CONFIG");
    app.add_option("--run-id", g.run_id, "run identifier under runs_root");
    app.add_option("--k", g.k, "override analysis group count");
    app.add_option("--method", g.method, "correlation method: pearson|spearman");
    app.add_option("--seed", g.seed, "random seed (synth)");
    app.add_flag("--verbose", g.verbose, "debug logging");

    auto* cmd_validate = app.add_subcommand("validate", "validate a dataset file");
    std::string dataset_override;
    cmd_validate->add_option("--dataset", dataset_override, "dataset path (overrides config)");

    auto* cmd_beliefs = app.add_subcommand("beliefs", "direct-answer belief pass");
    auto* cmd_cot = app.add_subcommand("cot", "sample and segment rationales");
    auto* cmd_judge = app.add_subcommand("judge", "extract intermediate answers by majority vote");
    auto* cmd_metrics = app.add_subcommand("metrics", "score rationale attributes and outcomes");

    auto* cmd_inter = app.add_subcommand("analyze-inter", "inter-group correlation analysis");
    std::string inter_z = "entropy";
    cmd_inter->add_option("--z", inter_z, "grouping factor (default entropy)");

    auto* cmd_intra = app.add_subcommand("analyze-intra", "intra-group correlation analysis");
    std::string intra_confound = "entropy", intra_target = "informativeness";
    cmd_intra->add_option("--confound", intra_confound, "confound factor");
    cmd_intra->add_option("--target", intra_target, "target factor");

    auto* cmd_debias = app.add_subcommand("debias", "cross-model debiasing protocol");
    int debias_levels = 3;
    cmd_debias->add_option("--levels", debias_levels, "number of executor-entropy levels");

    auto* cmd_report = app.add_subcommand("report", "emit all analysis CSVs");

    auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic population");
    std::string synth_mode = "golden", synth_out = "synth_out";
    int synth_n = 0, synth_samples = 0, synth_judges = 0;
    cmd_synth->add_option("--mode", synth_mode, "golden|consistency|null|info|debias");
    cmd_synth->add_option("--out", synth_out, "output directory");
    cmd_synth->add_option("--n", synth_n, "question count override");
    cmd_synth->add_option("--samples", synth_samples, "samples per question override");
    cmd_synth->add_option("--judges", synth_judges, "judge count override");

    CLI11_PARSE(app, argc, argv);
    if (g.verbose) set_log_level(LogLevel::Debug);

    try {
        if (cmd_synth->parsed())
            return run_synth(g, synth_mode, synth_out, synth_n, synth_samples, synth_judges);

        if (cmd_validate->parsed()) {
            std::filesystem::path path;
            if (!dataset_override.empty()) path = dataset_override;
            else {
                const auto cfg = require_config(g);
                path = cfg.resolve(cfg.dataset_path);
            }
            const auto questions = dataset::load_dataset(path);
            const auto report = dataset::validate_dataset(questions);
            for (const auto& e : report.entries) {
                if (e.ok) continue;
                std::string reasons;
                for (const auto& r : e.reasons) reasons += (reasons.empty() ? "" : "; ") + r;
                std::cout << "FAIL " << e.id << " (#" << e.position << "): " << reasons << "\n";
            }
            std::cout << report.n_pass << " passed, " << report.n_fail << " failed\n";
            return report.ok() ? 0 : 1;
        }

        const runner::Config cfg = require_config(g);
        const auto questions = load_validated_dataset(cfg);
        const auto run = open_run(cfg, g);

        if (cmd_beliefs->parsed()) {
            auto backends = runner::make_backends(cfg);
            runner::write_run_manifest(run, cfg, questions);
            return finish_stage("beliefs", runner::run_belief_pass(questions, *backends.scoring,
                                                                   run, cfg.max_in_flight));
        }
        if (cmd_cot->parsed()) {
            auto backends = runner::make_backends(cfg);
            runner::write_run_manifest(run, cfg, questions);
            return finish_stage(
                "cot", runner::run_generation_pass(questions, *backends.generation,
                                                   *backends.scoring, cfg.gen_params, run,
                                                   cfg.max_in_flight));
        }
        if (cmd_judge->parsed()) {
            auto backends = runner::make_backends(cfg);
            if (backends.judges.empty()) throw std::runtime_error("no judges configured");
            return finish_stage("judge",
                                runner::run_judge_pass(questions, backends.judges,
                                                       cfg.judge_params, run, cfg.max_in_flight));
        }
        if (cmd_metrics->parsed()) {
            auto backends = runner::make_backends(cfg);
            return finish_stage("metrics",
                                runner::run_metrics_pass(questions, *backends.scoring,
                                                         *backends.nli, run, cfg.max_in_flight));
        }
        if (cmd_inter->parsed()) {
            runner::emit_inter_report(questions, run, cfg.analysis, {inter_z});
            std::cout << "wrote " << (run.reports() / "inter_corr.csv").string() << "\n";
            return 0;
        }
        if (cmd_intra->parsed()) {
            runner::emit_intra_report(questions, run, cfg.analysis, intra_confound, intra_target);
            std::cout << "wrote " << (run.reports() / "intra_corr.csv").string() << "\n";
            return 0;
        }
        if (cmd_debias->parsed()) {
            auto backends = runner::make_backends(cfg);
            if (!backends.executor_scoring)
                throw std::runtime_error("config has no executor_score backend");
            const auto rows =
                runner::run_debias(questions, run, *backends.executor_scoring, debias_levels);
            const auto out = run.reports() / "debias.csv";
            std::filesystem::create_directories(run.reports());
            runner::write_debias_csv(out, rows);
            for (const auto& r : rows) {
                std::cout << r.label << ": n=" << r.n;
                if (r.performance) std::cout << " performance=" << *r.performance;
                std::cout << "\n";
            }
            std::cout << "wrote " << out.string() << "\n";
            return 0;
        }
        if (cmd_report->parsed()) {
            runner::emit_reports(questions, run, cfg.analysis);
            std::cout << "wrote reports under " << run.reports().string() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
