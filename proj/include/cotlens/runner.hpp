#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cotlens/backends.hpp"
#include "cotlens/stats.hpp"
#include "cotlens/store.hpp"
#include "cotlens/types.hpp"

namespace cotlens::runner {

inline constexpr const char* kCodeVersion = "cotlens 0.1.0";
inline constexpr int kReportSchemaVersion = 1;

struct BackendConfig {
    std::string id;
    std::string kind;  // "http" | "mock"
    std::string url;
    std::string token;
    std::string tables_file;
};

struct AnalysisConfig {
    int k = 100;
    int intra_k = 3;
    int min_subgroup = 30;
    int hist_bins = 20;
    int shift_bins = 10;
    stats::Method method = stats::Method::Pearson;
};

struct Config {
    std::filesystem::path config_dir;  // directory of the config file; relative paths resolve here
    std::string dataset_path;
    std::string runs_root = "runs";
    std::string cache_root = "cache";
    bool cache_enabled = true;
    int max_in_flight = 8;
    int retry_attempts = 3;
    int retry_backoff_ms = 500;

    BackendConfig score;
    BackendConfig generate;
    BackendConfig nli;
    std::vector<BackendConfig> judges;  // listed order = vote priority
    std::optional<BackendConfig> executor_score;

    GenParams gen_params;
    GenParams judge_params;
    AnalysisConfig analysis;

    nlohmann::json snapshot;  // raw config file contents for the manifest

    std::filesystem::path resolve(const std::string& p) const;
};

// Reads the JSON config and applies BACKEND_SCORE_URL / BACKEND_GEN_URL /
// BACKEND_NLI_URL / BACKEND_TOKEN environment overrides.
Config load_config(const std::filesystem::path& file);

/// Owns the configured backend instances, wrapped in response caching when
/// enabled.
struct BackendSet {
    std::unique_ptr<store::ResponseCache> cache;
    std::vector<std::unique_ptr<ScoringBackend>> scoring_stack;
    std::vector<std::unique_ptr<GenerationBackend>> gen_stack;
    std::vector<std::unique_ptr<NliBackend>> nli_stack;
    std::vector<std::unique_ptr<GenerationBackend>> judge_stack;

    ScoringBackend* scoring = nullptr;
    ScoringBackend* executor_scoring = nullptr;
    GenerationBackend* generation = nullptr;
    NliBackend* nli = nullptr;
    std::vector<GenerationBackend*> judges;
};

BackendSet make_backends(const Config& cfg);

struct StageResult {
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;

    // More than 10% question failures marks the run degraded.
    bool degraded() const { return n_failed * 10 > (n_ok + n_failed); }
};

// Exit-code contract: 0 clean, 2 degraded, 1 hard failure.
int exit_code(const StageResult& r);

void write_run_manifest(const store::RunDir& run, const Config& cfg,
                        const std::vector<Question>& questions);

// Stage passes. Each is resumable: existing rows are loaded and their keys
// skipped, so an interrupted run completes without duplicating records.
StageResult run_belief_pass(const std::vector<Question>& questions, ScoringBackend& scoring,
                            const store::RunDir& run, int max_in_flight = 1);

StageResult run_generation_pass(const std::vector<Question>& questions, GenerationBackend& gen,
                                ScoringBackend& scoring, const GenParams& params,
                                const store::RunDir& run, int max_in_flight = 1);

StageResult run_judge_pass(const std::vector<Question>& questions,
                           std::span<GenerationBackend* const> judges,
                           const GenParams& judge_params, const store::RunDir& run,
                           int max_in_flight = 1);

StageResult run_metrics_pass(const std::vector<Question>& questions, ScoringBackend& scoring,
                             NliBackend& nli, const store::RunDir& run, int max_in_flight = 1);

// Generation + judging + metrics in sequence (the full CoT pass).
StageResult run_cot_pass(const std::vector<Question>& questions, GenerationBackend& gen,
                         ScoringBackend& scoring, NliBackend& nli,
                         std::span<GenerationBackend* const> judges, const GenParams& params,
                         const GenParams& judge_params, const store::RunDir& run,
                         int max_in_flight = 1);

// Loaded stage rows keyed for joining.
struct RunData {
    std::vector<Question> questions;
    std::map<std::string, BeliefProfile> beliefs;
    std::map<std::pair<std::string, int>, Rationale> rationales;
    std::map<std::pair<std::string, int>, std::optional<int>> a_inter;
    std::vector<MetricRecord> records;
};

RunData load_run_data(const std::vector<Question>& questions, const store::RunDir& run);

// Per-question table: belief factors plus metric columns averaged over the
// question's non-degenerate samples (fields missing on every sample stay
// NaN).
stats::FactorTable aggregate_records(const RunData& data);

// The standard factor set correlated in reports.
std::vector<std::string> metric_factor_names();

struct DebiasRow {
    int level = 0;
    std::string label;  // Strong / Neutral / Weak
    double entropy_lo = 0.0;
    double entropy_hi = 0.0;
    int n = 0;
    std::optional<double> performance;
};

// Cross-model protocol: select questions where the executor's direct
// prediction mismatches the author's A_inter and the author rationale is
// sufficient; score the executor on the author's rationale body and average
// I(argmax = A_inter) per executor-entropy level (equal-width bins over
// [0,1]; low entropy = strong belief).
std::vector<DebiasRow> run_debias(const std::vector<Question>& questions,
                                  const store::RunDir& author_run, ScoringBackend& executor,
                                  int k_levels = 3);

void write_debias_csv(const std::filesystem::path& file, const std::vector<DebiasRow>& rows);

// Inter-group correlation rows for the given grouping targets ->
// reports/inter_corr.csv.
void emit_inter_report(const std::vector<Question>& questions, const store::RunDir& run,
                       const AnalysisConfig& analysis, const std::vector<std::string>& targets);

// Intra-group evolution matrix -> reports/intra_corr.csv plus subgroup
// summaries -> reports/intra_subgroups.csv.
void emit_intra_report(const std::vector<Question>& questions, const store::RunDir& run,
                       const AnalysisConfig& analysis, const std::string& confound,
                       const std::string& target);

// Emits the full analysis CSV set under <run>/reports/. See README for
// schemas.
void emit_reports(const std::vector<Question>& questions, const store::RunDir& run,
                  const AnalysisConfig& analysis);

}  // namespace cotlens::runner
