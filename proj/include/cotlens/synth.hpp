#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cotlens/mock_backends.hpp"
#include "cotlens/types.hpp"

namespace cotlens::synth {

/// value = intercept + slope * entropy + N(0, noise_sd), clamped to (0,1).
struct LinearEffect {
    double intercept = 0.5;
    double slope = 0.0;
    double noise_sd = 0.05;
};

/// Controls for the synthetic population generator. The generator plants
/// known correlational structure and emits a dataset plus mock-backend tables
/// so the full pipeline runs on it unchanged; recovered statistics can then
/// be checked against the planted ground truth.
struct SynthParams {
    int n_questions = 100;
    int n_options = 5;
    int n_samples = 1;
    int steps_per_rationale = 2;

    double entropy_min = 0.05;
    double entropy_max = 0.95;

    // a_inter = direct argmax with probability 1 - entropy (confirmation
    // planting) or 0.5 (null), else a uniformly drawn other option.
    enum class Consistency { Null, OneMinusEntropy };
    Consistency consistency = Consistency::Null;

    LinearEffect relevance{0.5, 0.0, 0.05};
    LinearEffect relevance_neg{0.3, 0.0, 0.05};
    LinearEffect explicitness{0.5, 0.0, 0.05};
    LinearEffect explicitness_neg{0.2, 0.0, 0.05};

    double performance_inter_rate = 0.9;
    double sufficiency_rate = 0.9;

    // Plants informativeness as pure noise (cot distribution = direct with
    // A_inter scaled by e^noise) instead of the winner-rate construction;
    // under PMI the winner-rate path couples informativeness to entropy even
    // with no planted effects. The mean should leave headroom below the
    // feasibility ceiling cot_p <= 0.95, or censoring reintroduces coupling.
    bool cot_info_noise = false;
    double cot_info_noise_mean = -0.3;
    double cot_info_noise_sd = 0.1;

    double length_base = 30.0;
    double length_slope = 0.0;
    double length_noise = 3.0;
    int length_min = 3;

    // When set, informativeness is planted as w_j * (relevance - mean) +
    // noise with w_j per entropy tercile chosen so corr(informativeness,
    // relevance) hits these targets. Forces a_inter to the second-ranked
    // direct choice so the planted PMI stays feasible.
    std::optional<std::array<double, 3>> info_corr_terciles;
    double info_noise_sd = 0.35;
    double relevance_lo = 0.1;
    double relevance_hi = 0.9;

    int n_judges = 1;
    // Handcrafted irregular cases (tie votes, parse failures, missing
    // conclusions, facts) on fixed question indices.
    bool golden_quirks = false;
    // Degenerate-rationale cases (empty generation, conclusion-only text).
    bool degenerate_quirks = false;

    // Plants a second model: mismatching direct beliefs plus rationale-
    // conditioned scores that follow the author iff entropy > threshold.
    bool plant_debias = false;
    double debias_threshold = 2.0 / 3.0;

    std::string dataset_prefix = "syn";

    void validate() const;  // throws std::invalid_argument
};

struct SampleTruth {
    bool degenerate = false;
    std::optional<int> a_inter;
    double relevance = 0.0;
    double relevance_neg = 0.0;
    double explicitness = 0.0;
    double explicitness_neg = 0.0;
    double informativeness = 0.0;
    int cot_argmax = 0;
    bool sufficient = true;
    long planted_length = 0;
};

struct QuestionTruth {
    double entropy = 0.0;
    double lse = 0.0;
    int direct_argmax = 0;
    int gold = 0;
    std::vector<SampleTruth> samples;
    // debias planting
    double executor_entropy = 0.0;
    int executor_argmax = 0;
    bool executor_follows = false;
};

struct SynthOutput {
    std::vector<Question> questions;
    std::shared_ptr<MockTables> tables;           // author model + NLI + judges
    std::shared_ptr<MockTables> executor_tables;  // set when plant_debias
    std::vector<QuestionTruth> truths;
    std::vector<std::string> judge_ids;
};

// Deterministic for a fixed (params, seed).
SynthOutput generate_population(const SynthParams& params, std::uint64_t seed);

// Log-likelihood vector whose softmax has the requested normalized entropy
// (bisection, |error| < 1e-12) with the argmax at the given index and values
// shifted so their log-sum-exp lands near `shift`.
VectorXd logliks_for_entropy(double entropy, int n, int argmax_index, double shift);

struct PlantedExpectation {
    std::string factor;
    double expected_r = 0.0;
    std::string note;
};

// Closed-form correlation expectations for the planted relations, used by
// the recovery tests.
std::vector<PlantedExpectation> planted_report(const SynthParams& params);

}  // namespace cotlens::synth
