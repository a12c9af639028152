#include "cotlens/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "cotlens/belief.hpp"
#include "cotlens/cot.hpp"
#include "cotlens/judge.hpp"
#include "cotlens/metrics.hpp"

namespace cotlens::synth {

namespace {

constexpr std::array<const char*, 16> kAdjectives = {
    "amber", "brisk", "cobalt", "dusty", "eager",  "faded",  "gilded", "hollow",
    "ivory", "jaded", "keen",   "lunar", "mellow", "narrow", "opal",   "pale"};

constexpr std::array<const char*, 16> kNouns = {
    "anchor", "beacon", "canyon", "drum",   "ember",  "fjord",  "grove",  "harbor",
    "inlet",  "jetty",  "kiln",   "lagoon", "meadow", "nebula", "orchard", "prairie"};

double clamp01(double v, double lo = 0.005, double hi = 0.995) {
    return std::clamp(v, lo, hi);
}

double sample_effect(const LinearEffect& e, double h, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, e.noise_sd > 0 ? e.noise_sd : 1e-12);
    return clamp01(e.intercept + e.slope * h + (e.noise_sd > 0 ? noise(rng) : 0.0));
}

void check_effect(const LinearEffect& e, double hmin, double hmax, const char* name) {
    for (double h : {hmin, hmax}) {
        const double v = e.intercept + e.slope * h;
        if (v < 0.0 || v > 1.0)
            throw std::invalid_argument(std::string("synth effect ") + name +
                                        " leaves [0,1] over the entropy range");
    }
    if (e.noise_sd < 0.0)
        throw std::invalid_argument(std::string("synth effect ") + name + ": negative noise");
}

// Normalized entropy of softmax(t * [0,-1,...,-(n-1)]); strictly decreasing
// in t.
double entropy_at_scale(double t, int n) {
    VectorXd v(n);
    for (int j = 0; j < n; ++j) v[j] = -t * static_cast<double>(j);
    return belief::normalized_entropy(belief::answer_distribution(v));
}

}  // namespace

VectorXd logliks_for_entropy(double entropy, int n, int argmax_index, double shift) {
    if (n < 2) throw std::invalid_argument("logliks_for_entropy: n < 2");
    if (argmax_index < 0 || argmax_index >= n)
        throw std::invalid_argument("logliks_for_entropy: bad argmax index");
    if (entropy <= 0.0 || entropy > 1.0)
        throw std::invalid_argument("logliks_for_entropy: entropy must be in (0,1]");

    double t = 0.0;
    if (entropy < 1.0) {
        double lo = 0.0, hi = 400.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (entropy_at_scale(mid, n) > entropy) lo = mid;
            else hi = mid;
        }
        t = 0.5 * (lo + hi);
    }

    VectorXd v(n);
    for (int j = 0; j < n; ++j) v[(argmax_index + j) % n] = -t * static_cast<double>(j);
    v.array() += shift - belief::log_sum_exp(v);
    return v;
}

void SynthParams::validate() const {
    if (n_questions < 1) throw std::invalid_argument("synth: n_questions < 1");
    if (n_options < 2 || n_options > 26) throw std::invalid_argument("synth: n_options out of range");
    if (n_samples < 1) throw std::invalid_argument("synth: n_samples < 1");
    if (steps_per_rationale < 1) throw std::invalid_argument("synth: steps_per_rationale < 1");
    if (!(entropy_min > 0.0 && entropy_max < 1.0 && entropy_min < entropy_max))
        throw std::invalid_argument("synth: entropy range must satisfy 0 < min < max < 1");
    if (performance_inter_rate < 0.0 || performance_inter_rate > 1.0)
        throw std::invalid_argument("synth: performance_inter_rate outside [0,1]");
    if (sufficiency_rate < 0.0 || sufficiency_rate > 1.0)
        throw std::invalid_argument("synth: sufficiency_rate outside [0,1]");
    check_effect(relevance, entropy_min, entropy_max, "relevance");
    check_effect(relevance_neg, entropy_min, entropy_max, "relevance_neg");
    check_effect(explicitness, entropy_min, entropy_max, "explicitness");
    check_effect(explicitness_neg, entropy_min, entropy_max, "explicitness_neg");
    if (info_corr_terciles) {
        for (double r : *info_corr_terciles)
            if (r <= -1.0 || r >= 1.0)
                throw std::invalid_argument("synth: tercile correlation targets must be in (-1,1)");
        if (info_noise_sd <= 0.0) throw std::invalid_argument("synth: info_noise_sd must be > 0");
        if (!(relevance_lo >= 0.0 && relevance_hi <= 1.0 && relevance_lo < relevance_hi))
            throw std::invalid_argument("synth: relevance range invalid");
    }
    if (n_judges < 1) throw std::invalid_argument("synth: n_judges < 1");
    if (debias_threshold <= 0.0 || debias_threshold >= 1.0)
        throw std::invalid_argument("synth: debias_threshold outside (0,1)");
}

namespace {

struct Generator {
    const SynthParams& p;
    std::mt19937_64 rng;
    SynthOutput out;

    std::uniform_real_distribution<double> unit{0.0, 1.0};

    explicit Generator(const SynthParams& params, std::uint64_t seed) : p(params), rng(seed) {
        out.tables = std::make_shared<MockTables>();
        if (p.plant_debias) out.executor_tables = std::make_shared<MockTables>();
        for (int j = 0; j < p.n_judges; ++j) {
            out.judge_ids.push_back("judge-" + std::to_string(j));
            out.tables->judges[out.judge_ids.back()];  // ensure the table exists
        }
    }

    int options_for(int qi) const {
        // Golden set mixes 5-way and binary questions.
        if (p.golden_quirks && qi >= 6) return 2;
        return p.n_options;
    }

    int other_index(int n, int avoid) {
        std::uniform_int_distribution<int> pick(0, n - 2);
        int idx = pick(rng);
        if (idx >= avoid) ++idx;
        return idx;
    }

    Question make_question(int qi) {
        const int n = options_for(qi);
        Question q;
        q.id = p.dataset_prefix + "-" + std::to_string(qi);
        q.text = "Which option best matches synthetic pattern " + std::to_string(qi) + "?";
        for (int j = 0; j < n; ++j) {
            Choice c;
            c.label = std::string(1, static_cast<char>('a' + j));
            c.text = std::string(kAdjectives[(qi * 3 + j) % kAdjectives.size()]) + " " +
                     kNouns[(qi * 7 + j * 5) % kNouns.size()];
            q.choices.push_back(std::move(c));
        }
        if (p.golden_quirks && qi == 7) {
            q.facts = std::vector<std::string>{"Fact alpha about pattern 7.",
                                               "Fact beta about pattern 7."};
        }
        return q;
    }

    // Registers per-choice completions of a prompt with single planted means.
    void put_choice_scores(MockTables& tables, const Question& q, const std::string& prompt,
                           ConstRefVec values, bool two_token) {
        for (int j = 0; j < q.num_choices(); ++j) {
            const std::string completion = belief::choice_completion(q.choices[j]);
            std::vector<double> tokens;
            if (two_token) tokens = {values[j] - 0.05, values[j] + 0.05};
            else tokens = {values[j]};
            tables.score[MockTables::key(prompt, completion)] = std::move(tokens);
        }
    }

    // Probability vector with `winner` at mass q and the rest of the mass
    // spread proportionally to `base` over the other indices.
    VectorXd winner_distribution(ConstRefVec base, int winner, double q) {
        const Index n = base.size();
        VectorXd probs(n);
        long double rest = 0.0L;
        for (Index i = 0; i < n; ++i)
            if (i != winner) rest += base[i];
        for (Index i = 0; i < n; ++i) {
            if (i == winner) probs[i] = q;
            else probs[i] = (1.0 - q) * static_cast<double>(base[i] / rest);
        }
        return probs;
    }

    double tercile_weight(double h) const {
        const auto& targets = *p.info_corr_terciles;
        const double span = (p.entropy_max - p.entropy_min) / 3.0;
        int tercile = 2;
        if (h < p.entropy_min + span) tercile = 0;
        else if (h < p.entropy_min + 2.0 * span) tercile = 1;
        const double rho = targets[static_cast<std::size_t>(tercile)];
        const double sigma_rel = (p.relevance_hi - p.relevance_lo) / std::sqrt(12.0);
        return rho * p.info_noise_sd / (sigma_rel * std::sqrt(1.0 - rho * rho));
    }

    void generate_question(int qi) {
        const Question q = make_question(qi);
        const int n = q.num_choices();
        QuestionTruth truth;

        std::uniform_real_distribution<double> entropy_dist(p.entropy_min, p.entropy_max);
        truth.entropy = entropy_dist(rng);
        truth.direct_argmax = std::uniform_int_distribution<int>(0, n - 1)(rng);
        truth.gold = std::uniform_int_distribution<int>(0, n - 1)(rng);
        const double lse_shift = std::uniform_real_distribution<double>(-2.5, -0.5)(rng);
        truth.lse = lse_shift;

        Question gq = q;
        gq.gold_index = truth.gold;

        const VectorXd direct_logliks =
            logliks_for_entropy(truth.entropy, n, truth.direct_argmax, lse_shift);
        const VectorXd direct_probs = belief::answer_distribution(direct_logliks);
        put_choice_scores(*out.tables, gq, belief::direct_prompt(gq), direct_logliks, true);

        MockTables::GenScript gen_script;
        const std::string cot_prompt = cot::build_cot_prompt(gq);

        for (int s = 0; s < p.n_samples; ++s) {
            SampleTruth st;
            generate_sample(gq, qi, s, truth, direct_probs, st, gen_script);
            truth.samples.push_back(std::move(st));
        }
        out.tables->generate[cot_prompt] = std::move(gen_script);

        if (p.plant_debias) plant_executor(gq, qi, truth);

        out.questions.push_back(gq);
        out.truths.push_back(std::move(truth));
    }

    void generate_sample(const Question& q, int qi, int s, const QuestionTruth& truth,
                         ConstRefVec direct_probs, SampleTruth& st,
                         MockTables::GenScript& gen_script) {
        const int n = q.num_choices();
        const double h = truth.entropy;

        // Intermediate answer the rationale argues for.
        int a_inter;
        if (p.info_corr_terciles) {
            a_inter = (truth.direct_argmax + 1) % n;  // second-ranked direct choice
        } else {
            const double p_keep =
                p.consistency == SynthParams::Consistency::OneMinusEntropy ? 1.0 - h : 0.5;
            a_inter = unit(rng) < p_keep ? truth.direct_argmax : other_index(n, truth.direct_argmax);
        }
        st.a_inter = a_inter;

        // Rationale attributes.
        if (p.info_corr_terciles) {
            st.relevance =
                std::uniform_real_distribution<double>(p.relevance_lo, p.relevance_hi)(rng);
        } else {
            st.relevance = sample_effect(p.relevance, h, rng);
        }
        st.relevance_neg = sample_effect(p.relevance_neg, h, rng);
        st.explicitness = sample_effect(p.explicitness, h, rng);
        st.explicitness_neg = sample_effect(p.explicitness_neg, h, rng);

        std::normal_distribution<double> len_noise(0.0, p.length_noise > 0 ? p.length_noise : 1e-12);
        st.planted_length = std::max<long>(
            p.length_min,
            std::lround(p.length_base + p.length_slope * h +
                        (p.length_noise > 0 ? len_noise(rng) : 0.0)));

        // Degenerate quirks: empty generation and conclusion-only text.
        const bool empty_quirk = p.degenerate_quirks && qi == 0 && s == 1;
        const bool conclusion_only_quirk = p.degenerate_quirks && qi == 1 && s == 0;
        const bool no_conclusion_quirk = p.golden_quirks && qi == 2 && s == 1;

        std::vector<std::string> steps;
        for (int t = 0; t < p.steps_per_rationale; ++t) {
            steps.push_back("Step " + std::to_string(t + 1) + " for question " + q.id +
                            " sample " + std::to_string(s) + " weighs the option " +
                            q.choices[a_inter].text + ".");
        }

        std::string raw;
        if (empty_quirk) {
            raw = "";
        } else if (conclusion_only_quirk) {
            raw = "Therefore, the answer is (" + q.choices[a_inter].label + ").";
        } else {
            for (std::size_t i = 0; i < steps.size(); ++i) {
                if (i > 0) raw += ' ';
                raw += steps[i];
            }
            if (!no_conclusion_quirk)
                raw += " Therefore, the answer is (" + q.choices[a_inter].label + ").";
        }

        const bool truncated_quirk = p.golden_quirks && qi == 9 && s == 1;
        gen_script.texts.push_back(raw);
        gen_script.truncated.push_back(truncated_quirk);

        if (empty_quirk) {
            st.degenerate = true;
            st.a_inter = std::nullopt;
            return;
        }

        // Token-count scoring of the raw text (empty prompt).
        std::vector<double> tokens(static_cast<std::size_t>(st.planted_length));
        for (std::size_t i = 0; i < tokens.size(); ++i)
            tokens[i] = -1.0 - 0.001 * static_cast<double>(i % 7);
        out.tables->score[MockTables::key("", raw)] = std::move(tokens);

        if (conclusion_only_quirk) {
            st.degenerate = true;
            st.a_inter = std::nullopt;
            return;
        }

        const std::string body = cot::strip_conclusion(raw).body;

        // NLI entries over the body steps.
        auto put_nli = [&](const std::string& premise, const std::string& hypothesis, double e) {
            out.tables->nli[MockTables::key(premise, hypothesis)] = {e, (1.0 - e) * 0.7,
                                                                     (1.0 - e) * 0.3};
        };
        for (const auto& step : steps) {
            put_nli(step, metrics::hypothesis_explains(q.choices[a_inter].text), st.relevance);
            put_nli(step, metrics::hypothesis_concludes(q.choices[a_inter].text), st.explicitness);
            for (int j = 0; j < n; ++j) {
                if (j == a_inter) continue;
                put_nli(step, metrics::hypothesis_explains(q.choices[j].text), st.relevance_neg);
                put_nli(step, metrics::hypothesis_rejects(q.choices[j].text), st.explicitness_neg);
            }
        }

        // Rationale-conditioned answer distribution.
        VectorXd cot_probs;
        if (p.info_corr_terciles) {
            const double w = tercile_weight(h);
            const double rel_mean = 0.5 * (p.relevance_lo + p.relevance_hi);
            double info = w * (st.relevance - rel_mean) +
                          std::normal_distribution<double>(0.0, p.info_noise_sd)(rng);
            const double p_a = direct_probs[a_inter];
            info = std::min(info, std::log(0.95 / p_a));
            info = std::max(info, std::log(1e-6 / p_a));
            cot_probs = winner_distribution(direct_probs, a_inter, p_a * std::exp(info));
            st.informativeness = info;
        } else if (p.cot_info_noise) {
            double info =
                std::normal_distribution<double>(p.cot_info_noise_mean, p.cot_info_noise_sd)(rng);
            const double p_a = direct_probs[a_inter];
            info = std::min(info, std::log(0.95 / p_a));
            info = std::max(info, std::log(1e-6 / p_a));
            cot_probs = winner_distribution(direct_probs, a_inter, p_a * std::exp(info));
            st.informativeness = std::log(cot_probs[a_inter] / p_a);
        } else {
            int winner = a_inter;
            if (unit(rng) >= p.performance_inter_rate) winner = other_index(n, a_inter);
            const double q_w = std::uniform_real_distribution<double>(0.55, 0.92)(rng);
            cot_probs = winner_distribution(direct_probs, winner, q_w);
            st.informativeness = std::log(cot_probs[a_inter] / direct_probs[a_inter]);
        }
        st.cot_argmax = static_cast<int>(belief::argmax_lowest(cot_probs));

        VectorXd cot_logliks = cot_probs.array().log() - 0.2;
        put_choice_scores(*out.tables, q, cot::cot_scoring_prompt(q, body), cot_logliks, false);

        // Rationale-only distribution drives sufficiency.
        st.sufficient = unit(rng) < p.sufficiency_rate;
        VectorXd suff_probs = cot_probs;
        if (!st.sufficient) {
            const int swap_to = other_index(n, st.cot_argmax);
            std::swap(suff_probs[st.cot_argmax], suff_probs[swap_to]);
        }
        VectorXd suff_logliks = suff_probs.array().log() - 0.1;
        put_choice_scores(*out.tables, q, cot::rationale_only_prompt(q, body), suff_logliks, false);

        plant_judges(q, qi, s, raw, a_inter, st);
    }

    void plant_judges(const Question& q, int qi, int s, const std::string& raw, int a_inter,
                      SampleTruth& st) {
        Rationale stub;
        stub.raw_text = raw;
        const std::string prompt = judge::build_judge_prompt(q, stub);

        const bool tie_quirk = p.golden_quirks && qi == 4 && p.n_judges >= 2;
        const bool refusal_quirk = p.golden_quirks && qi == 5 && s == 0 && p.n_judges >= 2;
        const bool unparseable_quirk = p.golden_quirks && qi == 8 && s == 1;

        const int other = (a_inter + 1) % q.num_choices();
        for (int j = 0; j < p.n_judges; ++j) {
            std::string reply;
            if (unparseable_quirk) {
                reply = "No definitive choice emerges from this rationale.";
            } else if (refusal_quirk && j == 1) {
                reply = "I cannot decide.";
            } else {
                int vote = a_inter;
                if (tie_quirk && j % 2 == 1) vote = other;
                const std::string& label = q.choices[vote].label;
                // Alternate reply formats to exercise both parser paths.
                reply = j % 2 == 0 ? "Therefore, the answer is (" + label + ")."
                                   : "Therefore, the answer is " + label + ".";
            }
            out.tables->judges[out.judge_ids[static_cast<std::size_t>(j)]][prompt] = reply;
        }
        if (unparseable_quirk) st.a_inter = std::nullopt;
        // A 2-2 tie resolves to the first-listed judge's label, which is
        // a_inter here; truth is unchanged.
    }

    void plant_executor(const Question& q, int qi, QuestionTruth& truth) {
        const int n = q.num_choices();
        MockTables& ex = *out.executor_tables;

        double h_ex;
        do {
            h_ex = std::uniform_real_distribution<double>(0.02, 0.98)(rng);
        } while (std::abs(h_ex - p.debias_threshold) < 1e-6);
        truth.executor_entropy = h_ex;

        const auto& first = truth.samples.front();
        const int a_inter = first.a_inter.value_or(truth.direct_argmax);
        truth.executor_argmax = (a_inter + 1) % n;
        truth.executor_follows = h_ex > p.debias_threshold;

        const VectorXd ex_logliks = logliks_for_entropy(h_ex, n, truth.executor_argmax, -1.2);
        put_choice_scores(ex, q, belief::direct_prompt(q), ex_logliks, false);

        // Rationale-conditioned executor scores for every sample body.
        for (std::size_t s = 0; s < truth.samples.size(); ++s) {
            if (truth.samples[s].degenerate) continue;
            const std::string raw = raw_for(q, static_cast<int>(s));
            const std::string body = cot::strip_conclusion(raw).body;
            const int winner = truth.executor_follows ? a_inter : truth.executor_argmax;
            VectorXd probs(n);
            for (int j = 0; j < n; ++j)
                probs[j] = j == winner ? 0.8 : 0.2 / static_cast<double>(n - 1);
            VectorXd logliks = probs.array().log() - 0.4;
            put_choice_scores(ex, q, cot::cot_scoring_prompt(q, body), logliks, false);
        }
        (void)qi;
    }

    std::string raw_for(const Question& q, int s) const {
        const auto& script = out.tables->generate.at(cot::build_cot_prompt(q));
        return script.texts.at(static_cast<std::size_t>(s));
    }

    SynthOutput run() {
        for (int qi = 0; qi < p.n_questions; ++qi) generate_question(qi);
        return std::move(out);
    }
};

}  // namespace

SynthOutput generate_population(const SynthParams& params, std::uint64_t seed) {
    params.validate();
    Generator gen(params, seed);
    return gen.run();
}

std::vector<PlantedExpectation> planted_report(const SynthParams& p) {
    p.validate();
    std::vector<PlantedExpectation> rows;

    const double range = p.entropy_max - p.entropy_min;
    const double var_h = range * range / 12.0;
    const double sigma_h = std::sqrt(var_h);
    const double mean_h = 0.5 * (p.entropy_min + p.entropy_max);
    const double mean_h2 =
        (std::pow(p.entropy_max, 3) - std::pow(p.entropy_min, 3)) / (3.0 * range);

    const auto linear_r = [&](const LinearEffect& e, const std::string& name) {
        PlantedExpectation row;
        row.factor = name;
        if (e.slope == 0.0) {
            row.expected_r = 0.0;
            row.note = "no planted effect";
        } else {
            const double num = e.slope * sigma_h;
            row.expected_r = num / std::sqrt(num * num + e.noise_sd * e.noise_sd);
            row.note = "question-level linear planting vs entropy";
        }
        return row;
    };
    rows.push_back(linear_r(p.relevance, "relevance"));
    rows.push_back(linear_r(p.relevance_neg, "relevance_neg"));
    rows.push_back(linear_r(p.explicitness, "explicitness"));
    rows.push_back(linear_r(p.explicitness_neg, "explicitness_neg"));

    PlantedExpectation cons;
    cons.factor = "consistency_inter";
    if (p.consistency == SynthParams::Consistency::OneMinusEntropy) {
        // Bernoulli(1 - h): cov(h, X) = -var(h); var(X) = var(h) + E[h(1-h)].
        const double bern = mean_h - mean_h2;
        cons.expected_r = -sigma_h / std::sqrt(var_h + bern);
        cons.note = "P(consistency=1) = 1 - entropy; group aggregation strengthens this";
    } else {
        cons.expected_r = 0.0;
        cons.note = "null planting";
    }
    rows.push_back(cons);

    if (p.info_corr_terciles) {
        const auto& t = *p.info_corr_terciles;
        for (int j = 0; j < 3; ++j) {
            PlantedExpectation row;
            row.factor = "informativeness~relevance/tercile" + std::to_string(j);
            row.expected_r = t[static_cast<std::size_t>(j)];
            row.note = "within-tercile corr(informativeness, relevance) target";
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace cotlens::synth
