#include <charconv>
#include <cmath>
#include <fstream>

#include "cotlens/logging.hpp"
#include "cotlens/runner.hpp"

namespace cotlens::runner {

namespace {

std::string fmt(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt(std::optional<double> v) { return v ? fmt(*v) : ""; }

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& header)
        : out_(file, std::ios::trunc) {
        if (!out_) throw std::runtime_error("cannot write report: " + file.string());
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out_ << ',';
            out_ << csv_escape(cells[i]);
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

const std::string kSchema = std::to_string(kReportSchemaVersion);

Index count_finite(ConstRefVec v) {
    Index n = 0;
    for (Index i = 0; i < v.size(); ++i)
        if (std::isfinite(v[i])) ++n;
    return n;
}

// Difficulty-binned means of two columns; degenerate binning leaves only the
// header.
void write_binned_pair(const std::filesystem::path& file, const stats::FactorTable& table,
                       const std::string& bin_col, const std::string& col_a,
                       const std::string& col_b, int k, const std::string& name_a,
                       const std::string& name_b) {
    CsvWriter csv(file, {"schema_version", "bin_index", bin_col + "_lo", bin_col + "_hi", "n",
                         name_a, name_b});
    try {
        const VectorXd& z = table.column(bin_col);
        const int k_eff = std::max(2, std::min<int>(k, static_cast<int>(count_finite(z))));
        const auto bins = stats::equal_width_bins(z, k_eff);
        const auto ga = stats::aggregate_groups(table.column(col_a), bins);
        const auto gb = stats::aggregate_groups(table.column(col_b), bins);
        std::map<int, std::pair<std::optional<double>, std::optional<double>>> merged;
        for (std::size_t i = 0; i < ga.groups.size(); ++i)
            merged[ga.groups[i]].first = ga.x_means[static_cast<Index>(i)];
        for (std::size_t i = 0; i < gb.groups.size(); ++i)
            merged[gb.groups[i]].second = gb.x_means[static_cast<Index>(i)];
        for (const auto& [g, vals] : merged) {
            csv.row({kSchema, std::to_string(g), fmt(bins.edges[g]), fmt(bins.edges[g + 1]),
                     std::to_string(bins.occupancy[static_cast<std::size_t>(g)]), fmt(vals.first),
                     fmt(vals.second)});
        }
    } catch (const std::exception& e) {
        log_warn(file.filename().string() + ": " + e.what());
    }
}

void write_inter_csv(const stats::FactorTable& table, const std::filesystem::path& file,
                     const AnalysisConfig& analysis, const std::vector<std::string>& targets) {
    CsvWriter csv(file, {"schema_version", "target", "factor", "method", "r", "n_groups_used"});
    std::vector<std::string> all = metric_factor_names();
    all.insert(all.end(), {"entropy", "difficulty", "lse", "direct_correct"});
    for (const auto& target : targets) {
        std::vector<std::string> factors;
        for (const auto& f : all)
            if (f != target) factors.push_back(f);
        try {
            const int k_eff = std::max(
                2, std::min<int>(analysis.k, static_cast<int>(count_finite(table.column(target)))));
            for (const auto& row :
                 stats::inter_group_analysis(table, target, factors, k_eff, analysis.method)) {
                csv.row({kSchema, row.target, row.factor, stats::to_string(row.method), fmt(row.r),
                         std::to_string(row.n_groups_used)});
            }
        } catch (const std::exception& e) {
            log_warn("inter_corr(" + target + "): " + e.what());
        }
    }
}

void write_intra_csv(const stats::FactorTable& table, const std::filesystem::path& rows_file,
                     const std::filesystem::path& subgroups_file, const AnalysisConfig& analysis,
                     const std::string& confound, const std::string& target) {
    CsvWriter csv(rows_file, {"schema_version", "confound", "subgroup", "confound_lo",
                              "confound_hi", "n_records", "target", "factor", "method", "r"});
    CsvWriter sub(subgroups_file, {"schema_version", "subgroup", "confound_lo", "confound_hi",
                                   "n_records", "confound_mean", "confound_sd", "analyzed"});
    try {
        std::vector<std::string> factors;
        for (const auto& f : metric_factor_names())
            if (f != target) factors.push_back(f);
        const auto result = stats::intra_group_analysis(
            table, confound, target, factors, analysis.intra_k, analysis.method,
            analysis.min_subgroup);
        for (const auto& s : result.subgroups) {
            sub.row({kSchema, std::to_string(s.subgroup), fmt(s.lo), fmt(s.hi),
                     std::to_string(s.n_records), fmt(s.confound_mean), fmt(s.confound_sd),
                     s.analyzed ? "1" : "0"});
        }
        for (const auto& r : result.rows) {
            const auto& s = result.subgroups[static_cast<std::size_t>(r.subgroup)];
            csv.row({kSchema, confound, std::to_string(r.subgroup), fmt(s.lo), fmt(s.hi),
                     std::to_string(r.n_records), r.row.target, r.row.factor,
                     stats::to_string(r.row.method), fmt(r.row.r)});
        }
    } catch (const std::exception& e) {
        log_warn(std::string("intra_corr: ") + e.what());
    }
}

stats::FactorTable load_table(const std::vector<Question>& questions, const store::RunDir& run) {
    const RunData data = load_run_data(questions, run);
    if (data.records.empty()) throw std::runtime_error("no metric records in run " + run.root.string());
    return aggregate_records(data);
}

}  // namespace

void write_debias_csv(const std::filesystem::path& file, const std::vector<DebiasRow>& rows) {
    CsvWriter csv(file, {"schema_version", "level", "label", "entropy_lo", "entropy_hi", "n",
                         "performance"});
    for (const auto& r : rows)
        csv.row({kSchema, std::to_string(r.level), r.label, fmt(r.entropy_lo), fmt(r.entropy_hi),
                 std::to_string(r.n), fmt(r.performance)});
}

void emit_inter_report(const std::vector<Question>& questions, const store::RunDir& run,
                       const AnalysisConfig& analysis, const std::vector<std::string>& targets) {
    std::filesystem::create_directories(run.reports());
    write_inter_csv(load_table(questions, run), run.reports() / "inter_corr.csv", analysis, targets);
}

void emit_intra_report(const std::vector<Question>& questions, const store::RunDir& run,
                       const AnalysisConfig& analysis, const std::string& confound,
                       const std::string& target) {
    std::filesystem::create_directories(run.reports());
    const auto table = load_table(questions, run);
    write_intra_csv(table, run.reports() / "intra_corr.csv", run.reports() / "intra_subgroups.csv",
                    analysis, confound, target);
}

void emit_reports(const std::vector<Question>& questions, const store::RunDir& run,
                  const AnalysisConfig& analysis) {
    const RunData data = load_run_data(questions, run);
    if (data.records.empty()) throw std::runtime_error("emit_reports: no metric records in run");
    const stats::FactorTable table = aggregate_records(data);
    const auto rep = run.reports();
    std::filesystem::create_directories(rep);

    // 1. Direct vs CoT end-to-end accuracy across difficulty bins, plus the
    // raw per-question triples so any 2-D (entropy x difficulty) binning can
    // be applied downstream.
    write_binned_pair(rep / "shift_e2e.csv", table, "difficulty", "direct_correct",
                      "performance_e2e", analysis.shift_bins, "direct_e2e", "cot_e2e");
    {
        CsvWriter csv(rep / "shift_points.csv", {"schema_version", "question_id", "entropy",
                                                 "difficulty", "direct_correct", "cot_e2e"});
        const VectorXd& ent = table.column("entropy");
        const VectorXd& dif = table.column("difficulty");
        const VectorXd& dc = table.column("direct_correct");
        const VectorXd& ce = table.column("performance_e2e");
        for (Index i = 0; i < table.rows(); ++i) {
            csv.row({kSchema, table.ids[static_cast<std::size_t>(i)], fmt(ent[i]), fmt(dif[i]),
                     fmt(dc[i]), fmt(ce[i])});
        }
    }

    // 2. Stage separation: end-to-end vs stage-two accuracy across difficulty.
    write_binned_pair(rep / "stage_separation.csv", table, "difficulty", "performance_e2e",
                      "performance_inter", analysis.shift_bins, "performance_e2e",
                      "performance_inter");

    // 3. Inter-group correlation matrix rows.
    write_inter_csv(table, rep / "inter_corr.csv", analysis, {"entropy", "informativeness"});

    // 4. Intra-group evolution matrix plus subgroup confound summaries.
    write_intra_csv(table, rep / "intra_corr.csv", rep / "intra_subgroups.csv", analysis,
                    "entropy", "informativeness");

    // 5. Belief histograms: entropy on its fixed [0,1] range, LSE on the data
    // range.
    {
        CsvWriter csv(rep / "belief_hists.csv",
                      {"schema_version", "factor", "bin_index", "lo", "hi", "count"});
        const auto emit = [&](const std::string& name, const stats::Histogram& h) {
            for (std::size_t b = 0; b < h.counts.size(); ++b) {
                csv.row({kSchema, name, std::to_string(b), fmt(h.edges[static_cast<Index>(b)]),
                         fmt(h.edges[static_cast<Index>(b + 1)]), std::to_string(h.counts[b])});
            }
        };
        emit("entropy", stats::histogram(table.column("entropy"), analysis.hist_bins, 0.0, 1.0));
        emit("lse", stats::histogram(table.column("lse"), analysis.hist_bins));
    }

    // 6. Explicitness grouping: mean stage-two performance per boolean cell,
    // over per-sample records.
    {
        CsvWriter csv(rep / "explicitness_table.csv",
                      {"schema_version", "explicitness", "explicitness_neg", "n",
                       "performance_inter"});
        long n_cell[2][2] = {};
        long double sum_cell[2][2] = {};
        for (const auto& rec : data.records) {
            if (!rec.explicitness_any || !rec.explicitness_neg_any || !rec.performance_inter)
                continue;
            const int a = *rec.explicitness_any ? 1 : 0;
            const int b = *rec.explicitness_neg_any ? 1 : 0;
            ++n_cell[a][b];
            sum_cell[a][b] += *rec.performance_inter;
        }
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                std::optional<double> mean;
                if (n_cell[a][b] > 0)
                    mean = static_cast<double>(sum_cell[a][b] /
                                               static_cast<long double>(n_cell[a][b]));
                csv.row({kSchema, a ? "true" : "false", b ? "true" : "false",
                         std::to_string(n_cell[a][b]), fmt(mean)});
            }
        }
    }
}

}  // namespace cotlens::runner
