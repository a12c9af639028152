#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cotlens/eigen_types.hpp"

namespace cotlens::stats {

enum class Method { Pearson, Spearman };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Equal-width grouping of a factor. edges has k+1 strictly increasing
/// entries; intervals are half-open with the top edge inclusive. Non-finite
/// values get group -1 and are excluded everywhere downstream.
struct BinAssignment {
    int k = 0;
    VectorXd edges;
    std::vector<int> group_of;   // aligned with the input vector
    std::vector<int> occupancy;  // size k; empty groups permitted
    std::vector<double> z_group_means;  // size k; NaN for empty groups

    int group_for(double z) const;
};

// Requires k >= 2, at least k finite values, and a non-constant factor
// ("degenerate factor" otherwise).
BinAssignment equal_width_bins(ConstRefVec z, int k);

/// Per-group means of an aligned factor, restricted to non-empty groups.
struct GroupMeans {
    std::vector<int> groups;     // group indices with at least one valid value
    VectorXd x_means;            // factor means, aligned with groups
    VectorXd z_means;            // grouping-factor means of the same groups
    std::vector<int> occupancy;  // number of valid factor values per group
};

GroupMeans aggregate_groups(ConstRefVec x, const BinAssignment& bins);

// Average ranks (1-based), ties shared.
VectorXd ranks(ConstRefVec x);

// Pearson r or Spearman rho; absent for fewer than 3 points or a constant
// input.
std::optional<double> correlation(ConstRefVec x, ConstRefVec y, Method method);

struct CorrelationRow {
    std::string target;  // grouping / confound factor
    std::string factor;
    std::optional<double> r;
    int n_groups_used = 0;
    Method method = Method::Pearson;
};

/// Column-oriented record table; all columns aligned, NaN marks a missing
/// value.
struct FactorTable {
    std::vector<std::string> ids;
    std::map<std::string, VectorXd> columns;

    Index rows() const { return static_cast<Index>(ids.size()); }
    const VectorXd& column(const std::string& name) const;
    bool has_column(const std::string& name) const { return columns.count(name) > 0; }
};

// Bins on z, aggregates every factor to group means, and correlates group
// means of the factor against group means of z. Rows with fewer than 3
// non-empty groups report r as absent. k below 100 violates the <1% mean
// occupancy rule and is only logged.
std::vector<CorrelationRow> inter_group_analysis(const FactorTable& table, const std::string& z_name,
                                                 const std::vector<std::string>& factor_names, int k,
                                                 Method method);

struct SubgroupSummary {
    int subgroup = 0;
    double lo = 0.0;
    double hi = 0.0;
    int n_records = 0;
    double confound_mean = 0.0;
    double confound_sd = 0.0;
    bool analyzed = false;  // false when under the minimum subgroup size
};

struct IntraRow {
    int subgroup = 0;
    int n_records = 0;
    CorrelationRow row;
};

struct IntraGroupResult {
    std::vector<SubgroupSummary> subgroups;
    std::vector<IntraRow> rows;
};

// Bins the confound into k_outer groups and correlates target against each
// factor within every subgroup holding at least min_subgroup records
// (pairwise-complete). Undersized subgroups report absent rows.
IntraGroupResult intra_group_analysis(const FactorTable& table, const std::string& confound_name,
                                      const std::string& target_name,
                                      const std::vector<std::string>& factor_names, int k_outer,
                                      Method method, int min_subgroup = 30);

struct Histogram {
    VectorXd edges;
    std::vector<int> counts;
};

// Equal-width histogram; fixed range when lo/hi given, data range otherwise.
// Top edge inclusive, so counts sum to the number of finite values.
Histogram histogram(ConstRefVec values, int k, std::optional<double> lo = std::nullopt,
                    std::optional<double> hi = std::nullopt);

}  // namespace cotlens::stats
