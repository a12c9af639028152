#include "cotlens/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cotlens/logging.hpp"

namespace cotlens::stats {

std::string to_string(Method m) { return m == Method::Pearson ? "pearson" : "spearman"; }

Method method_from_string(const std::string& s) {
    if (s == "pearson") return Method::Pearson;
    if (s == "spearman") return Method::Spearman;
    throw std::invalid_argument("unknown correlation method: " + s);
}

int BinAssignment::group_for(double z) const {
    if (!std::isfinite(z)) return -1;
    const double lo = edges[0];
    const double hi = edges[edges.size() - 1];
    if (z < lo || z > hi) return -1;
    if (z == hi) return k - 1;  // top edge inclusive
    int g = static_cast<int>(std::floor((z - lo) * static_cast<double>(k) / (hi - lo)));
    return std::clamp(g, 0, k - 1);
}

BinAssignment equal_width_bins(ConstRefVec z, int k) {
    if (k < 2) throw std::invalid_argument("equal_width_bins: k must be at least 2");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    Index n_finite = 0;
    for (Index i = 0; i < z.size(); ++i) {
        if (!std::isfinite(z[i])) continue;
        ++n_finite;
        lo = std::min(lo, z[i]);
        hi = std::max(hi, z[i]);
    }
    if (n_finite < k)
        throw std::invalid_argument("equal_width_bins: need at least k finite values");
    if (!(hi > lo)) throw std::invalid_argument("equal_width_bins: degenerate factor");

    BinAssignment bins;
    bins.k = k;
    bins.edges = VectorXd(k + 1);
    const double width = (hi - lo) / static_cast<double>(k);
    for (int j = 0; j <= k; ++j) bins.edges[j] = lo + static_cast<double>(j) * width;
    bins.edges[k] = hi;  // guard against rounding drift at the top

    bins.group_of.resize(static_cast<std::size_t>(z.size()), -1);
    bins.occupancy.assign(static_cast<std::size_t>(k), 0);
    std::vector<long double> sums(static_cast<std::size_t>(k), 0.0L);
    for (Index i = 0; i < z.size(); ++i) {
        const int g = bins.group_for(z[i]);
        bins.group_of[static_cast<std::size_t>(i)] = g;
        if (g >= 0) {
            ++bins.occupancy[static_cast<std::size_t>(g)];
            sums[static_cast<std::size_t>(g)] += z[i];
        }
    }
    bins.z_group_means.assign(static_cast<std::size_t>(k),
                              std::numeric_limits<double>::quiet_NaN());
    for (int g = 0; g < k; ++g) {
        if (bins.occupancy[static_cast<std::size_t>(g)] > 0)
            bins.z_group_means[static_cast<std::size_t>(g)] = static_cast<double>(
                sums[static_cast<std::size_t>(g)] /
                static_cast<long double>(bins.occupancy[static_cast<std::size_t>(g)]));
    }
    return bins;
}

GroupMeans aggregate_groups(ConstRefVec x, const BinAssignment& bins) {
    if (static_cast<std::size_t>(x.size()) != bins.group_of.size())
        throw std::invalid_argument("aggregate_groups: factor not aligned with bin assignment");
    std::vector<long double> sums(static_cast<std::size_t>(bins.k), 0.0L);
    std::vector<int> counts(static_cast<std::size_t>(bins.k), 0);
    for (Index i = 0; i < x.size(); ++i) {
        const int g = bins.group_of[static_cast<std::size_t>(i)];
        if (g < 0 || !std::isfinite(x[i])) continue;
        sums[static_cast<std::size_t>(g)] += x[i];
        ++counts[static_cast<std::size_t>(g)];
    }
    GroupMeans out;
    for (int g = 0; g < bins.k; ++g) {
        const int c = counts[static_cast<std::size_t>(g)];
        if (c == 0) continue;  // empty groups are omitted
        out.groups.push_back(g);
        out.occupancy.push_back(c);
    }
    out.x_means = VectorXd(static_cast<Index>(out.groups.size()));
    out.z_means = VectorXd(static_cast<Index>(out.groups.size()));
    for (std::size_t i = 0; i < out.groups.size(); ++i) {
        const auto g = static_cast<std::size_t>(out.groups[i]);
        out.x_means[static_cast<Index>(i)] =
            static_cast<double>(sums[g] / static_cast<long double>(counts[g]));
        out.z_means[static_cast<Index>(i)] = bins.z_group_means[g];
    }
    return out;
}

VectorXd ranks(ConstRefVec x) {
    const Index n = x.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return x[a] < x[b]; });

    VectorXd out(n);
    Index i = 0;
    while (i < n) {
        Index j = i;
        while (j + 1 < n && x[order[static_cast<std::size_t>(j + 1)]] ==
                                x[order[static_cast<std::size_t>(i)]])
            ++j;
        // ties share the average rank (1-based)
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Index t = i; t <= j; ++t) out[order[static_cast<std::size_t>(t)]] = avg_rank;
        i = j + 1;
    }
    return out;
}

std::optional<double> correlation(ConstRefVec x, ConstRefVec y, Method method) {
    if (x.size() != y.size()) throw std::invalid_argument("correlation: length mismatch");
    const Index n = x.size();
    if (n < 3) return std::nullopt;
    for (Index i = 0; i < n; ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) return std::nullopt;

    VectorXd xv = x, yv = y;
    if (method == Method::Spearman) {
        xv = ranks(xv);
        yv = ranks(yv);
    }

    long double sx = 0.0L, sy = 0.0L;
    for (Index i = 0; i < n; ++i) {
        sx += xv[i];
        sy += yv[i];
    }
    const long double mx = sx / static_cast<long double>(n);
    const long double my = sy / static_cast<long double>(n);
    long double cov = 0.0L, vx = 0.0L, vy = 0.0L;
    for (Index i = 0; i < n; ++i) {
        const long double dx = xv[i] - mx;
        const long double dy = yv[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if (vx <= 0.0L || vy <= 0.0L) return std::nullopt;  // constant input
    const long double r = cov / std::sqrt(vx * vy);
    return std::clamp(static_cast<double>(r), -1.0, 1.0);
}

const VectorXd& FactorTable::column(const std::string& name) const {
    const auto it = columns.find(name);
    if (it == columns.end()) throw std::invalid_argument("missing factor column: " + name);
    if (it->second.size() != rows())
        throw std::invalid_argument("factor column not aligned: " + name);
    return it->second;
}

std::vector<CorrelationRow> inter_group_analysis(const FactorTable& table, const std::string& z_name,
                                                 const std::vector<std::string>& factor_names, int k,
                                                 Method method) {
    const VectorXd& z = table.column(z_name);
    if (k < 100)
        log_warn("inter-group analysis with k=" + std::to_string(k) +
                 " leaves mean group occupancy above 1% of the data");
    const BinAssignment bins = equal_width_bins(z, k);

    std::vector<CorrelationRow> rows;
    rows.reserve(factor_names.size());
    for (const auto& factor : factor_names) {
        CorrelationRow row;
        row.target = z_name;
        row.factor = factor;
        row.method = method;
        const GroupMeans gm = aggregate_groups(table.column(factor), bins);
        row.n_groups_used = static_cast<int>(gm.groups.size());
        if (row.n_groups_used >= 3) row.r = correlation(gm.x_means, gm.z_means, method);
        rows.push_back(std::move(row));
    }
    return rows;
}

IntraGroupResult intra_group_analysis(const FactorTable& table, const std::string& confound_name,
                                      const std::string& target_name,
                                      const std::vector<std::string>& factor_names, int k_outer,
                                      Method method, int min_subgroup) {
    const VectorXd& confound = table.column(confound_name);
    const VectorXd& target = table.column(target_name);
    const BinAssignment bins = equal_width_bins(confound, k_outer);

    IntraGroupResult result;
    for (int g = 0; g < k_outer; ++g) {
        std::vector<Index> members;
        for (Index i = 0; i < confound.size(); ++i)
            if (bins.group_of[static_cast<std::size_t>(i)] == g) members.push_back(i);

        SubgroupSummary summary;
        summary.subgroup = g;
        summary.lo = bins.edges[g];
        summary.hi = bins.edges[g + 1];
        summary.n_records = static_cast<int>(members.size());
        if (!members.empty()) {
            long double sum = 0.0L;
            for (Index i : members) sum += confound[i];
            summary.confound_mean =
                static_cast<double>(sum / static_cast<long double>(members.size()));
            long double ss = 0.0L;
            for (Index i : members) {
                const long double d = confound[i] - summary.confound_mean;
                ss += d * d;
            }
            summary.confound_sd = members.size() > 1
                                      ? std::sqrt(static_cast<double>(
                                            ss / static_cast<long double>(members.size() - 1)))
                                      : 0.0;
        }
        summary.analyzed = summary.n_records >= min_subgroup;
        if (!summary.analyzed)
            log_warn("intra-group subgroup " + std::to_string(g) + " has " +
                     std::to_string(summary.n_records) + " records (< " +
                     std::to_string(min_subgroup) + "); reported absent");

        for (const auto& factor : factor_names) {
            IntraRow irow;
            irow.subgroup = g;
            irow.n_records = summary.n_records;
            irow.row.target = target_name;
            irow.row.factor = factor;
            irow.row.method = method;
            irow.row.n_groups_used = 0;
            if (summary.analyzed) {
                const VectorXd& fcol = table.column(factor);
                std::vector<double> xs, ys;
                xs.reserve(members.size());
                ys.reserve(members.size());
                for (Index i : members) {
                    if (std::isfinite(target[i]) && std::isfinite(fcol[i])) {
                        xs.push_back(target[i]);
                        ys.push_back(fcol[i]);
                    }
                }
                irow.row.n_groups_used = static_cast<int>(xs.size());
                if (xs.size() >= 3)
                    irow.row.r = correlation(to_vector(xs), to_vector(ys), method);
            }
            result.rows.push_back(std::move(irow));
        }
        result.subgroups.push_back(summary);
    }
    return result;
}

Histogram histogram(ConstRefVec values, int k, std::optional<double> lo, std::optional<double> hi) {
    if (k < 1) throw std::invalid_argument("histogram: k must be positive");
    double vlo = lo.value_or(std::numeric_limits<double>::infinity());
    double vhi = hi.value_or(-std::numeric_limits<double>::infinity());
    if (!lo || !hi) {
        for (Index i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i])) continue;
            if (!lo) vlo = std::min(vlo, values[i]);
            if (!hi) vhi = std::max(vhi, values[i]);
        }
    }
    if (!(vhi > vlo)) vhi = vlo + 1.0;  // all-equal data: single occupied bin

    Histogram h;
    h.edges = VectorXd(k + 1);
    for (int j = 0; j <= k; ++j)
        h.edges[j] = vlo + (vhi - vlo) * static_cast<double>(j) / static_cast<double>(k);
    h.counts.assign(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!std::isfinite(v) || v < vlo || v > vhi) continue;
        int g = v == vhi ? k - 1
                         : static_cast<int>(std::floor((v - vlo) * static_cast<double>(k) /
                                                       (vhi - vlo)));
        g = std::clamp(g, 0, k - 1);
        ++h.counts[static_cast<std::size_t>(g)];
    }
    return h;
}

}  // namespace cotlens::stats
