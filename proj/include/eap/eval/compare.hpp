#pragma once

#include <cmath>
#include <sstream>

#include "eap/common.hpp"
#include "eap/eval/evaluate.hpp"

namespace eap {

// One method's stack of per-seed results plus its training-sample ledger.
struct MethodRuns {
    std::string method;
    std::vector<EvalReport> reports;            // one per seed, same order for all methods
    std::vector<std::int64_t> total_samples;    // training totals, error rollouts included
    std::vector<std::int64_t> error_samples;    // error-function share of the total
};

struct ComparisonRow {
    std::string method;
    double mean_normalized = 0.0;
    double std_normalized = 0.0;
    double mean_total_samples = 0.0;
    double mean_error_samples = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    // Relative improvement of the first method (EAP by convention) over each
    // other row: (eap - base) / base on mean normalized return.
    std::vector<double> improvement_vs;  // aligned with rows (0 for the first)
    double max_budget_deviation = 0.0;   // worst per-seed relative total mismatch
    bool budget_parity_ok = false;
    bool error_samples_counted = false;  // first method reports nonzero error samples
};

// Cross-method ranking with parity guards: refuses to compare runs whose
// per-seed populations differ, checks per-seed budget totals against the
// first method's within 1%, and reports relative improvements.
inline ComparisonReport compare_methods(const std::vector<MethodRuns>& methods) {
    require(methods.size() >= 2, "compare_methods: need at least two methods");
    const std::size_t n_seeds = methods[0].reports.size();
    require(n_seeds > 0, "compare_methods: no reports");
    for (const auto& m : methods) {
        require(m.reports.size() == n_seeds && m.total_samples.size() == n_seeds,
                "compare_methods: methods ran different seed counts");
    }
    for (std::size_t s = 0; s < n_seeds; ++s) {
        const std::uint64_t h = methods[0].reports[s].population_hash;
        for (const auto& m : methods)
            if (m.reports[s].population_hash != h)
                throw ConfigError("compare_methods: population mismatch between runs (seed index " +
                                  std::to_string(s) + ")");
    }

    ComparisonReport out;
    for (const auto& m : methods) {
        ComparisonRow row;
        row.method = m.method;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            row.mean_normalized += m.reports[s].mean_normalized;
            row.mean_total_samples += static_cast<double>(m.total_samples[s]);
            row.mean_error_samples += static_cast<double>(m.error_samples.empty()
                                                              ? 0
                                                              : m.error_samples[s]);
        }
        row.mean_normalized /= static_cast<double>(n_seeds);
        row.mean_total_samples /= static_cast<double>(n_seeds);
        row.mean_error_samples /= static_cast<double>(n_seeds);
        double var = 0.0;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            const double d = m.reports[s].mean_normalized - row.mean_normalized;
            var += d * d;
        }
        row.std_normalized = std::sqrt(var / static_cast<double>(n_seeds));
        out.rows.push_back(row);
    }

    out.max_budget_deviation = 0.0;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        const double anchor = static_cast<double>(methods[0].total_samples[s]);
        for (const auto& m : methods) {
            const double dev = std::fabs(static_cast<double>(m.total_samples[s]) - anchor) /
                               anchor;
            out.max_budget_deviation = std::max(out.max_budget_deviation, dev);
        }
    }
    out.budget_parity_ok = out.max_budget_deviation <= 0.01;
    out.error_samples_counted = !methods[0].error_samples.empty();
    for (std::size_t s = 0; s < n_seeds && out.error_samples_counted; ++s)
        if (methods[0].error_samples[s] <= 0) out.error_samples_counted = false;

    const double eap = out.rows[0].mean_normalized;
    for (const auto& row : out.rows) {
        if (&row == &out.rows[0]) {
            out.improvement_vs.push_back(0.0);
        } else {
            out.improvement_vs.push_back(row.mean_normalized > 1e-12
                                             ? (eap - row.mean_normalized) / row.mean_normalized
                                             : std::numeric_limits<double>::quiet_NaN());
        }
    }
    return out;
}

inline std::string comparison_csv(const ComparisonReport& rep) {
    std::ostringstream out;
    out << "# eap-comparison v1\n";
    out << "method,mean_normalized_return,std_normalized_return,mean_total_samples,"
           "mean_error_samples,improvement_of_first_vs_this\n";
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        out << r.method << ',' << r.mean_normalized << ',' << r.std_normalized << ','
            << r.mean_total_samples << ',' << r.mean_error_samples << ','
            << rep.improvement_vs[i] << "\n";
    }
    out << "budget_parity_ok," << (rep.budget_parity_ok ? 1 : 0) << ",max_deviation,"
        << rep.max_budget_deviation << ",error_samples_counted,"
        << (rep.error_samples_counted ? 1 : 0) << "\n";
    return out.str();
}

}  // namespace eap
