#pragma once

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "eap/common.hpp"

namespace eap {

enum class AblationAxis { HorizonT, Representation, MuSplit, ReferenceChoice };

inline std::string to_string(AblationAxis a) {
    switch (a) {
        case AblationAxis::HorizonT: return "horizon_T";
        case AblationAxis::Representation: return "representation";
        case AblationAxis::MuSplit: return "mu_split";
        case AblationAxis::ReferenceChoice: return "reference_choice";
    }
    return "horizon_T";
}

inline AblationAxis ablation_axis_from_string(const std::string& s) {
    if (s == "horizon_T") return AblationAxis::HorizonT;
    if (s == "representation") return AblationAxis::Representation;
    if (s == "mu_split") return AblationAxis::MuSplit;
    if (s == "reference_choice") return AblationAxis::ReferenceChoice;
    throw ConfigError("unknown ablation axis: " + s);
}

struct AblationSpec {
    AblationAxis axis = AblationAxis::HorizonT;
    std::vector<std::string> values;
    std::vector<std::uint64_t> seeds;

    void validate() const {
        if (values.empty()) throw ConfigError("ablation: no axis values");
        if (seeds.empty()) throw ConfigError("ablation: no seeds");
        if (axis == AblationAxis::HorizonT) {
            for (const auto& v : values) {
                const int t = std::stoi(v);
                if (t < 1 || t > 8) throw ConfigError("ablation: T values must lie in {1..8}");
            }
        }
    }
};

struct AblationCell {
    std::string value;
    double mean = 0.0;
    double stddev = 0.0;
    int n_ok = 0;
    int n_runs = 0;
    bool missing() const { return n_ok == 0; }
};

struct AblationTable {
    std::string axis;
    std::vector<AblationCell> rows;
};

// Runs the sweep: one full train+eval per (value, seed) via the caller's
// runner, which returns the held-out mean normalized return. A failed run is
// recorded and leaves its cell partial (or missing), never aborts the sweep.
template <typename RunFn>
AblationTable run_ablation(const AblationSpec& spec, RunFn&& run) {
    spec.validate();
    AblationTable table;
    table.axis = to_string(spec.axis);
    for (const auto& value : spec.values) {
        AblationCell cell;
        cell.value = value;
        Vec results;
        for (std::uint64_t seed : spec.seeds) {
            ++cell.n_runs;
            try {
                results.push_back(run(value, seed));
                ++cell.n_ok;
            } catch (const std::exception& e) {
                std::cerr << "[warn] ablation cell " << table.axis << "=" << value << " seed "
                          << seed << " failed: " << e.what() << "\n";
            }
        }
        if (!results.empty()) {
            for (double r : results) cell.mean += r;
            cell.mean /= static_cast<double>(results.size());
            double var = 0.0;
            for (double r : results) var += (r - cell.mean) * (r - cell.mean);
            cell.stddev = std::sqrt(var / static_cast<double>(results.size()));
        }
        table.rows.push_back(cell);
    }
    return table;
}

inline std::string ablation_csv(const AblationTable& table) {
    std::ostringstream out;
    out << "# eap-ablation v1\n";
    out << "axis,value,mean_normalized_return,std,completed_runs,total_runs,status\n";
    for (const auto& c : table.rows) {
        out << table.axis << ',' << c.value << ',';
        if (c.missing())
            out << ",,";
        else
            out << c.mean << ',' << c.stddev << ',';
        out << c.n_ok << ',' << c.n_runs << ',' << (c.missing() ? "missing" : "ok") << "\n";
    }
    return out.str();
}

}  // namespace eap
