#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "eap/common.hpp"
#include "eap/env/params.hpp"
#include "eap/rng.hpp"

namespace eap {

// Which parameter group leaves the training range in held-out environments.
enum class HeldoutVary { Both, MuOnly, NuOnly };

inline std::string to_string(HeldoutVary v) {
    switch (v) {
        case HeldoutVary::Both: return "both";
        case HeldoutVary::MuOnly: return "mu_only";
        case HeldoutVary::NuOnly: return "nu_only";
    }
    return "both";
}

inline HeldoutVary heldout_vary_from_string(const std::string& s) {
    if (s == "both") return HeldoutVary::Both;
    if (s == "mu_only") return HeldoutVary::MuOnly;
    if (s == "nu_only") return HeldoutVary::NuOnly;
    throw ConfigError("unknown heldout_vary: " + s);
}

// A fixed draw of environment variants: training pool, validation partners
// for error measurement, and held-out out-of-range evaluation environments.
struct EnvPopulation {
    std::string env_name;
    std::vector<DynamicsParams> entries;
    std::vector<int> train_idx;
    std::vector<int> val_idx;
    std::vector<int> heldout_idx;
    // -1 selects the descriptor's canonical reference dynamics; otherwise an
    // index into entries (that entry is then excluded from the training pool).
    int reference_index = -1;

    DynamicsParams reference(const EnvDescriptor& desc) const {
        if (reference_index < 0) return desc.reference_params;
        require(reference_index < static_cast<int>(entries.size()), "reference_index out of range");
        return entries[reference_index];
    }

    std::vector<int> training_pool() const {
        std::vector<int> pool;
        for (int i : train_idx)
            if (i != reference_index) pool.push_back(i);
        return pool;
    }
};

namespace detail {

inline double sample_component(RngStream& rng, const Interval& train, const Interval& test,
                               bool outside) {
    if (!outside) return rng.uniform(train);
    // Uniform over test_range minus train_range, which may extend on both
    // sides. Mapped so the result is always strictly outside train_range.
    const double below = std::max(0.0, train.lo - test.lo);
    const double above = std::max(0.0, test.hi - train.hi);
    require(below + above > 0.0, "test range does not extend outside train range");
    const double u = rng.uniform() * (below + above);
    if (u < below) return test.lo + u;       // [test.lo, train.lo)
    return test.hi - (u - below);            // (train.hi, test.hi]
}

inline DynamicsParams sample_entry(const EnvDescriptor& desc, RngStream& rng, bool heldout,
                                   HeldoutVary vary) {
    Vec flat;
    flat.reserve(desc.param_specs.size());
    for (const auto& spec : desc.param_specs) {
        const bool varies = heldout && (vary == HeldoutVary::Both ||
                                        (vary == HeldoutVary::MuOnly && spec.role == ParamRole::Observable) ||
                                        (vary == HeldoutVary::NuOnly && spec.role == ParamRole::Unobservable));
        flat.push_back(sample_component(rng, spec.train_range, spec.test_range, varies));
    }
    return desc.unflatten(flat);
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline const char* role_of(const EnvPopulation& pop, int idx) {
    for (int i : pop.train_idx)
        if (i == idx) return "train";
    for (int i : pop.val_idx)
        if (i == idx) return "val";
    for (int i : pop.heldout_idx)
        if (i == idx) return "heldout";
    return "unassigned";
}

}  // namespace detail

inline EnvPopulation sample_population(const EnvDescriptor& desc, int k_train, int k_val,
                                       int k_heldout, std::uint64_t seed,
                                       HeldoutVary vary = HeldoutVary::Both) {
    require(k_train > 0 && k_val > 0 && k_heldout >= 0, "population sizes must be positive");
    EnvPopulation pop;
    pop.env_name = desc.name;
    RngStream rng(derive_seed(seed, "population"));
    for (int i = 0; i < k_train; ++i) {
        pop.train_idx.push_back(static_cast<int>(pop.entries.size()));
        pop.entries.push_back(detail::sample_entry(desc, rng, false, vary));
    }
    for (int i = 0; i < k_val; ++i) {
        pop.val_idx.push_back(static_cast<int>(pop.entries.size()));
        pop.entries.push_back(detail::sample_entry(desc, rng, false, vary));
    }
    for (int i = 0; i < k_heldout; ++i) {
        pop.heldout_idx.push_back(static_cast<int>(pop.entries.size()));
        pop.entries.push_back(detail::sample_entry(desc, rng, true, vary));
    }
    return pop;
}

inline std::string serialize_population(const EnvPopulation& pop) {
    std::ostringstream out;
    const int mu_dim = pop.entries.empty() ? 0 : static_cast<int>(pop.entries[0].mu.size());
    const int nu_dim = pop.entries.empty() ? 0 : static_cast<int>(pop.entries[0].nu.size());
    out << "eap-population v1\n";
    out << "env " << pop.env_name << "\n";
    out << "entries " << pop.entries.size() << "\n";
    out << "mu_dim " << mu_dim << "\n";
    out << "nu_dim " << nu_dim << "\n";
    out << "reference " << pop.reference_index << "\n";
    for (std::size_t i = 0; i < pop.entries.size(); ++i) {
        out << i << " " << detail::role_of(pop, static_cast<int>(i));
        for (double v : pop.entries[i].mu) out << " " << detail::format_double(v);
        for (double v : pop.entries[i].nu) out << " " << detail::format_double(v);
        out << "\n";
    }
    return out.str();
}

inline std::uint64_t population_hash(const EnvPopulation& pop) {
    return fnv1a(serialize_population(pop));
}

inline void save_population(const EnvPopulation& pop, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw RuntimeFailure("cannot open for writing: " + path);
    out << serialize_population(pop);
    if (!out) throw RuntimeFailure("write failed: " + path);
}

inline EnvPopulation parse_population(std::istream& in) {
    EnvPopulation pop;
    std::string line;
    if (!std::getline(in, line) || line != "eap-population v1")
        throw ConfigError("population file: bad or missing header");
    std::size_t n_entries = 0;
    int mu_dim = 0, nu_dim = 0;
    std::string key;
    if (!(in >> key >> pop.env_name) || key != "env")
        throw ConfigError("population file: expected env line");
    if (!(in >> key >> n_entries) || key != "entries")
        throw ConfigError("population file: expected entries line");
    if (!(in >> key >> mu_dim) || key != "mu_dim")
        throw ConfigError("population file: expected mu_dim line");
    if (!(in >> key >> nu_dim) || key != "nu_dim")
        throw ConfigError("population file: expected nu_dim line");
    if (!(in >> key >> pop.reference_index) || key != "reference")
        throw ConfigError("population file: expected reference line");
    for (std::size_t i = 0; i < n_entries; ++i) {
        std::size_t idx = 0;
        std::string role;
        if (!(in >> idx >> role) || idx != i)
            throw ConfigError("population file: bad entry index");
        DynamicsParams p;
        p.mu.resize(mu_dim);
        p.nu.resize(nu_dim);
        for (double& v : p.mu)
            if (!(in >> v)) throw ConfigError("population file: truncated mu values");
        for (double& v : p.nu)
            if (!(in >> v)) throw ConfigError("population file: truncated nu values");
        const int entry = static_cast<int>(pop.entries.size());
        if (role == "train") pop.train_idx.push_back(entry);
        else if (role == "val") pop.val_idx.push_back(entry);
        else if (role == "heldout") pop.heldout_idx.push_back(entry);
        else if (role != "unassigned") throw ConfigError("population file: unknown role " + role);
        pop.entries.push_back(std::move(p));
    }
    return pop;
}

inline EnvPopulation parse_population(const std::string& text) {
    std::istringstream in(text);
    return parse_population(in);
}

inline EnvPopulation load_population(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeFailure("cannot open population file: " + path);
    return parse_population(in);
}

inline EnvPopulation load_population(const std::string& path, const EnvDescriptor& desc) {
    std::ifstream in(path);
    if (!in) throw RuntimeFailure("cannot open population file: " + path);
    EnvPopulation pop = parse_population(in);
    if (pop.env_name != desc.name)
        throw ConfigError("population file is for env '" + pop.env_name + "', expected '" +
                          desc.name + "'");
    for (const auto& e : pop.entries) {
        if (static_cast<int>(e.mu.size()) != desc.mu_dim() ||
            static_cast<int>(e.nu.size()) != desc.nu_dim())
            throw ConfigError("population file: entry dimension mismatch");
        if (!all_finite(e.mu) || !all_finite(e.nu))
            throw ConfigError("population file: non-finite parameter");
    }
    return pop;
}

}  // namespace eap
