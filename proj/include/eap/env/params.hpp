#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "eap/common.hpp"

namespace eap {

enum class ParamRole { Observable, Unobservable };

// Which declared range a parameter value is checked against.
enum class RangeKind { Train, Test };

// One named dynamics parameter: its role in the mu/nu split and the ranges
// it is sampled from. The test range must reach outside the train range so
// held-out environments are genuinely out of distribution.
struct ParamSpec {
    std::string name;
    ParamRole role = ParamRole::Observable;
    std::string unit;
    Interval train_range;
    Interval test_range;

    void validate() const {
        if (train_range.empty())
            throw ConfigError("param '" + name + "': train_range is empty");
        const bool outside = test_range.lo < train_range.lo || test_range.hi > train_range.hi;
        if (!outside)
            throw ConfigError("param '" + name + "': test_range lies inside train_range");
    }
};

// The (mu, nu) pair that fully determines one environment's transition
// function. Component order follows the descriptor's param_specs.
struct DynamicsParams {
    Vec mu;
    Vec nu;

    bool operator==(const DynamicsParams& o) const { return mu == o.mu && nu == o.nu; }
};

enum class TaskId { CartPole, Pendulum, Hopper };

// Optional once-per-episode horizontal impulse, re-drawn at every reset.
struct PerturbationSpec {
    Interval magnitude;  // newtons (cartpole) or newton-meters (pendulum)
    int duration_steps = 0;
};

struct EnvDescriptor {
    std::string name;
    TaskId task = TaskId::CartPole;
    int state_dim = 0;
    int action_dim = 0;
    double dt = 0.0;
    int max_steps = 0;
    std::vector<ParamSpec> param_specs;
    DynamicsParams reference_params;
    std::vector<Interval> action_bounds;
    std::optional<PerturbationSpec> perturbation;

    int mu_dim() const {
        return static_cast<int>(std::count_if(param_specs.begin(), param_specs.end(),
            [](const ParamSpec& p) { return p.role == ParamRole::Observable; }));
    }
    int nu_dim() const { return static_cast<int>(param_specs.size()) - mu_dim(); }

    std::vector<std::string> mu_names() const {
        std::vector<std::string> out;
        for (const auto& p : param_specs)
            if (p.role == ParamRole::Observable) out.push_back(p.name);
        return out;
    }
    std::vector<std::string> nu_names() const {
        std::vector<std::string> out;
        for (const auto& p : param_specs)
            if (p.role == ParamRole::Unobservable) out.push_back(p.name);
        return out;
    }

    const ParamSpec* find_spec(const std::string& pname) const {
        for (const auto& p : param_specs)
            if (p.name == pname) return &p;
        return nullptr;
    }

    // Flattens (mu, nu) into param_specs order; dynamics code indexes this
    // canonical vector so a mu/nu remap never moves a physical parameter.
    Vec flatten(const DynamicsParams& dp) const {
        require(static_cast<int>(dp.mu.size()) == mu_dim() &&
                static_cast<int>(dp.nu.size()) == nu_dim(),
                "flatten: mu/nu dimensions do not match descriptor");
        Vec flat(param_specs.size());
        std::size_t i_mu = 0, i_nu = 0;
        for (std::size_t i = 0; i < param_specs.size(); ++i)
            flat[i] = param_specs[i].role == ParamRole::Observable ? dp.mu[i_mu++] : dp.nu[i_nu++];
        return flat;
    }

    DynamicsParams unflatten(const Vec& flat) const {
        require(flat.size() == param_specs.size(), "unflatten: wrong length");
        DynamicsParams dp;
        for (std::size_t i = 0; i < param_specs.size(); ++i)
            (param_specs[i].role == ParamRole::Observable ? dp.mu : dp.nu).push_back(flat[i]);
        return dp;
    }

    // Range-checked construction. Train-range mode rejects anything outside
    // the train interval; test mode accepts the test interval as well.
    DynamicsParams make_params(const Vec& mu, const Vec& nu, RangeKind kind = RangeKind::Train) const {
        if (static_cast<int>(mu.size()) != mu_dim() || static_cast<int>(nu.size()) != nu_dim())
            throw ConfigError("make_params: mu/nu dimension mismatch for '" + name + "'");
        DynamicsParams dp{mu, nu};
        const Vec flat = flatten(dp);
        for (std::size_t i = 0; i < param_specs.size(); ++i) {
            const ParamSpec& ps = param_specs[i];
            const bool ok = ps.train_range.contains(flat[i]) ||
                            (kind == RangeKind::Test && ps.test_range.contains(flat[i]));
            if (!ok)
                throw ConfigError("param '" + ps.name + "' = " + std::to_string(flat[i]) +
                                  " outside declared range");
        }
        return dp;
    }

    void validate() const {
        for (const auto& ps : param_specs) ps.validate();
        for (const auto& b : action_bounds)
            if (!std::isfinite(b.lo) || !std::isfinite(b.hi))
                throw ConfigError("action bounds must be finite");
        if (state_dim <= 0 || action_dim <= 0 || max_steps <= 0 || dt <= 0.0)
            throw ConfigError("descriptor '" + name + "' has non-positive dimensions");
        // Throws if the reference lies outside its own train ranges.
        (void)make_params(reference_params.mu, reference_params.nu, RangeKind::Train);
    }
};

namespace detail {
inline Interval extend_upper(Interval train, double frac = 0.25) {
    return {train.lo, train.hi + frac * train.width()};
}
}  // namespace detail

// Pole-on-cart balance with continuous horizontal force. Observables are the
// geometry/mass parameters; the joint damping and frictions are hidden.
inline EnvDescriptor cartpole_descriptor() {
    EnvDescriptor d;
    d.name = "cartpole";
    d.task = TaskId::CartPole;
    d.state_dim = 4;  // x, x_dot, theta, theta_dot
    d.action_dim = 1;
    d.dt = 0.02;
    d.max_steps = 500;
    d.param_specs = {
        {"pole_length", ParamRole::Observable, "m", {0.4, 0.7}, {0.3, 0.8}},
        {"pole_mass", ParamRole::Observable, "kg", {0.08, 0.15}, detail::extend_upper({0.08, 0.15})},
        {"cart_mass", ParamRole::Observable, "kg", {0.8, 1.3}, detail::extend_upper({0.8, 1.3})},
        {"rot_damping", ParamRole::Unobservable, "N.m.s/rad", {0.0, 0.02}, detail::extend_upper({0.0, 0.02})},
        {"rot_friction", ParamRole::Unobservable, "1", {0.0, 0.05}, detail::extend_upper({0.0, 0.05})},
        {"trans_friction", ParamRole::Unobservable, "N.s/m", {0.0, 0.05}, detail::extend_upper({0.0, 0.05})},
    };
    d.reference_params = {{0.5, 0.1, 1.0}, {0.0, 0.0, 0.0}};
    d.action_bounds = {{-10.0, 10.0}};
    return d;
}

// Torque-limited swing-up. State observed as (cos th, sin th, th_dot).
inline EnvDescriptor pendulum_descriptor() {
    EnvDescriptor d;
    d.name = "pendulum";
    d.task = TaskId::Pendulum;
    d.state_dim = 3;
    d.action_dim = 1;
    d.dt = 0.05;
    d.max_steps = 200;
    d.param_specs = {
        {"pole_length", ParamRole::Observable, "m", {0.7, 1.1}, detail::extend_upper({0.7, 1.1})},
        {"pole_mass", ParamRole::Observable, "kg", {0.7, 1.1}, detail::extend_upper({0.7, 1.1})},
        {"joint_damping", ParamRole::Unobservable, "N.m.s/rad", {0.0, 0.05}, detail::extend_upper({0.0, 0.05})},
        {"dry_friction", ParamRole::Unobservable, "1", {0.0, 0.04}, detail::extend_upper({0.0, 0.04})},
        {"gravity_scale", ParamRole::Unobservable, "1", {0.9, 1.1}, detail::extend_upper({0.9, 1.1})},
    };
    d.reference_params = {{1.0, 1.0}, {0.0, 0.0, 1.0}};
    d.action_bounds = {{-2.0, 2.0}};
    return d;
}

// Vertical spring-leg hopper (1-D SLIP): ballistic flight above leg rest
// length, spring-damper stance below it. Kept as a hybrid-dynamics probe.
inline EnvDescriptor hopper_descriptor() {
    EnvDescriptor d;
    d.name = "hopper";
    d.task = TaskId::Hopper;
    d.state_dim = 2;  // z, z_dot
    d.action_dim = 1;
    d.dt = 0.01;
    d.max_steps = 400;
    d.param_specs = {
        {"body_mass", ParamRole::Observable, "kg", {0.8, 1.5}, detail::extend_upper({0.8, 1.5})},
        {"rest_length", ParamRole::Observable, "m", {0.4, 0.6}, detail::extend_upper({0.4, 0.6})},
        {"spring_k", ParamRole::Unobservable, "N/m", {800.0, 1600.0}, detail::extend_upper({800.0, 1600.0})},
        {"leg_damping", ParamRole::Unobservable, "N.s/m", {1.0, 10.0}, detail::extend_upper({1.0, 10.0})},
        {"gravity_scale", ParamRole::Unobservable, "1", {0.9, 1.1}, detail::extend_upper({0.9, 1.1})},
    };
    d.reference_params = {{1.0, 0.5}, {1200.0, 4.0, 1.0}};
    d.action_bounds = {{-20.0, 20.0}};
    return d;
}

inline EnvDescriptor descriptor_for_task(const std::string& task) {
    if (task == "cartpole") return cartpole_descriptor();
    if (task == "pendulum") return pendulum_descriptor();
    if (task == "hopper") return hopper_descriptor();
    throw ConfigError("unknown task '" + task + "'");
}

// Re-tags parameters as observable/unobservable without moving them; the
// reference values are re-bucketed to match the new mu/nu orderings.
inline EnvDescriptor remap_split(const EnvDescriptor& d, const std::vector<std::string>& observable_names) {
    for (const auto& n : observable_names)
        if (!d.find_spec(n))
            throw ConfigError("remap_split: unknown parameter '" + n + "'");
    const Vec ref_flat = d.flatten(d.reference_params);
    EnvDescriptor out = d;
    for (auto& ps : out.param_specs) {
        const bool obs = std::find(observable_names.begin(), observable_names.end(), ps.name) !=
                         observable_names.end();
        ps.role = obs ? ParamRole::Observable : ParamRole::Unobservable;
    }
    out.reference_params = out.unflatten(ref_flat);
    return out;
}

}  // namespace eap
