#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "eap/common.hpp"
#include "eap/env/env.hpp"
#include "eap/env/population.hpp"
#include "eap/errorfn/predictor.hpp"
#include "eap/net/gaussian.hpp"
#include "eap/train/baseline_trainer.hpp"
#include "eap/train/rollout.hpp"
#include "eap/rng.hpp"

namespace eap {

enum class EvalMode { Mean, Sampled };

inline std::string to_string(EvalMode m) { return m == EvalMode::Mean ? "mean" : "sampled"; }

inline EvalMode eval_mode_from_string(const std::string& s) {
    if (s == "mean") return EvalMode::Mean;
    if (s == "sampled") return EvalMode::Sampled;
    throw ConfigError("unknown eval mode: " + s);
}

// Anchors for normalized returns: (raw - lo) / (hi - lo). CartPole's anchor
// is the exact max return (1 per step); Pendulum and Hopper returns are
// negative costs, anchored to fixed estimates from random vs. tuned
// single-environment policies, recorded in every report.
inline void return_anchors(TaskId task, int max_steps, double& lo, double& hi) {
    switch (task) {
        case TaskId::CartPole:
            lo = 0.0;
            hi = static_cast<double>(max_steps);
            break;
        case TaskId::Pendulum:
            lo = -1600.0;
            hi = -150.0;
            break;
        case TaskId::Hopper:
            lo = -200.0;
            hi = 0.0;
            break;
    }
}

struct EnvEvalStats {
    int env_index = -1;
    int episodes = 0;
    double mean_return = 0.0;
    double std_return = 0.0;
    double mean_normalized = 0.0;
};

struct EvalReport {
    std::string task;
    std::string method;
    std::uint64_t seed = 0;
    std::uint64_t population_hash = 0;
    std::string mode;
    int n_episodes = 0;
    double norm_lo = 0.0, norm_hi = 1.0;
    std::vector<EnvEvalStats> per_env;
    double mean_return = 0.0;      // across evaluated environments
    double mean_normalized = 0.0;
};

struct EvalSettings {
    int n_episodes = 20;
    EvalMode mode = EvalMode::Mean;
    std::uint64_t seed = 0;
};

// Rolls a frozen policy in each listed environment for n_episodes; no
// parameter updates, no data collection. action_for_env is called once per
// environment and must return a per-step action callable.
template <typename ActorFactory>
EvalReport evaluate_zero_shot(const EnvDescriptor& desc, const EnvPopulation& pop,
                              const std::vector<int>& env_indices, ActorFactory&& actor_for_env,
                              const EvalSettings& settings) {
    require(settings.n_episodes > 0, "evaluate: n_episodes must be positive");
    require(!env_indices.empty(), "evaluate: no environments selected");
    EvalReport rep;
    rep.task = desc.name;
    rep.seed = settings.seed;
    rep.population_hash = population_hash(pop);
    rep.mode = to_string(settings.mode);
    rep.n_episodes = settings.n_episodes;
    return_anchors(desc.task, desc.max_steps, rep.norm_lo, rep.norm_hi);

    for (int idx : env_indices) {
        const DynamicsParams& params = pop.entries.at(static_cast<std::size_t>(idx));
        EnvInstance env(desc, params, derive_seed(settings.seed, "eval_env", idx));
        RngStream action_rng(derive_seed(settings.seed, "eval_actions", idx));
        auto act = actor_for_env(idx, params);

        EnvEvalStats st;
        st.env_index = idx;
        st.episodes = settings.n_episodes;
        Vec returns;
        for (int ep = 0; ep < settings.n_episodes; ++ep) {
            Vec s = env.reset();
            double ret = 0.0;
            while (true) {
                const StepResult r = env.step(act(s, action_rng));
                ret += r.reward;
                s = r.state;
                if (r.done) break;
            }
            returns.push_back(ret);
        }
        double mean = 0.0;
        for (double r : returns) mean += r;
        mean /= static_cast<double>(returns.size());
        double var = 0.0;
        for (double r : returns) var += (r - mean) * (r - mean);
        st.mean_return = mean;
        st.std_return = std::sqrt(var / static_cast<double>(returns.size()));
        st.mean_normalized = (mean - rep.norm_lo) / (rep.norm_hi - rep.norm_lo);
        rep.per_env.push_back(st);
    }

    for (const auto& e : rep.per_env) {
        rep.mean_return += e.mean_return;
        rep.mean_normalized += e.mean_normalized;
    }
    rep.mean_return /= static_cast<double>(rep.per_env.size());
    rep.mean_normalized /= static_cast<double>(rep.per_env.size());
    return rep;
}

// Per-step action callables for each method. The EAP actor runs the full
// query chain (uncorrected mean at e=0, predict, corrected action); the
// baseline actor appends the declared test-time input tail.
inline auto make_eap_eval_actor(GaussianPolicy& policy, ErrorPredictor& predictor, EvalMode mode) {
    return [&policy, &predictor, mode](int, const DynamicsParams& params) {
        const Vec mu = params.mu;
        return [&policy, &predictor, mode, mu](const Vec& s, RngStream& rng) -> Vec {
            const Vec zero_e(predictor.e_dim(), 0.0);
            const Vec a0 = policy.mean(concat3(s, mu, zero_e));
            Vec e = predictor.predict(s, a0, mu);
            if (!all_finite(e)) e.assign(e.size(), 0.0);
            const Vec obs = concat3(s, mu, e);
            if (mode == EvalMode::Mean) return policy.mean(obs);
            double lp = 0.0;
            return policy.sample(obs, rng, lp);
        };
    };
}

inline auto make_baseline_eval_actor(GaussianPolicy& policy, BaselineKind kind,
                                     const EnvDescriptor& desc, UpNuMode up_nu, EvalMode mode) {
    return [&policy, kind, &desc, up_nu, mode](int, const DynamicsParams& params) {
        const Vec tail = baseline_test_input(kind, desc, params, up_nu);
        return [&policy, tail, mode](const Vec& s, RngStream& rng) -> Vec {
            const Vec obs = concat2(s, tail);
            if (mode == EvalMode::Mean) return policy.mean(obs);
            double lp = 0.0;
            return policy.sample(obs, rng, lp);
        };
    };
}

}  // namespace eap
