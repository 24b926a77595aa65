#pragma once

#include <cmath>

#include "eap/common.hpp"
#include "eap/env/env.hpp"
#include "eap/env/population.hpp"
#include "eap/io/metrics.hpp"
#include "eap/net/adam.hpp"
#include "eap/ppo/ppo.hpp"
#include "eap/train/rollout.hpp"

namespace eap {

enum class BaselineKind { DR, UP };

inline std::string to_string(BaselineKind k) { return k == BaselineKind::DR ? "dr" : "up"; }

inline BaselineKind baseline_kind_from_string(const std::string& s) {
    if (s == "dr") return BaselineKind::DR;
    if (s == "up") return BaselineKind::UP;
    throw ConfigError("unknown baseline kind: " + s);
}

// What UP receives at evaluation time for the unobservable slot.
enum class UpNuMode { Midpoint, Oracle };

inline std::string to_string(UpNuMode m) {
    return m == UpNuMode::Midpoint ? "midpoint" : "oracle";
}

inline UpNuMode up_nu_mode_from_string(const std::string& s) {
    if (s == "midpoint") return UpNuMode::Midpoint;
    if (s == "oracle") return UpNuMode::Oracle;
    throw ConfigError("unknown up_nu mode: " + s);
}

inline Vec train_range_midpoints(const EnvDescriptor& desc, ParamRole role) {
    Vec out;
    for (const auto& ps : desc.param_specs)
        if (ps.role == role) out.push_back(0.5 * (ps.train_range.lo + ps.train_range.hi));
    return out;
}

// Input tail appended to the state at evaluation time. DR sees nothing; UP
// sees the true mu plus either the train-range midpoint nu (honest default)
// or the true nu (oracle diagnostic).
inline Vec baseline_test_input(BaselineKind kind, const EnvDescriptor& desc,
                               const DynamicsParams& true_params, UpNuMode mode) {
    if (kind == BaselineKind::DR) return {};
    const Vec nu_fill = mode == UpNuMode::Oracle
                            ? true_params.nu
                            : train_range_midpoints(desc, ParamRole::Unobservable);
    return concat2(true_params.mu, nu_fill);
}

struct BaselineState {
    EnvDescriptor desc;
    EnvPopulation pop;
    std::uint64_t master_seed = 0;
    BaselineKind kind = BaselineKind::DR;
    GaussianPolicy policy;
    FeedforwardNet value;
    Adam policy_opt, value_opt;
    int updates = 0;
    std::int64_t policy_samples = 0;
    double last_mean_return = 0.0;

    BaselineState(EnvDescriptor d, EnvPopulation p, BaselineKind k, GaussianPolicy pol,
                  FeedforwardNet val, double policy_lr, double value_lr, std::uint64_t seed)
        : desc(std::move(d)), pop(std::move(p)), master_seed(seed), kind(k),
          policy(std::move(pol)), value(std::move(val)),
          policy_opt("policy", policy.n_params(), policy_lr),
          value_opt("value", value.n_params(), value_lr) {}
};

inline BaselineState make_baseline_state(const EnvDescriptor& desc, EnvPopulation pop,
                                         BaselineKind kind, const std::vector<int>& hidden,
                                         const PPOConfig& ppo, std::uint64_t master_seed) {
    require(hidden.size() == 2, "make_baseline_state: expected two hidden sizes");
    const int in_dim = kind == BaselineKind::DR
                           ? desc.state_dim
                           : desc.state_dim + desc.mu_dim() + desc.nu_dim();
    GaussianPolicy policy({in_dim, hidden[0], hidden[1], desc.action_dim});
    FeedforwardNet value({in_dim, hidden[0], hidden[1], 1});
    RngStream init_rng(derive_seed(master_seed, "init"));
    policy.init(init_rng);
    value.init_orthogonal(init_rng, std::sqrt(2.0), 1.0);
    return BaselineState(desc, std::move(pop), kind, std::move(policy), std::move(value),
                         ppo.policy_lr, ppo.value_lr, master_seed);
}

using BaselineCheckpointFn = std::function<void(const BaselineState&)>;

// Randomized-dynamics PPO until the step budget is consumed exactly. Each
// update samples one training-pool environment; UP additionally feeds the
// active environment's true (mu, nu). The final short chunk is still
// collected (so totals match the budget) but skips the update when smaller
// than a minibatch.
inline void train_baseline(BaselineState& st, std::int64_t budget, const PPOConfig& ppo,
                           const MetricsSink& sink = null_sink(),
                           const BaselineCheckpointFn& checkpoint = nullptr,
                           int checkpoint_every = 0) {
    require(budget > 0, "train_baseline: budget must be positive");
    while (st.policy_samples < budget) {
        const int u = st.updates;
        const std::int64_t remaining = budget - st.policy_samples;
        const int steps = static_cast<int>(
            std::min<std::int64_t>(ppo.rollout_steps_per_update, remaining));

        RngStream sel(derive_seed(st.master_seed, "env_select", u));
        const std::vector<int> pool = st.pop.training_pool();
        require(!pool.empty(), "train_baseline: empty training pool");
        const int env_idx = pool[sel.uniform_int(static_cast<int>(pool.size()))];
        const DynamicsParams& params = st.pop.entries[static_cast<std::size_t>(env_idx)];

        EnvInstance env(st.desc, params, derive_seed(st.master_seed, "env", u));
        RngStream actions(derive_seed(st.master_seed, "actions", u));
        const Vec tail = st.kind == BaselineKind::DR ? Vec{} : concat2(params.mu, params.nu);
        PlainActor actor{st.policy, tail, actions};
        RolloutBuffer buf = collect_rollout(env, steps, actor);
        st.policy_samples += static_cast<std::int64_t>(buf.size());

        MetricsRow row;
        row.phase = "train";
        row.update = u;
        row.env_index = env_idx;
        if (buf.size() >= static_cast<std::size_t>(ppo.minibatch_size)) {
            RngStream shuffle(derive_seed(st.master_seed, "shuffle", u));
            const PPOStats ps = ppo_update(st.policy, st.policy_opt, st.value, st.value_opt,
                                           buf, ppo, shuffle);
            row.surrogate_loss = ps.surrogate_loss;
            row.value_loss = ps.value_loss;
            row.entropy = ps.entropy;
            row.approx_kl = ps.approx_kl;
            row.clip_fraction = ps.clip_fraction;
            row.ppo_epochs = ps.epochs_run;
        }
        if (!buf.episode_returns.empty()) st.last_mean_return = buf.mean_episode_return();
        row.mean_return = st.last_mean_return;
        row.episodes = static_cast<int>(buf.episode_returns.size());
        row.total_samples = st.policy_samples;
        row.policy_samples = st.policy_samples;
        sink(row);

        ++st.updates;
        if (checkpoint && checkpoint_every > 0 && st.updates % checkpoint_every == 0)
            checkpoint(st);
    }
    if (checkpoint) checkpoint(st);
}

}  // namespace eap
