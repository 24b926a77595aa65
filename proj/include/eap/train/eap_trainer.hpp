#pragma once

#include <cmath>
#include <iostream>

#include "eap/common.hpp"
#include "eap/env/env.hpp"
#include "eap/env/population.hpp"
#include "eap/errorfn/collect.hpp"
#include "eap/errorfn/predictor.hpp"
#include "eap/io/metrics.hpp"
#include "eap/net/adam.hpp"
#include "eap/ppo/ppo.hpp"
#include "eap/train/rollout.hpp"

namespace eap {

struct ErrorFnSettings {
    int T = 5;
    ErrorRepr repr = ErrorRepr::Full;
    int latent_dim = 2;
    int epochs_per_refresh = 5;
    int minibatch = 64;
    double lr = 1e-3;
    int samples_per_refresh = 256;
    std::size_t dataset_capacity = 50000;

    void validate() const {
        if (T < 1) throw ConfigError("error_fn: T must be >= 1");
        if (epochs_per_refresh <= 0 || minibatch <= 0 || samples_per_refresh <= 0)
            throw ConfigError("error_fn: epochs, minibatch, and samples must be positive");
        if (lr <= 0.0) throw ConfigError("error_fn: lr must be positive");
        if (dataset_capacity < static_cast<std::size_t>(samples_per_refresh))
            throw ConfigError("error_fn: capacity below one collection round");
    }
};

// Everything one EAP run owns: networks, optimizers, error data, the
// population, and sample accounting.
struct EAPState {
    EnvDescriptor desc;
    EnvPopulation pop;
    std::uint64_t master_seed = 0;
    GaussianPolicy policy;
    FeedforwardNet value;
    ErrorPredictor predictor;
    Adam policy_opt, value_opt, err_opt;
    ErrorDataset dataset;
    RolloutBuffer last_buffer;

    int iteration = 0;
    int pretrain_updates = 0;
    std::int64_t policy_samples = 0;    // env steps from policy rollouts, pretraining included
    std::int64_t pretrain_samples = 0;  // the pretraining share of policy_samples
    std::int64_t error_samples = 0;     // env steps from paired error rollouts
    std::int64_t predictor_faults = 0;
    std::int64_t collect_skipped = 0;
    bool pretrained = false;
    bool pretrain_met_threshold = false;
    double last_mean_return = 0.0;

    EAPState(EnvDescriptor d, EnvPopulation p, GaussianPolicy pol, FeedforwardNet val,
             ErrorPredictor pred, double policy_lr, double value_lr, double err_lr,
             std::size_t dataset_capacity, std::uint64_t seed)
        : desc(std::move(d)), pop(std::move(p)), master_seed(seed), policy(std::move(pol)),
          value(std::move(val)), predictor(std::move(pred)),
          policy_opt("policy", policy.n_params(), policy_lr),
          value_opt("value", value.n_params(), value_lr),
          err_opt("error_fn", predictor.n_params(), err_lr),
          dataset(dataset_capacity) {}

    std::int64_t total_samples() const { return policy_samples + error_samples; }
};

// Builds a fresh EAP state: policy and value nets over (s, mu, e) with the
// task's hidden sizes, the error predictor over (s, a, mu), all initialized
// from the seed's "init" stream.
inline EAPState make_eap_state(const EnvDescriptor& desc, EnvPopulation pop,
                               const std::vector<int>& hidden, const PPOConfig& ppo,
                               const ErrorFnSettings& err, std::uint64_t master_seed) {
    require(hidden.size() == 2, "make_eap_state: expected two hidden sizes");
    ErrorPredictor predictor(err.repr, desc.state_dim, desc.action_dim, desc.mu_dim(), hidden,
                             err.latent_dim, err.T);
    const int in_dim = desc.state_dim + desc.mu_dim() + predictor.e_dim();
    GaussianPolicy policy({in_dim, hidden[0], hidden[1], desc.action_dim});
    FeedforwardNet value({in_dim, hidden[0], hidden[1], 1});

    RngStream init_rng(derive_seed(master_seed, "init"));
    policy.init(init_rng);
    value.init_orthogonal(init_rng, std::sqrt(2.0), 1.0);
    predictor.init(init_rng);

    return EAPState(desc, std::move(pop), std::move(policy), std::move(value),
                    std::move(predictor), ppo.policy_lr, ppo.value_lr, err.lr,
                    err.dataset_capacity, master_seed);
}

// PPO on the reference environment with the mu input pinned to mu0 and the
// e input pinned to zero, until the mean return clears the threshold or the
// step budget runs out (warning status, training may proceed).
inline bool pretrain_reference(EAPState& st, const PPOConfig& ppo, std::int64_t budget,
                               double threshold, const MetricsSink& sink = null_sink()) {
    const DynamicsParams ref = st.pop.reference(st.desc);
    const Vec tail = concat2(ref.mu, Vec(st.predictor.e_dim(), 0.0));

    while (st.pretrain_samples < budget && !st.pretrain_met_threshold) {
        const std::int64_t remaining = budget - st.pretrain_samples;
        const int steps = static_cast<int>(
            std::min<std::int64_t>(ppo.rollout_steps_per_update, remaining));
        if (steps < ppo.minibatch_size) break;

        const int u = st.pretrain_updates;
        EnvInstance env(st.desc, ref, derive_seed(st.master_seed, "pretrain_env", u));
        RngStream actions(derive_seed(st.master_seed, "pretrain_actions", u));
        PlainActor actor{st.policy, tail, actions};
        RolloutBuffer buf = collect_rollout(env, steps, actor);
        st.policy_samples += static_cast<std::int64_t>(buf.size());
        st.pretrain_samples += static_cast<std::int64_t>(buf.size());

        RngStream shuffle(derive_seed(st.master_seed, "pretrain_shuffle", u));
        const PPOStats ps = ppo_update(st.policy, st.policy_opt, st.value, st.value_opt, buf,
                                       ppo, shuffle);
        if (!buf.episode_returns.empty()) st.last_mean_return = buf.mean_episode_return();

        MetricsRow row;
        row.phase = "pretrain";
        row.update = u;
        row.total_samples = st.total_samples();
        row.policy_samples = st.policy_samples;
        row.error_samples = st.error_samples;
        row.mean_return = st.last_mean_return;
        row.episodes = static_cast<int>(buf.episode_returns.size());
        row.surrogate_loss = ps.surrogate_loss;
        row.value_loss = ps.value_loss;
        row.entropy = ps.entropy;
        row.approx_kl = ps.approx_kl;
        row.clip_fraction = ps.clip_fraction;
        row.ppo_epochs = ps.epochs_run;
        sink(row);

        ++st.pretrain_updates;
        st.last_buffer = std::move(buf);
        if (!st.last_buffer.episode_returns.empty() && st.last_mean_return >= threshold)
            st.pretrain_met_threshold = true;
    }

    st.pretrained = true;
    if (!st.pretrain_met_threshold)
        std::cerr << "[warn] pretraining ended below threshold (" << st.last_mean_return << " < "
                  << threshold << " after " << st.pretrain_samples << " steps)\n";
    return st.pretrain_met_threshold;
}

using CheckpointFn = std::function<void(const EAPState&)>;

// One Algorithm-1 outer iteration appended per call: sample a training
// environment, refresh the error function against a sampled validation
// partner, collect error-aware rollouts, PPO update. A component fault
// aborts the iteration, not the run.
inline void train_eap(EAPState& st, int iterations, const PPOConfig& ppo,
                      const ErrorFnSettings& err, const MetricsSink& sink = null_sink(),
                      const CheckpointFn& checkpoint = nullptr, int checkpoint_every = 0) {
    require(st.pretrained, "train_eap: pretraining has not run");
    err.validate();
    const DynamicsParams refp = st.pop.reference(st.desc);

    for (int n = 0; n < iterations; ++n) {
        const int i = st.iteration;
        MetricsRow row;
        row.phase = "train";
        row.update = i;
        try {
            RngStream sel(derive_seed(st.master_seed, "env_select", i));
            const std::vector<int> pool = st.pop.training_pool();
            require(!pool.empty(), "train_eap: empty training pool");
            const int env_idx = pool[sel.uniform_int(static_cast<int>(pool.size()))];
            std::vector<int> vpool;
            for (int v : st.pop.val_idx)
                if (v != st.pop.reference_index) vpool.push_back(v);
            require(!vpool.empty(), "train_eap: empty validation pool");
            const int val_idx = vpool[sel.uniform_int(static_cast<int>(vpool.size()))];
            row.env_index = env_idx;

            // Error-function refresh from the previous rollout buffer.
            require(!st.last_buffer.steps.empty(), "train_eap: no rollout buffer to sample");
            const DynamicsParams& valp = st.pop.entries[static_cast<std::size_t>(val_idx)];
            const Vec zero_e(st.predictor.e_dim(), 0.0);
            auto mean_action = [&](const Vec& s) -> Vec {
                return st.policy.mean(concat3(s, valp.mu, zero_e));
            };
            RngStream err_sel(derive_seed(st.master_seed, "err_select", i));
            const CollectStats cs = collect_error_data(
                st.desc, refp, valp, st.last_buffer, mean_action, st.predictor.horizon(),
                err.samples_per_refresh, err_sel, st.dataset, val_idx, i);
            st.error_samples += cs.sim_steps;
            st.collect_skipped += cs.skipped;
            for (std::size_t k = st.dataset.size() - static_cast<std::size_t>(cs.added);
                 k < st.dataset.size(); ++k)
                st.predictor.observe_sample(st.dataset[k]);

            if (st.dataset.size() >= static_cast<std::size_t>(err.minibatch)) {
                RngStream err_shuffle(derive_seed(st.master_seed, "err_shuffle", i));
                row.err_loss = st.predictor
                                   .train(st.dataset, err.epochs_per_refresh, err.minibatch,
                                          st.err_opt, err_shuffle)
                                   .final_loss;
            }

            // Error-aware rollouts in the sampled training environment.
            EnvInstance env(st.desc, st.pop.entries[static_cast<std::size_t>(env_idx)],
                            derive_seed(st.master_seed, "env", i));
            RngStream actions(derive_seed(st.master_seed, "actions", i));
            EapActor actor{st.policy, st.predictor,
                           st.pop.entries[static_cast<std::size_t>(env_idx)].mu, actions,
                           &st.predictor_faults};
            RolloutBuffer buf = collect_rollout(env, ppo.rollout_steps_per_update, actor);
            st.policy_samples += static_cast<std::int64_t>(buf.size());

            RngStream shuffle(derive_seed(st.master_seed, "shuffle", i));
            const PPOStats ps = ppo_update(st.policy, st.policy_opt, st.value, st.value_opt,
                                           buf, ppo, shuffle);
            if (!buf.episode_returns.empty()) st.last_mean_return = buf.mean_episode_return();

            row.mean_return = st.last_mean_return;
            row.episodes = static_cast<int>(buf.episode_returns.size());
            row.surrogate_loss = ps.surrogate_loss;
            row.value_loss = ps.value_loss;
            row.entropy = ps.entropy;
            row.approx_kl = ps.approx_kl;
            row.clip_fraction = ps.clip_fraction;
            row.ppo_epochs = ps.epochs_run;
            st.last_buffer = std::move(buf);
        } catch (const RuntimeFailure& e) {
            std::cerr << "[warn] iteration " << i << " aborted: " << e.what() << "\n";
            row.fault = 1;
        }
        row.total_samples = st.total_samples();
        row.policy_samples = st.policy_samples;
        row.error_samples = st.error_samples;
        row.predictor_faults = st.predictor_faults;
        row.collect_skipped = st.collect_skipped;
        sink(row);

        ++st.iteration;
        if (checkpoint && checkpoint_every > 0 && st.iteration % checkpoint_every == 0)
            checkpoint(st);
    }
    if (checkpoint) checkpoint(st);
}

}  // namespace eap
