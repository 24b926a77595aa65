#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "eap/common.hpp"
#include "eap/net/adam.hpp"
#include "eap/net/feedforward.hpp"
#include "eap/net/gaussian.hpp"
#include "eap/ppo/buffer.hpp"
#include "eap/ppo/gae.hpp"
#include "eap/rng.hpp"

namespace eap {

struct PPOConfig {
    double clip_epsilon = 0.2;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double policy_lr = 3e-4;
    double value_lr = 1e-3;
    int epochs_per_update = 10;
    int minibatch_size = 64;
    double entropy_coef = 0.0;
    double max_grad_norm = 0.5;
    int rollout_steps_per_update = 4096;
    double kl_limit = 0.05;  // approx-KL early stop for the epoch loop

    void validate() const {
        if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo: gamma must be in (0, 1]");
        if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
            throw ConfigError("ppo: gae_lambda must be in [0, 1]");
        if (!(clip_epsilon > 0.0)) throw ConfigError("ppo: clip_epsilon must be positive");
        if (epochs_per_update <= 0 || minibatch_size <= 0 || rollout_steps_per_update <= 0)
            throw ConfigError("ppo: epochs, minibatch, and rollout sizes must be positive");
        if (policy_lr <= 0.0 || value_lr <= 0.0) throw ConfigError("ppo: learning rates must be positive");
    }
};

struct PPOStats {
    double surrogate_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_fraction = 0.0;
    int epochs_run = 0;
    bool early_stopped = false;
};

// Clipped-surrogate update with squared-loss value regression. Advantages
// are normalized once over the whole batch; the epoch loop stops early when
// the minibatch approx KL (mean of old minus new log prob) exceeds the
// limit, skipping that minibatch's step.
inline PPOStats ppo_update(GaussianPolicy& policy, Adam& policy_opt, FeedforwardNet& value,
                           Adam& value_opt, const RolloutBuffer& buf, const PPOConfig& cfg,
                           RngStream& shuffle_rng) {
    cfg.validate();
    const std::size_t n = buf.size();
    require(n >= static_cast<std::size_t>(cfg.minibatch_size),
            "ppo_update: buffer smaller than one minibatch");

    GaeOutput gae = compute_gae(
        buf, [&value](const Vec& obs) { return value.forward(obs)[0]; }, cfg.gamma,
        cfg.gae_lambda);
    Vec adv = gae.advantages;
    normalize_advantages(adv);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    PPOStats stats;
    Vec pgrad(policy.n_params());
    Vec vgrad(value.n_params());
    double sum_surr = 0.0, sum_vloss = 0.0, sum_kl = 0.0, sum_clip = 0.0;
    int n_minibatches = 0;

    for (int epoch = 0; epoch < cfg.epochs_per_update && !stats.early_stopped; ++epoch) {
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_int(static_cast<int>(i))]);

        for (std::size_t start = 0; start + cfg.minibatch_size <= n && !stats.early_stopped;
             start += cfg.minibatch_size) {
            const std::size_t m = cfg.minibatch_size;
            std::fill(pgrad.begin(), pgrad.end(), 0.0);
            std::fill(vgrad.begin(), vgrad.end(), 0.0);
            double mb_surr = 0.0, mb_vloss = 0.0, mb_kl = 0.0;
            int mb_clipped = 0;

            for (std::size_t k = 0; k < m; ++k) {
                const Transition& tr = buf.steps[order[start + k]];
                const double a_t = adv[order[start + k]];
                const double ret = gae.returns[order[start + k]];

                policy.mean(tr.aux_obs);
                const double lp_new = policy.log_prob_cached(tr.a_hat);
                const double ratio = std::exp(lp_new - tr.log_prob);
                const double clipped = clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
                const double surr1 = ratio * a_t;
                const double surr2 = clipped * a_t;
                mb_surr += std::min(surr1, surr2);
                mb_kl += tr.log_prob - lp_new;
                if (std::fabs(ratio - 1.0) > cfg.clip_epsilon) ++mb_clipped;

                // Gradient of -min(surr1, surr2)/m - entropy_coef*H/m; the
                // clipped branch is constant in the parameters.
                const double c_logp =
                    surr1 <= surr2 ? -a_t * ratio / static_cast<double>(m) : 0.0;
                policy.backward_cached(tr.a_hat, c_logp,
                                       -cfg.entropy_coef / static_cast<double>(m), pgrad);

                const double v = value.forward(tr.aux_obs)[0];
                mb_vloss += (v - ret) * (v - ret);
                value.backward({2.0 * (v - ret) / static_cast<double>(m)}, vgrad.data());
            }

            mb_surr /= static_cast<double>(m);
            mb_vloss /= static_cast<double>(m);
            mb_kl /= static_cast<double>(m);
            if (!std::isfinite(mb_surr) || !std::isfinite(mb_vloss))
                throw RuntimeFailure("ppo_update: non-finite loss in minibatch " +
                                     std::to_string(n_minibatches));

            sum_surr += mb_surr;
            sum_vloss += mb_vloss;
            sum_kl += mb_kl;
            sum_clip += static_cast<double>(mb_clipped) / static_cast<double>(m);
            ++n_minibatches;

            if (mb_kl > cfg.kl_limit) {
                stats.early_stopped = true;
                break;  // skip this minibatch's step and stop the epoch loop
            }

            Vec pparams = policy.params();
            clip_grad_norm(pgrad, cfg.max_grad_norm);
            policy_opt.step(pparams, pgrad);
            policy.set_params(pparams);
            policy.clamp_log_std();

            clip_grad_norm(vgrad, cfg.max_grad_norm);
            value_opt.step(value.params(), vgrad);
        }
        if (!stats.early_stopped) ++stats.epochs_run;
    }

    if (n_minibatches > 0) {
        stats.surrogate_loss = -sum_surr / n_minibatches;
        stats.value_loss = sum_vloss / n_minibatches;
        stats.approx_kl = sum_kl / n_minibatches;
        stats.clip_fraction = sum_clip / n_minibatches;
    }
    stats.entropy = policy.entropy();
    return stats;
}

}  // namespace eap
