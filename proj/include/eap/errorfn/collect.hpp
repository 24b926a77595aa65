#pragma once

#include "eap/common.hpp"
#include "eap/env/env.hpp"
#include "eap/errorfn/dataset.hpp"
#include "eap/ppo/buffer.hpp"
#include "eap/rng.hpp"

namespace eap {

struct CollectStats {
    int added = 0;
    int skipped = 0;
    std::int64_t sim_steps = 0;  // environment steps consumed by paired rollouts
};

// Paired reference/validation rollouts from buffer states. For each sample:
// draw a state s0 from the buffer, query the uncorrected mean action a0,
// teleport both environments to s0, and roll each forward T steps under the
// same mean-action query rule; record the endpoints. mean_action must be the
// policy's deterministic query with e pinned to zero and the validation
// environment's mu (both branches see the same conditioning, so the t=0
// actions coincide by construction).
template <typename MeanActionFn>
CollectStats collect_error_data(const EnvDescriptor& desc, const DynamicsParams& ref_params,
                                const DynamicsParams& val_params, const RolloutBuffer& buffer,
                                MeanActionFn&& mean_action, int T, int n_samples, RngStream& rng,
                                ErrorDataset& out, int source_env = -1, int iteration = -1) {
    require(buffer.size() > 0, "collect_error_data: empty buffer");
    require(T >= 1, "collect_error_data: T must be >= 1");
    CollectStats stats;
    EnvInstance ref_env(desc, ref_params, 0);
    EnvInstance val_env(desc, val_params, 0);

    auto roll = [&](EnvInstance& env, const Vec& s0, const Vec& a0) {
        env.set_state(s0);
        Vec s = env.observe();
        for (int t = 0; t < T; ++t) {
            const Vec a = t == 0 ? a0 : mean_action(s);
            s = env.simulate_step(a);
            ++stats.sim_steps;
        }
        return s;
    };

    for (int i = 0; i < n_samples; ++i) {
        const Vec& s0 = buffer.steps[rng.uniform_int(static_cast<int>(buffer.size()))].s;
        if (!all_finite(s0)) {
            ++stats.skipped;
            continue;
        }
        const Vec a0 = mean_action(s0);
        if (!all_finite(a0)) {
            ++stats.skipped;
            continue;
        }
        ErrorSample sample;
        sample.s0 = s0;
        sample.a0 = a0;
        sample.sT_ref = roll(ref_env, s0, a0);
        sample.sT_val = roll(val_env, s0, a0);
        sample.mu = val_params.mu;
        sample.source_env = source_env;
        sample.iteration = iteration;
        if (!all_finite(sample.sT_ref) || !all_finite(sample.sT_val)) {
            ++stats.skipped;
            continue;
        }
        out.add(std::move(sample));
        ++stats.added;
    }
    return stats;
}

}  // namespace eap
