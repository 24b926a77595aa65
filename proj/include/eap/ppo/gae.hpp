#pragma once

#include <functional>

#include "eap/common.hpp"
#include "eap/ppo/buffer.hpp"

namespace eap {

struct GaeOutput {
    Vec advantages;  // raw, un-normalized
    Vec returns;     // advantages + values
};

// delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
// A_t = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// V is evaluated on aux_obs (the policy/value input), with the buffer's
// final_next_input as the bootstrap for a mid-episode cut.
inline GaeOutput compute_gae(const RolloutBuffer& buf,
                             const std::function<double(const Vec&)>& value_fn, double gamma,
                             double lambda) {
    const std::size_t n = buf.steps.size();
    require(n > 0, "compute_gae: empty trajectory");
    Vec values(n);
    for (std::size_t t = 0; t < n; ++t) values[t] = value_fn(buf.steps[t].aux_obs);

    GaeOutput out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double running = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const Transition& tr = buf.steps[i];
        const double not_done = tr.done ? 0.0 : 1.0;
        double v_next = 0.0;
        if (!tr.done) {
            if (i + 1 < n) {
                v_next = values[i + 1];
            } else {
                require(!buf.final_next_input.empty(),
                        "compute_gae: buffer ends mid-episode without a bootstrap input");
                v_next = value_fn(buf.final_next_input);
            }
        }
        const double delta = tr.r + gamma * v_next * not_done - values[i];
        running = delta + gamma * lambda * not_done * running;
        out.advantages[i] = running;
        out.returns[i] = running + values[i];
    }
    return out;
}

// In-place shift/scale to zero mean, unit variance.
inline void normalize_advantages(Vec& adv) {
    require(!adv.empty(), "normalize_advantages: empty");
    double mean = 0.0;
    for (double a : adv) mean += a;
    mean /= static_cast<double>(adv.size());
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= static_cast<double>(adv.size());
    const double inv = 1.0 / std::max(std::sqrt(var), 1e-8);
    for (double& a : adv) a = (a - mean) * inv;
}

}  // namespace eap
