#pragma once

#include "eap/common.hpp"
#include "eap/env/env.hpp"
#include "eap/errorfn/predictor.hpp"
#include "eap/net/gaussian.hpp"
#include "eap/ppo/buffer.hpp"
#include "eap/rng.hpp"

namespace eap {

// What an actor produces for one environment state.
struct ActionChoice {
    Vec aux_obs;      // the exact policy input used
    Vec action;       // sampled action (pre env clipping)
    double log_prob;  // density of action under the conditioned policy
};

inline Vec concat2(const Vec& a, const Vec& b) {
    Vec out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline Vec concat3(const Vec& a, const Vec& b, const Vec& c) {
    Vec out;
    out.reserve(a.size() + b.size() + c.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    out.insert(out.end(), c.begin(), c.end());
    return out;
}

// Policy over input [s | tail] for a fixed conditioning tail: DR (empty
// tail), UP (mu, nu), and the pretraining/e=0 configurations (mu, zeros).
struct PlainActor {
    GaussianPolicy& policy;
    Vec tail;
    RngStream& rng;

    ActionChoice operator()(const Vec& s) {
        ActionChoice c;
        c.aux_obs = concat2(s, tail);
        c.action = policy.sample(c.aux_obs, rng, c.log_prob);
        return c;
    }
};

// The error-aware query chain: deterministic uncorrected action at e=0,
// predicted error, then the corrected action sampled with e in the input.
// A non-finite prediction falls back to the zero vector and is counted.
struct EapActor {
    GaussianPolicy& policy;
    ErrorPredictor& predictor;
    Vec mu;
    RngStream& rng;
    std::int64_t* fault_counter = nullptr;

    ActionChoice operator()(const Vec& s) {
        const Vec zero_e(predictor.e_dim(), 0.0);
        const Vec a_uncorrected = policy.mean(concat3(s, mu, zero_e));
        Vec e = predictor.predict(s, a_uncorrected, mu);
        if (!all_finite(e)) {
            e.assign(e.size(), 0.0);
            if (fault_counter) ++*fault_counter;
        }
        ActionChoice c;
        c.aux_obs = concat3(s, mu, e);
        c.action = policy.sample(c.aux_obs, rng, c.log_prob);
        return c;
    }
};

// Runs an actor in one environment for exactly n_steps, resetting on
// episode end; records completed-episode returns and the bootstrap input
// for a mid-episode cut.
template <typename ActFn>
RolloutBuffer collect_rollout(EnvInstance& env, int n_steps, ActFn&& act) {
    require(n_steps > 0, "collect_rollout: n_steps must be positive");
    RolloutBuffer buf;
    buf.steps.reserve(static_cast<std::size_t>(n_steps));
    Vec s = env.reset();
    double ep_return = 0.0;
    for (int t = 0; t < n_steps; ++t) {
        ActionChoice c = act(s);
        const StepResult r = env.step(c.action);
        Transition tr;
        tr.s = s;
        tr.a_hat = c.action;
        tr.r = r.reward;
        tr.s_next = r.state;
        tr.mu = env.params().mu;
        tr.log_prob = c.log_prob;
        tr.done = r.done;
        tr.aux_obs = std::move(c.aux_obs);
        buf.steps.push_back(std::move(tr));
        ep_return += r.reward;
        if (r.done) {
            buf.episode_returns.push_back(ep_return);
            ep_return = 0.0;
            s = env.reset();
        } else {
            s = r.state;
        }
    }
    // Bootstrap input for the (possibly) unfinished final episode. The
    // actor is queried the same way as during stepping so paired runs stay
    // draw-for-draw aligned; only the input vector is kept.
    buf.final_next_input = act(s).aux_obs;
    return buf;
}

}  // namespace eap
