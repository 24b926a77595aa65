#pragma once

#include <vector>

#include "eap/common.hpp"

namespace eap {

// One experience record. aux_obs is the exact policy input used when the
// action was sampled (state plus whatever conditioning the method adds), so
// importance ratios can be recomputed exactly.
struct Transition {
    Vec s;
    Vec a_hat;
    double r = 0.0;
    Vec s_next;
    Vec mu;
    double log_prob = 0.0;
    bool done = false;
    Vec aux_obs;
};

struct RolloutBuffer {
    std::vector<Transition> steps;
    // Policy input at the state following the last stored step; the GAE
    // bootstrap when the buffer ends mid-episode.
    Vec final_next_input;
    std::vector<double> episode_returns;  // completed episodes only

    std::size_t size() const { return steps.size(); }
    void clear() {
        steps.clear();
        final_next_input.clear();
        episode_returns.clear();
    }

    double mean_episode_return() const {
        if (episode_returns.empty()) return 0.0;
        double s = 0.0;
        for (double r : episode_returns) s += r;
        return s / static_cast<double>(episode_returns.size());
    }
};

}  // namespace eap
