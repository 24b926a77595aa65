#pragma once

#include <cmath>
#include <numbers>

#include "eap/common.hpp"
#include "eap/net/feedforward.hpp"
#include "eap/rng.hpp"

namespace eap {

// Diagonal-Gaussian policy head: a dense mean network plus one learnable,
// state-independent log_std per action dimension. Parameters are exposed as
// one flat vector [mean-net params | log_std] so a single optimizer drives
// both blocks.
class GaussianPolicy {
public:
    static constexpr double kLogStdMin = -5.0;
    static constexpr double kLogStdMax = 1.0;
    static constexpr double kLogStdInit = -0.5;

    explicit GaussianPolicy(std::vector<int> sizes)
        : net_(std::move(sizes)), log_std_(net_.output_dim(), kLogStdInit) {}

    void init(RngStream& rng) {
        net_.init_orthogonal(rng, std::sqrt(2.0), 0.01);
        std::fill(log_std_.begin(), log_std_.end(), kLogStdInit);
    }

    int obs_dim() const { return net_.input_dim(); }
    int action_dim() const { return net_.output_dim(); }
    std::size_t n_params() const { return net_.n_params() + log_std_.size(); }
    FeedforwardNet& net() { return net_; }
    const FeedforwardNet& net() const { return net_; }
    const Vec& log_std() const { return log_std_; }

    Vec params() const {
        Vec p = net_.params();
        p.insert(p.end(), log_std_.begin(), log_std_.end());
        return p;
    }

    void set_params(const Vec& p) {
        require(p.size() == n_params(), "policy set_params: wrong length");
        std::copy(p.begin(), p.begin() + static_cast<long>(net_.n_params()), net_.params().begin());
        std::copy(p.begin() + static_cast<long>(net_.n_params()), p.end(), log_std_.begin());
    }

    void clamp_log_std() {
        for (double& v : log_std_) v = clamp(v, kLogStdMin, kLogStdMax);
    }

    // Deterministic action; caches the forward pass for backward_cached.
    const Vec& mean(const Vec& obs) { return net_.forward(obs); }

    Vec sample(const Vec& obs, RngStream& rng, double& log_prob) {
        const Vec& m = net_.forward(obs);
        Vec a(m.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            a[i] = m[i] + std::exp(log_std_[i]) * rng.normal();
        log_prob = log_prob_cached(a);
        return a;
    }

    double log_prob(const Vec& obs, const Vec& action) {
        net_.forward(obs);
        return log_prob_cached(action);
    }

    // Log density of `action` under the Gaussian at the cached mean.
    double log_prob_cached(const Vec& action) const {
        const Vec& m = net_.output();
        require(action.size() == m.size(), "log_prob: action dimension mismatch");
        double lp = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double z = (action[i] - m[i]) * std::exp(-log_std_[i]);
            lp += -0.5 * z * z - log_std_[i] - 0.5 * std::log(2.0 * std::numbers::pi);
        }
        return lp;
    }

    // State-independent entropy of the diagonal Gaussian.
    double entropy() const {
        double h = 0.0;
        for (double ls : log_std_) h += ls + 0.5 * (1.0 + std::log(2.0 * std::numbers::pi));
        return h;
    }

    // Accumulates d(c_logp * log pi(action|obs) + c_ent * H)/d theta into
    // grad, layout [mean net | log_std]. Requires a cached forward on obs.
    void backward_cached(const Vec& action, double c_logp, double c_ent, Vec& grad) {
        require(grad.size() == n_params(), "policy backward: grad size mismatch");
        const Vec& m = net_.output();
        Vec dmean(m.size());
        double* g_ls = grad.data() + net_.n_params();
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double inv_std = std::exp(-log_std_[i]);
            const double z = (action[i] - m[i]) * inv_std;
            dmean[i] = c_logp * z * inv_std;
            g_ls[i] += c_logp * (z * z - 1.0) + c_ent;
        }
        net_.backward(std::move(dmean), grad.data());
    }

private:
    FeedforwardNet net_;
    Vec log_std_;
};

}  // namespace eap
