#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "eap/ppo/buffer.hpp"
#include "eap/ppo/gae.hpp"
#include "eap/ppo/ppo.hpp"
#include "eap/rng.hpp"
#include "test_util.hpp"

using namespace eap;

namespace {

Transition make_step(double t, double r, bool done) {
    Transition tr;
    tr.aux_obs = {0.1 * t, 0.05 * t * t};
    tr.r = r;
    tr.done = done;
    return tr;
}

double toy_value(const Vec& x) { return 0.3 * x[0] - 0.7 * x[1] + 0.1; }

// Direct evaluation of the GAE sum without the backward recursion.
Vec brute_force_gae(const RolloutBuffer& buf, const std::function<double(const Vec&)>& vf,
                    double gamma, double lambda) {
    const std::size_t n = buf.steps.size();
    Vec values(n);
    for (std::size_t t = 0; t < n; ++t) values[t] = vf(buf.steps[t].aux_obs);
    auto delta_at = [&](std::size_t t) {
        double v_next = 0.0;
        if (!buf.steps[t].done)
            v_next = (t + 1 < n) ? values[t + 1] : vf(buf.final_next_input);
        return buf.steps[t].r + gamma * v_next * (buf.steps[t].done ? 0.0 : 1.0) - values[t];
    };
    Vec adv(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double coef = 1.0;
        for (std::size_t l = t; l < n; ++l) {
            adv[t] += coef * delta_at(l);
            if (buf.steps[l].done) break;
            coef *= gamma * lambda;
        }
    }
    return adv;
}

// Synthetic buffer with log probs stored bitwise from the policy itself.
RolloutBuffer sample_buffer(GaussianPolicy& pol, int n, RngStream& obs_rng, RngStream& act_rng) {
    RolloutBuffer buf;
    for (int i = 0; i < n; ++i) {
        Transition tr;
        tr.aux_obs = {obs_rng.uniform(-1.0, 1.0), obs_rng.uniform(-1.0, 1.0),
                      obs_rng.uniform(-1.0, 1.0)};
        tr.s = tr.aux_obs;
        double lp = 0.0;
        tr.a_hat = pol.sample(tr.aux_obs, act_rng, lp);
        tr.log_prob = lp;
        tr.r = obs_rng.uniform(-1.0, 1.0);
        tr.done = (i % 7 == 6);
        buf.steps.push_back(std::move(tr));
        if (buf.steps.back().done) buf.episode_returns.push_back(0.0);
    }
    buf.final_next_input = {0.2, -0.1, 0.4};
    return buf;
}

}  // namespace

TEST_CASE("gae on a single terminal step is reward minus value") {
    RolloutBuffer buf;
    buf.steps.push_back(make_step(0.0, 2.0, true));
    auto vf = [](const Vec&) { return 0.7; };
    const GaeOutput out = compute_gae(buf, vf, 0.99, 0.95);
    CHECK(out.advantages[0] == Catch::Approx(2.0 - 0.7).margin(1e-14));
    CHECK(out.returns[0] == Catch::Approx(2.0).margin(1e-14));
}

TEST_CASE("gae with lambda zero reduces to one-step td errors") {
    RolloutBuffer buf;
    const double rewards[5] = {1.0, -0.5, 0.3, 2.0, 0.7};
    for (int t = 0; t < 5; ++t) buf.steps.push_back(make_step(t, rewards[t], t == 4));
    const double gamma = 0.9;
    const GaeOutput out = compute_gae(buf, toy_value, gamma, 0.0);
    for (int t = 0; t < 5; ++t) {
        const double v = toy_value(buf.steps[t].aux_obs);
        const double v_next = (t == 4) ? 0.0 : toy_value(buf.steps[t + 1].aux_obs);
        const double not_done = (t == 4) ? 0.0 : 1.0;
        const double delta = rewards[t] + gamma * v_next * not_done - v;
        CHECK(out.advantages[t] == Catch::Approx(delta).margin(1e-12));
    }
}

TEST_CASE("undiscounted gae with zero values gives episode suffix sums") {
    RngStream rng(11);
    RolloutBuffer buf;
    const int n = 40;
    for (int t = 0; t < n; ++t)
        buf.steps.push_back(make_step(t, rng.uniform(-1.0, 1.0), (t % 9 == 8) || t == n - 1));
    auto zero = [](const Vec&) { return 0.0; };
    const GaeOutput out = compute_gae(buf, zero, 1.0, 1.0);
    for (int t = 0; t < n; ++t) {
        double suffix = 0.0;
        for (int l = t; l < n; ++l) {
            suffix += buf.steps[l].r;
            if (buf.steps[l].done) break;
        }
        CHECK(out.advantages[t] == Catch::Approx(suffix).margin(1e-12));
        CHECK(out.returns[t] == Catch::Approx(suffix).margin(1e-12));
    }
}

TEST_CASE("gae recursion matches direct summation with a bootstrap tail") {
    RngStream rng(13);
    RolloutBuffer buf;
    const int n = 50;
    for (int t = 0; t < n; ++t) {
        const bool done = (t == 12 || t == 23 || t == 37);
        buf.steps.push_back(make_step(t, rng.uniform(-2.0, 2.0), done));
    }
    buf.final_next_input = {0.5, 0.25};  // last step is mid-episode
    const double gamma = 0.99, lambda = 0.95;
    const GaeOutput out = compute_gae(buf, toy_value, gamma, lambda);
    const Vec expect = brute_force_gae(buf, toy_value, gamma, lambda);
    CHECK(testutil::max_abs_diff(out.advantages, expect) < 1e-10);
    for (int t = 0; t < n; ++t)
        CHECK(out.returns[t] ==
              Catch::Approx(out.advantages[t] + toy_value(buf.steps[t].aux_obs)).margin(1e-12));
}

TEST_CASE("gae requires a bootstrap input for a mid-episode cut") {
    RolloutBuffer buf;
    buf.steps.push_back(make_step(0.0, 1.0, false));
    auto vf = [](const Vec&) { return 0.0; };
    CHECK_THROWS_AS(compute_gae(buf, vf, 0.99, 0.95), ContractViolation);
    buf.final_next_input = {0.0, 0.0};
    CHECK_NOTHROW(compute_gae(buf, vf, 0.99, 0.95));
    RolloutBuffer empty;
    CHECK_THROWS_AS(compute_gae(empty, vf, 0.99, 0.95), ContractViolation);
}

TEST_CASE("advantage normalization hits zero mean and unit variance") {
    Vec adv = {1.0, 2.0, 3.0, 4.0};
    normalize_advantages(adv);
    const double s = std::sqrt(1.25);
    CHECK(adv[0] == Catch::Approx(-1.5 / s).margin(1e-12));
    CHECK(adv[3] == Catch::Approx(1.5 / s).margin(1e-12));
    double mean = 0.0, var = 0.0;
    for (double a : adv) mean += a;
    mean /= 4.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= 4.0;
    CHECK(std::fabs(mean) < 1e-12);
    CHECK(var == Catch::Approx(1.0).margin(1e-12));

    Vec flat = {5.0, 5.0, 5.0};
    normalize_advantages(flat);
    for (double a : flat) CHECK(a == 0.0);
}

TEST_CASE("first update pass sees unit ratios and reports exact identities") {
    RngStream init(17), obs_rng(18), act_rng(19), shuffle(20);
    GaussianPolicy pol({3, 8, 8, 1});
    pol.init(init);
    FeedforwardNet value({3, 8, 8, 1});
    value.init_orthogonal(init, std::sqrt(2.0), 1.0);

    RolloutBuffer buf = sample_buffer(pol, 128, obs_rng, act_rng);

    PPOConfig cfg;
    cfg.minibatch_size = 128;  // single minibatch
    cfg.epochs_per_update = 1;

    // Expected value loss: squared error against the returns computed from
    // the same initial value function.
    const GaeOutput gae = compute_gae(
        buf, [&value](const Vec& x) { return value.forward(x)[0]; }, cfg.gamma, cfg.gae_lambda);
    double expect_vloss = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) {
        const double v = value.forward(buf.steps[i].aux_obs)[0];
        expect_vloss += (v - gae.returns[i]) * (v - gae.returns[i]);
    }
    expect_vloss /= static_cast<double>(buf.size());

    Adam popt("p", pol.n_params(), cfg.policy_lr), vopt("v", value.n_params(), cfg.value_lr);
    const PPOStats st = ppo_update(pol, popt, value, vopt, buf, cfg, shuffle);

    CHECK(st.approx_kl == 0.0);
    CHECK(st.clip_fraction == 0.0);
    CHECK(std::fabs(st.surrogate_loss) < 1e-12);  // mean of normalized advantages
    CHECK(st.value_loss == Catch::Approx(expect_vloss).margin(1e-12));
    CHECK(st.epochs_run == 1);
    CHECK_FALSE(st.early_stopped);
}

TEST_CASE("kl blowup stops the update before any step") {
    RngStream init(23), obs_rng(24), act_rng(25), shuffle(26);
    GaussianPolicy pol({3, 6, 6, 1});
    pol.init(init);
    FeedforwardNet value({3, 6, 6, 1});
    value.init_orthogonal(init, std::sqrt(2.0), 1.0);

    RolloutBuffer buf = sample_buffer(pol, 64, obs_rng, act_rng);
    for (auto& tr : buf.steps) tr.log_prob += 10.0;  // stored probs now far off

    const Vec pol_before = pol.params();
    const Vec val_before = value.params();

    PPOConfig cfg;
    cfg.minibatch_size = 64;
    Adam popt("p", pol.n_params(), cfg.policy_lr), vopt("v", value.n_params(), cfg.value_lr);
    const PPOStats st = ppo_update(pol, popt, value, vopt, buf, cfg, shuffle);

    CHECK(st.early_stopped);
    CHECK(st.epochs_run == 0);
    CHECK(st.approx_kl == Catch::Approx(10.0).margin(1e-9));
    CHECK(st.clip_fraction == 1.0);  // exp(-10) ratios are all far outside the clip
    CHECK(pol.params() == pol_before);
    CHECK(value.params() == val_before);
}

TEST_CASE("value regression moves predictions toward the gae returns") {
    RngStream init(29), obs_rng(30), act_rng(31), shuffle(32);
    GaussianPolicy pol({3, 6, 6, 1});
    pol.init(init);
    FeedforwardNet value({3, 6, 6, 1});
    value.init_orthogonal(init, std::sqrt(2.0), 1.0);

    RolloutBuffer buf = sample_buffer(pol, 128, obs_rng, act_rng);
    PPOConfig cfg;
    cfg.minibatch_size = 32;
    cfg.epochs_per_update = 5;

    const GaeOutput gae = compute_gae(
        buf, [&value](const Vec& x) { return value.forward(x)[0]; }, cfg.gamma, cfg.gae_lambda);
    auto mse_vs = [&](const Vec& targets) {
        double s = 0.0;
        for (std::size_t i = 0; i < buf.size(); ++i) {
            const double v = value.forward(buf.steps[i].aux_obs)[0];
            s += (v - targets[i]) * (v - targets[i]);
        }
        return s / static_cast<double>(buf.size());
    };
    const double before = mse_vs(gae.returns);
    Adam popt("p", pol.n_params(), cfg.policy_lr), vopt("v", value.n_params(), cfg.value_lr);
    ppo_update(pol, popt, value, vopt, buf, cfg, shuffle);
    const double after = mse_vs(gae.returns);
    CHECK(after < before);
}

TEST_CASE("ppo solves a continuous bandit") {
    RngStream init(37), act_rng(38), shuffle(39);
    GaussianPolicy pol({1, 8, 8, 1});
    pol.init(init);
    FeedforwardNet value({1, 8, 8, 1});
    value.init_orthogonal(init, std::sqrt(2.0), 1.0);

    PPOConfig cfg;
    cfg.policy_lr = 3e-3;
    cfg.value_lr = 3e-3;
    cfg.minibatch_size = 64;
    cfg.epochs_per_update = 10;

    const Vec obs = {0.0};
    const double target = 0.5;
    auto reward = [&](double a) { return -(a - target) * (a - target); };

    const double dist_before = std::fabs(pol.mean(obs)[0] - target);
    Adam popt("p", pol.n_params(), cfg.policy_lr), vopt("v", value.n_params(), cfg.value_lr);
    for (int iter = 0; iter < 15; ++iter) {
        RolloutBuffer buf;
        for (int i = 0; i < 256; ++i) {
            Transition tr;
            tr.aux_obs = obs;
            tr.s = obs;
            double lp = 0.0;
            tr.a_hat = pol.sample(obs, act_rng, lp);
            tr.log_prob = lp;
            tr.r = reward(tr.a_hat[0]);
            tr.done = true;  // one-step episodes
            buf.episode_returns.push_back(tr.r);
            buf.steps.push_back(std::move(tr));
        }
        ppo_update(pol, popt, value, vopt, buf, cfg, shuffle);
    }
    const double dist_after = std::fabs(pol.mean(obs)[0] - target);
    CHECK(dist_after < 0.5 * dist_before);
    CHECK(dist_after < 0.2);
}

TEST_CASE("ppo rejects a buffer smaller than one minibatch") {
    RngStream init(41), obs_rng(42), act_rng(43), shuffle(44);
    GaussianPolicy pol({3, 4, 4, 1});
    pol.init(init);
    FeedforwardNet value({3, 4, 4, 1});
    value.init_orthogonal(init, std::sqrt(2.0), 1.0);
    RolloutBuffer buf = sample_buffer(pol, 32, obs_rng, act_rng);
    PPOConfig cfg;
    cfg.minibatch_size = 64;
    Adam popt("p", pol.n_params(), cfg.policy_lr), vopt("v", value.n_params(), cfg.value_lr);
    CHECK_THROWS_AS(ppo_update(pol, popt, value, vopt, buf, cfg, shuffle), ContractViolation);
}

TEST_CASE("ppo config validation rejects out-of-range settings") {
    PPOConfig ok;
    CHECK_NOTHROW(ok.validate());
    PPOConfig c;
    c.gamma = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = PPOConfig{};
    c.gamma = 1.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = PPOConfig{};
    c.gae_lambda = 1.2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = PPOConfig{};
    c.clip_epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = PPOConfig{};
    c.epochs_per_update = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = PPOConfig{};
    c.minibatch_size = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = PPOConfig{};
    c.policy_lr = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("rollout buffer bookkeeping") {
    RolloutBuffer buf;
    CHECK(buf.mean_episode_return() == 0.0);
    buf.episode_returns = {1.0, 3.0};
    CHECK(buf.mean_episode_return() == Catch::Approx(2.0));
    buf.steps.push_back(Transition{});
    buf.final_next_input = {1.0};
    buf.clear();
    CHECK(buf.size() == 0);
    CHECK(buf.final_next_input.empty());
    CHECK(buf.episode_returns.empty());
}
