#include <catch2/catch_amalgamated.hpp>

#include "eap/eval/ablation.hpp"
#include "eap/eval/compare.hpp"
#include "eap/eval/evaluate.hpp"
#include "test_util.hpp"

using namespace eap;

namespace {

// Fixed-action factory: every environment gets the same per-step callable.
auto constant_actor(Vec action) {
    return [action](int, const DynamicsParams&) {
        return [action](const Vec&, RngStream&) { return action; };
    };
}

EvalReport synth_report(double mean_normalized, std::uint64_t pop_hash) {
    EvalReport r;
    r.population_hash = pop_hash;
    r.mean_normalized = mean_normalized;
    return r;
}

}  // namespace

TEST_CASE("zero-shot evaluation matches an independently coded rollout loop") {
    const EnvDescriptor d = pendulum_descriptor();
    const EnvPopulation pop = sample_population(d, 3, 2, 3, 901);
    EvalSettings settings;
    settings.n_episodes = 3;
    settings.seed = 44;
    const Vec action{0.8};

    const EvalReport rep =
        evaluate_zero_shot(d, pop, pop.heldout_idx, constant_actor(action), settings);

    REQUIRE(rep.per_env.size() == pop.heldout_idx.size());
    for (std::size_t k = 0; k < rep.per_env.size(); ++k) {
        const int idx = pop.heldout_idx[k];
        CHECK(rep.per_env[k].env_index == idx);

        // replay with the same derived seed and tally by hand
        EnvInstance env(d, pop.entries[static_cast<std::size_t>(idx)],
                        derive_seed(settings.seed, "eval_env", idx));
        Vec returns;
        for (int ep = 0; ep < settings.n_episodes; ++ep) {
            env.reset();
            double ret = 0.0;
            bool done = false;
            while (!done) {
                const StepResult r = env.step(action);
                ret += r.reward;
                done = r.done;
            }
            returns.push_back(ret);
        }
        double mean = 0.0;
        for (double r : returns) mean += r;
        mean /= static_cast<double>(returns.size());
        double var = 0.0;
        for (double r : returns) var += (r - mean) * (r - mean);

        CHECK(rep.per_env[k].mean_return == mean);
        CHECK(rep.per_env[k].std_return ==
              Catch::Approx(std::sqrt(var / returns.size())).margin(1e-12));
        CHECK(rep.per_env[k].mean_normalized ==
              Catch::Approx((mean - rep.norm_lo) / (rep.norm_hi - rep.norm_lo)).margin(1e-12));
    }

    double overall = 0.0;
    for (const auto& e : rep.per_env) overall += e.mean_normalized;
    CHECK(rep.mean_normalized ==
          Catch::Approx(overall / static_cast<double>(rep.per_env.size())).margin(1e-12));
    CHECK(rep.task == "pendulum");
    CHECK(rep.mode == "mean");
    CHECK(rep.n_episodes == 3);
    CHECK(rep.population_hash == population_hash(pop));
}

TEST_CASE("return anchors per task") {
    double lo = 0.0, hi = 0.0;
    return_anchors(TaskId::CartPole, 500, lo, hi);
    CHECK(lo == 0.0);
    CHECK(hi == 500.0);
    return_anchors(TaskId::CartPole, 123, lo, hi);
    CHECK(hi == 123.0);
    return_anchors(TaskId::Pendulum, 200, lo, hi);
    CHECK(lo == -1600.0);
    CHECK(hi == -150.0);
    return_anchors(TaskId::Hopper, 400, lo, hi);
    CHECK(lo == -200.0);
    CHECK(hi == 0.0);
}

TEST_CASE("evaluation is deterministic in its seed and mode") {
    const EnvDescriptor d = cartpole_descriptor();
    const EnvPopulation pop = sample_population(d, 2, 2, 2, 902);
    GaussianPolicy policy({4, 8, 8, 1});
    RngStream init_rng(45, "init");
    policy.init(init_rng);
    auto factory = make_baseline_eval_actor(policy, BaselineKind::DR, d, UpNuMode::Midpoint,
                                            EvalMode::Sampled);
    EvalSettings s1;
    s1.n_episodes = 4;
    s1.seed = 46;

    const EvalReport a = evaluate_zero_shot(d, pop, pop.heldout_idx, factory, s1);
    const EvalReport b = evaluate_zero_shot(d, pop, pop.heldout_idx, factory, s1);
    CHECK(a.mean_return == b.mean_return);
    for (std::size_t k = 0; k < a.per_env.size(); ++k)
        CHECK(a.per_env[k].mean_return == b.per_env[k].mean_return);

    EvalSettings s2 = s1;
    s2.seed = 47;
    const EvalReport c = evaluate_zero_shot(d, pop, pop.heldout_idx, factory, s2);
    CHECK(a.mean_return != c.mean_return);
}

TEST_CASE("mean and sampled evaluation modes genuinely differ") {
    const EnvDescriptor d = cartpole_descriptor();
    const EnvPopulation pop = sample_population(d, 2, 2, 2, 903);
    GaussianPolicy policy({4, 8, 8, 1});
    RngStream init_rng(48, "init");
    policy.init(init_rng);
    EvalSettings settings;
    settings.n_episodes = 4;
    settings.seed = 49;

    settings.mode = EvalMode::Mean;
    const EvalReport mean_rep = evaluate_zero_shot(
        d, pop, pop.heldout_idx,
        make_baseline_eval_actor(policy, BaselineKind::DR, d, UpNuMode::Midpoint, EvalMode::Mean),
        settings);
    settings.mode = EvalMode::Sampled;
    const EvalReport samp_rep = evaluate_zero_shot(
        d, pop, pop.heldout_idx,
        make_baseline_eval_actor(policy, BaselineKind::DR, d, UpNuMode::Midpoint,
                                 EvalMode::Sampled),
        settings);
    CHECK(mean_rep.mode == "mean");
    CHECK(samp_rep.mode == "sampled");
    CHECK(mean_rep.mean_return != samp_rep.mean_return);

    CHECK(eval_mode_from_string("mean") == EvalMode::Mean);
    CHECK(eval_mode_from_string("sampled") == EvalMode::Sampled);
    CHECK_THROWS_AS(eval_mode_from_string("greedy"), ConfigError);
}

TEST_CASE("evaluation actors query the policy with the declared inputs") {
    const EnvDescriptor d = cartpole_descriptor();
    DynamicsParams p = d.reference_params;
    p.nu = {0.01, 0.02, 0.03};
    const Vec s{0.1, -0.2, 0.03, 0.4};
    RngStream rng(50, "eval_actions");

    SECTION("dr sees the bare state") {
        GaussianPolicy policy({4, 8, 8, 1});
        RngStream init_rng(51, "init");
        policy.init(init_rng);
        auto actor = make_baseline_eval_actor(policy, BaselineKind::DR, d, UpNuMode::Midpoint,
                                              EvalMode::Mean)(0, p);
        CHECK(actor(s, rng) == policy.mean(s));
    }
    SECTION("up sees mu plus the midpoint or oracle nu") {
        GaussianPolicy policy({10, 8, 8, 1});
        RngStream init_rng(52, "init");
        policy.init(init_rng);
        auto mid = make_baseline_eval_actor(policy, BaselineKind::UP, d, UpNuMode::Midpoint,
                                            EvalMode::Mean)(0, p);
        CHECK(mid(s, rng) ==
              policy.mean(concat2(s, concat2(p.mu, train_range_midpoints(
                                                       d, ParamRole::Unobservable)))));
        auto oracle = make_baseline_eval_actor(policy, BaselineKind::UP, d, UpNuMode::Oracle,
                                               EvalMode::Mean)(0, p);
        CHECK(oracle(s, rng) == policy.mean(concat2(s, concat2(p.mu, p.nu))));
    }
    SECTION("eap runs the query chain; a zero predictor reduces it to e = 0") {
        ErrorPredictor pred(ErrorRepr::Full, 4, 1, 3, {8, 8}, 2, 3);
        RngStream pred_rng(53, "init");
        pred.init(pred_rng);
        GaussianPolicy policy({11, 8, 8, 1});
        RngStream init_rng(54, "init");
        policy.init(init_rng);
        auto actor = make_eap_eval_actor(policy, pred, EvalMode::Mean)(0, p);
        CHECK(actor(s, rng) == policy.mean(concat3(s, p.mu, Vec(4, 0.0))));
    }
}

TEST_CASE("evaluation leaves networks untouched") {
    const EnvDescriptor d = cartpole_descriptor();
    const EnvPopulation pop = sample_population(d, 2, 2, 2, 904);
    ErrorPredictor pred(ErrorRepr::Full, 4, 1, 3, {8, 8}, 2, 3);
    RngStream pred_rng(55, "init");
    pred.init(pred_rng);
    GaussianPolicy policy({11, 8, 8, 1});
    RngStream init_rng(56, "init");
    policy.init(init_rng);

    const Vec policy_before = policy.params();
    const Vec pred_before = pred.params();
    const std::int64_t norm_count = pred.input_normalizer().count();

    EvalSettings settings;
    settings.n_episodes = 2;
    settings.seed = 57;
    evaluate_zero_shot(d, pop, pop.heldout_idx,
                       make_eap_eval_actor(policy, pred, EvalMode::Sampled), settings);

    CHECK(policy.params() == policy_before);
    CHECK(pred.params() == pred_before);
    CHECK(pred.input_normalizer().count() == norm_count);
}

TEST_CASE("evaluation validates its inputs") {
    const EnvDescriptor d = cartpole_descriptor();
    const EnvPopulation pop = sample_population(d, 2, 2, 2, 905);
    EvalSettings s;
    s.n_episodes = 0;
    CHECK_THROWS_AS(evaluate_zero_shot(d, pop, pop.heldout_idx, constant_actor({0.0}), s),
                    ContractViolation);
    s.n_episodes = 1;
    CHECK_THROWS_AS(evaluate_zero_shot(d, pop, {}, constant_actor({0.0}), s),
                    ContractViolation);
}

TEST_CASE("compare_methods aggregates, ranks, and reports improvements") {
    MethodRuns eap{"eap",
                   {synth_report(0.8, 42), synth_report(0.9, 42)},
                   {1000, 1000},
                   {300, 300}};
    MethodRuns up{"up", {synth_report(0.7, 42), synth_report(0.8, 42)}, {1005, 995}, {}};
    MethodRuns dr{"dr", {synth_report(0.5, 42), synth_report(0.7, 42)}, {1000, 1000}, {}};

    const ComparisonReport rep = compare_methods({eap, up, dr});
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].method == "eap");
    CHECK(rep.rows[0].mean_normalized == Catch::Approx(0.85).margin(1e-15));
    CHECK(rep.rows[0].std_normalized == Catch::Approx(0.05).margin(1e-15));
    CHECK(rep.rows[1].mean_normalized == Catch::Approx(0.75).margin(1e-15));
    CHECK(rep.rows[2].mean_normalized == Catch::Approx(0.6).margin(1e-15));
    CHECK(rep.rows[2].std_normalized == Catch::Approx(0.1).margin(1e-15));
    CHECK(rep.rows[0].mean_error_samples == 300.0);
    CHECK(rep.rows[1].mean_error_samples == 0.0);

    REQUIRE(rep.improvement_vs.size() == 3);
    CHECK(rep.improvement_vs[0] == 0.0);
    CHECK(rep.improvement_vs[1] == Catch::Approx((0.85 - 0.75) / 0.75).margin(1e-12));
    CHECK(rep.improvement_vs[2] == Catch::Approx((0.85 - 0.6) / 0.6).margin(1e-12));

    CHECK(rep.max_budget_deviation == Catch::Approx(0.005).margin(1e-12));
    CHECK(rep.budget_parity_ok);
    CHECK(rep.error_samples_counted);

    const std::string csv = comparison_csv(rep);
    CHECK(csv.rfind("# eap-comparison v1", 0) == 0);
    CHECK(csv.find("eap,") != std::string::npos);
    CHECK(csv.find("budget_parity_ok,1") != std::string::npos);
}

TEST_CASE("compare_methods flags a budget parity breach") {
    MethodRuns eap{"eap", {synth_report(0.8, 7)}, {1000}, {200}};
    MethodRuns dr{"dr", {synth_report(0.6, 7)}, {1020}, {}};
    const ComparisonReport rep = compare_methods({eap, dr});
    CHECK(rep.max_budget_deviation == Catch::Approx(0.02).margin(1e-12));
    CHECK_FALSE(rep.budget_parity_ok);
    CHECK(comparison_csv(rep).find("budget_parity_ok,0") != std::string::npos);
}

TEST_CASE("compare_methods enforces population and shape parity") {
    MethodRuns eap{"eap", {synth_report(0.8, 7), synth_report(0.8, 7)}, {1000, 1000}, {1, 1}};
    MethodRuns mismatched{"dr", {synth_report(0.6, 7), synth_report(0.6, 8)}, {1000, 1000}, {}};
    CHECK_THROWS_AS(compare_methods({eap, mismatched}), ConfigError);

    MethodRuns short_run{"dr", {synth_report(0.6, 7)}, {1000}, {}};
    CHECK_THROWS_AS(compare_methods({eap, short_run}), ContractViolation);
    CHECK_THROWS_AS(compare_methods({eap}), ContractViolation);
    MethodRuns empty_a{"eap", {}, {}, {}};
    MethodRuns empty_b{"dr", {}, {}, {}};
    CHECK_THROWS_AS(compare_methods({empty_a, empty_b}), ContractViolation);

    MethodRuns no_err{"eap", {synth_report(0.8, 7)}, {1000}, {0}};
    MethodRuns other{"dr", {synth_report(0.6, 7)}, {1000}, {}};
    CHECK_FALSE(compare_methods({no_err, other}).error_samples_counted);
}

TEST_CASE("ablation sweeps record failures without aborting") {
    AblationSpec spec;
    spec.axis = AblationAxis::HorizonT;
    spec.values = {"1", "3", "5"};
    spec.seeds = {10, 11};

    int calls = 0;
    const AblationTable table = run_ablation(spec, [&calls](const std::string& v, std::uint64_t seed) {
        ++calls;
        if (v == "3" && seed == 11) throw RuntimeFailure("boom");
        if (v == "5") throw RuntimeFailure("always fails");
        return std::stod(v) * 0.1 + static_cast<double>(seed - 10) * 0.01;
    });

    CHECK(calls == 6);
    CHECK(table.axis == "horizon_T");
    REQUIRE(table.rows.size() == 3);

    CHECK(table.rows[0].n_ok == 2);
    CHECK(table.rows[0].n_runs == 2);
    CHECK(table.rows[0].mean == Catch::Approx(0.105).margin(1e-12));
    CHECK(table.rows[0].stddev == Catch::Approx(0.005).margin(1e-12));

    CHECK(table.rows[1].n_ok == 1);
    CHECK(table.rows[1].mean == Catch::Approx(0.3).margin(1e-12));
    CHECK_FALSE(table.rows[1].missing());

    CHECK(table.rows[2].n_ok == 0);
    CHECK(table.rows[2].missing());

    const std::string csv = ablation_csv(table);
    CHECK(csv.rfind("# eap-ablation v1", 0) == 0);
    CHECK(csv.find("horizon_T,5,,,0,2,missing") != std::string::npos);
    CHECK(csv.find("horizon_T,1,") != std::string::npos);
    CHECK(csv.find(",ok") != std::string::npos);
}

TEST_CASE("ablation specs are validated") {
    AblationSpec spec;
    spec.values = {"1"};
    spec.seeds = {1};
    CHECK_NOTHROW(spec.validate());

    AblationSpec no_values = spec;
    no_values.values = {};
    CHECK_THROWS_AS(no_values.validate(), ConfigError);

    AblationSpec no_seeds = spec;
    no_seeds.seeds = {};
    CHECK_THROWS_AS(no_seeds.validate(), ConfigError);

    AblationSpec bad_t = spec;
    bad_t.values = {"9"};
    CHECK_THROWS_AS(bad_t.validate(), ConfigError);
    bad_t.values = {"0"};
    CHECK_THROWS_AS(bad_t.validate(), ConfigError);

    AblationSpec repr = spec;
    repr.axis = AblationAxis::Representation;
    repr.values = {"full", "projected"};
    CHECK_NOTHROW(repr.validate());

    for (AblationAxis a : {AblationAxis::HorizonT, AblationAxis::Representation,
                           AblationAxis::MuSplit, AblationAxis::ReferenceChoice})
        CHECK(ablation_axis_from_string(to_string(a)) == a);
    CHECK_THROWS_AS(ablation_axis_from_string("entropy"), ConfigError);
}
